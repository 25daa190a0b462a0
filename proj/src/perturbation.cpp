#include "tqo/perturbation.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <regex>
#include <sstream>

#include "tqo/errors.hpp"

namespace tqo {

namespace {

Mat scaled_to(Mat m, double target) {
    double n = opnorm(m);
    if (n == 0) throw NumericalError("random block with zero norm");
    return m * (target / n);
}

}  // namespace

LocalDecomposition random_perturbation(const Lattice& lat, const PerturbationOptions& opt) {
    if (opt.q < 1 || opt.q > lat.L()) throw UsageError("locality q must lie in [1, L]");
    LocalDecomposition v(&lat);
    v.claimed = DecayClass{opt.J, opt.mu, 0};
    if (opt.J == 0) return v;
    std::mt19937_64 rng(opt.seed);
    if (opt.two_local) {
        if (lat.layout() != Layout::edges) throw UsageError("two-local perturbations need the edges layout");
        for (const auto& s : lat.squares(1)) {
            auto q = lat.qubits(s);
            int h0 = lat.edge(s.x, s.y, 0), h1 = lat.edge(s.x, s.y + 1, 0);
            int v0 = lat.edge(s.x, s.y, 1), v1 = lat.edge(s.x + 1, s.y, 1);
            Mat block = Mat::Zero(1L << q.size(), 1L << q.size());
            for (auto [a, b] : {std::pair{h0, v0}, {h0, v1}, {h1, v0}, {h1, v1}}) {
                std::vector<int> pair{std::min(a, b), std::max(a, b)};
                block += extend(random_gue(4, rng), pair, q);
            }
            v.add(s, scaled_to(block, opt.J * std::exp(-opt.mu)));
        }
        return v;
    }
    for (int r = 1; r <= opt.q; ++r)
        for (const auto& s : lat.squares(r)) {
            long d = 1L << lat.qubits(s).size();
            require_dense(d, "random perturbation block");
            v.add(s, scaled_to(random_gue(int(d), rng), opt.J * std::exp(-opt.mu * r)));
        }
    return v;
}

std::string format_perturbation(const LocalDecomposition& v) {
    const Lattice& lat = v.lattice();
    std::ostringstream out;
    out << std::setprecision(17);
    out << "perturbation L=" << lat.L() << " layout=" << (lat.layout() == Layout::edges ? "edges" : "sites");
    if (v.claimed) out << " J=" << v.claimed->J << " mu=" << v.claimed->mu << " alpha=" << v.claimed->alpha;
    out << "\n";
    for (const auto& [s, op] : v.terms()) {
        long d = op.m.rows();
        out << "@square (" << s.x << "," << s.y << "," << s.r << ") dense " << d << "\n";
        for (long i = 0; i < d; ++i) {
            for (long j = 0; j < d; ++j) out << (j ? " " : "") << op.m(i, j).real() << " " << op.m(i, j).imag();
            out << "\n";
        }
    }
    return out.str();
}

LocalDecomposition parse_perturbation(const Lattice& lat, const std::string& text) {
    static const std::regex header(
        R"(\s*perturbation\s+L=(\d+)\s+layout=(edges|sites)(?:\s+J=(\S+)\s+mu=(\S+)\s+alpha=(\S+))?\s*)");
    static const std::regex sq(R"(\s*@square\s*\(\s*(-?\d+)\s*,\s*(-?\d+)\s*,\s*(\d+)\s*\)\s+(pauli|dense)(?:\s+(\d+))?\s*)");
    std::istringstream in(text);
    std::string line;
    std::smatch m;
    int lineno = 0;
    auto fail = [&](const std::string& msg) { throw UsageError("line " + std::to_string(lineno) + ": " + msg); };
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") != std::string::npos) break;
    }
    if (!std::regex_match(line, m, header)) fail("expected 'perturbation L=<int> layout=<edges|sites> ...'");
    Layout layout = m[2] == "edges" ? Layout::edges : Layout::sites;
    if (std::stoi(m[1]) != lat.L() || layout != lat.layout()) fail("perturbation lattice does not match the model");
    LocalDecomposition v(&lat);
    if (m[3].matched) v.claimed = DecayClass{std::stod(m[3]), std::stod(m[4]), std::stod(m[5])};

    std::optional<Square> cur;
    Mat block;
    std::vector<int> q;
    bool dense = false;
    long expected = 0, filled = 0;
    auto flush = [&] {
        if (!cur) return;
        if (dense && filled != expected * expected) fail("dense block for " + to_string(*cur) + " is incomplete");
        if (!block.isApprox(block.adjoint(), 1e-12) && block.norm() > 0) fail("term on " + to_string(*cur) + " is not Hermitian");
        v.add(*cur, block);
        cur.reset();
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        if (std::regex_match(line, m, sq)) {
            flush();
            cur = lat.canonical(Square{std::stoi(m[1]), std::stoi(m[2]), std::stoi(m[3])});
            q = lat.qubits(*cur);
            long d = 1L << q.size();
            require_dense(d, "perturbation block");
            block = Mat::Zero(d, d);
            dense = m[4] == "dense";
            filled = 0;
            expected = d;
            if (dense && m[5].matched && std::stol(m[5]) != d) fail("dense block size does not match square");
            continue;
        }
        if (!cur) fail("term before any @square line");
        std::istringstream ls(line);
        if (dense) {
            double re, im;
            while (ls >> re) {
                if (!(ls >> im)) fail("dense entries come in 're im' pairs");
                if (filled >= expected * expected) fail("too many dense entries");
                block(filled / expected, filled % expected) = cplx(re, im);
                ++filled;
            }
            if (!ls.eof()) fail("bad number");
        } else {
            double c;
            if (!(ls >> c)) fail("expected '<coefficient> <Pauli>'");
            std::string rest;
            std::getline(ls, rest);
            Pauli p;
            try {
                p = Pauli::parse(rest, lat.qubit_count());
            } catch (const UsageError& e) {
                fail(e.what());
            }
            if (!p.hermitian()) fail("Pauli term must be Hermitian");
            add_pauli(block, p, q, c);
        }
    }
    flush();
    if (v.claimed && !v.satisfies(*v.claimed))
        throw UsageError("perturbation violates its claimed decay class (strength " +
                         std::to_string(v.strength(v.claimed->mu, v.claimed->alpha)) + " > J)");
    return v;
}

LocalDecomposition load_perturbation_file(const Lattice& lat, const std::string& path) {
    std::ifstream f(path);
    if (!f) throw UsageError("cannot open perturbation file " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_perturbation(lat, ss.str());
}

}  // namespace tqo
