#include "tqo/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <regex>
#include <sstream>

#include "tqo/errors.hpp"

namespace tqo {

std::string to_string(const Square& s) {
    return "(" + std::to_string(s.x) + "," + std::to_string(s.y) + "," + std::to_string(s.r) + ")";
}

Lattice::Lattice(int L, Layout layout) : L_(L), layout_(layout) {
    if (L < 1) throw UsageError("lattice size must be positive");
}

int Lattice::distance(int x1, int y1, int x2, int y2) const {
    int dx = wrap(x1 - x2), dy = wrap(y1 - y2);
    return std::max(std::min(dx, L_ - dx), std::min(dy, L_ - dy));
}

Square Lattice::canonical(Square s) const {
    if (s.r < 1) throw UsageError("square size must be >= 1");
    if (s.r >= L_) return {0, 0, L_};
    return {wrap(s.x), wrap(s.y), s.r};
}

std::vector<Square> Lattice::squares(int r) const {
    if (r < 1) throw UsageError("square size must be >= 1");
    if (r > L_) return {};
    if (r == L_) return {{0, 0, L_}};
    std::vector<Square> out;
    out.reserve(std::size_t(L_) * L_);
    for (int x = 0; x < L_; ++x)
        for (int y = 0; y < L_; ++y) out.push_back({x, y, r});
    return out;
}

Square Lattice::grow(const Square& s, int j) const {
    return canonical({s.x - j, s.y - j, s.r + 2 * j});
}

bool Lattice::contains(const Square& outer, const Square& inner) const {
    if (outer.r >= L_) return true;
    if (inner.r >= L_) return false;
    int dx = wrap(inner.x - outer.x), dy = wrap(inner.y - outer.y);
    return dx + inner.r <= outer.r && dy + inner.r <= outer.r;
}

bool Lattice::contains_cell(const Square& s, int x, int y) const {
    if (s.r >= L_) return true;
    return wrap(x - s.x) < s.r && wrap(y - s.y) < s.r;
}

bool Lattice::overlaps(const Square& a, const Square& b) const {
    auto axis = [&](int a0, int ar, int b0, int br) {
        if (ar >= L_ || br >= L_) return true;
        int d = wrap(b0 - a0);
        return d < ar || d + br > L_;
    };
    return axis(a.x, a.r, b.x, b.r) && axis(a.y, a.r, b.y, b.r);
}

std::vector<int> Lattice::qubits(const Square& sq) const {
    Square s = canonical(sq);
    std::vector<int> q;
    for (int i = 0; i < s.r; ++i)
        for (int j = 0; j < s.r; ++j) {
            int x = s.x + i, y = s.y + j;
            if (layout_ == Layout::sites) {
                q.push_back(site(x, y));
            } else {
                q.push_back(edge(x, y, 0));
                q.push_back(edge(x, y + 1, 0));
                q.push_back(edge(x, y, 1));
                q.push_back(edge(x + 1, y, 1));
            }
        }
    std::sort(q.begin(), q.end());
    q.erase(std::unique(q.begin(), q.end()), q.end());
    return q;
}

BitVec Lattice::region(const Square& s) const {
    BitVec b(qubit_count());
    for (int q : qubits(s)) b.set(q);
    return b;
}

std::optional<Square> Lattice::covering_square(const BitVec& support, int r) const {
    for (const auto& s : squares(r)) {
        BitVec reg = region(s);
        if ((support & reg) == support) return s;
    }
    return std::nullopt;
}

std::optional<Square> Lattice::smallest_covering_square(const BitVec& support) const {
    for (int r = 1; r <= L_; ++r)
        if (auto s = covering_square(support, r)) return s;
    return std::nullopt;
}

// ---- LocalDecomposition ----

void LocalDecomposition::add(const Square& s, const Mat& m) {
    Square c = lat_->canonical(s);
    auto it = terms_.find(c);
    if (it == terms_.end()) {
        auto q = lat_->qubits(c);
        if (m.rows() != (1L << q.size())) throw UsageError("term dimension does not match square " + to_string(c));
        terms_.emplace(c, LocalOp{std::move(q), m});
    } else {
        it->second.m += m;
    }
}

void LocalDecomposition::add(const Square& s, const LocalOp& op) {
    auto q = lat_->qubits(s);
    add(s, extend(op.m, op.qubits, q));
}

LocalOp LocalDecomposition::total_on(std::span<const int> qubits) const {
    long d = 1L << qubits.size();
    require_dense(d, "decomposition materialization");
    LocalOp out{std::vector<int>(qubits.begin(), qubits.end()), Mat::Zero(d, d)};
    for (const auto& [s, op] : terms_) out.m += extend(op.m, op.qubits, qubits);
    return out;
}

Mat LocalDecomposition::dense() const {
    std::vector<int> all(lat_->qubit_count());
    for (int q = 0; q < int(all.size()); ++q) all[q] = q;
    return total_on(all).m;
}

double LocalDecomposition::strength(double mu, double alpha) const {
    double s = 0;
    for (const auto& [sq, op] : terms_)
        s = std::max(s, opnorm(op.m) * std::pow(double(sq.r), alpha) * std::exp(mu * sq.r));
    return s;
}

bool LocalDecomposition::satisfies(const DecayClass& c, double slack) const {
    return strength(c.mu, c.alpha) <= c.J * (1 + slack) + 1e-300;
}

LocalDecomposition LocalDecomposition::scaled(double f) const {
    LocalDecomposition out(lat_);
    for (const auto& [s, op] : terms_) out.terms_.emplace(s, LocalOp{op.qubits, op.m * f});
    if (claimed) out.claimed = DecayClass{claimed->J * std::abs(f), claimed->mu, claimed->alpha};
    return out;
}

// ---- Model ----

std::vector<int> Model::generators_at(const Square& a) const {
    Square c = lattice.canonical(a);
    std::vector<int> out;
    for (int g = 0; g < int(assignment.size()); ++g)
        if (assignment[g] == c) out.push_back(g);
    return out;
}

std::vector<int> Model::generators_in(const Square& s) const {
    std::vector<int> out;
    for (int g = 0; g < int(assignment.size()); ++g)
        if (lattice.contains(s, assignment[g])) out.push_back(g);
    return out;
}

LocalOp Model::local_ground_projector(const Square& B) const {
    auto q = lattice.qubits(B);
    long d = 1L << q.size();
    require_dense(d, "local ground projector");
    Mat m = Mat::Identity(d, d);
    for (int g : generators_in(B)) {
        Mat sm = m;
        pauli_left_multiply(group.generators()[g], q, sm);
        m = (m + sm) * 0.5;
    }
    return {std::move(q), std::move(m)};
}

LocalOp Model::local_hamiltonian(const Square& A) const {
    auto q = lattice.qubits(A);
    long d = 1L << q.size();
    require_dense(d, "local Hamiltonian");
    Mat m = Mat::Zero(d, d);
    for (int g : generators_in(A)) {
        m.diagonal().array() += 0.5;
        add_pauli(m, group.generators()[g], q, -0.5);
    }
    return {std::move(q), std::move(m)};
}

LocalOp Model::term(const Square& A) const {
    auto q = lattice.qubits(A);
    long d = 1L << q.size();
    require_dense(d, "projector term");
    Mat m = Mat::Zero(d, d);
    for (int g : generators_at(A)) {
        m.diagonal().array() += 0.5;
        add_pauli(m, group.generators()[g], q, -0.5);
    }
    return {std::move(q), std::move(m)};
}

std::vector<int> Model::all_qubits() const {
    std::vector<int> all(qubit_count());
    for (int q = 0; q < qubit_count(); ++q) all[q] = q;
    return all;
}

Mat Model::h0_dense() const {
    return local_hamiltonian({0, 0, lattice.L()}).m;
}

Mat Model::stabilizer_hamiltonian_dense() const {
    auto all = all_qubits();
    long d = 1L << all.size();
    require_dense(d, "stabilizer Hamiltonian");
    Mat m = Mat::Zero(d, d);
    for (const auto& g : group.generators()) add_pauli(m, g, all, -1.0);
    return m;
}

Mat Model::ground_projector_dense() const {
    return local_ground_projector({0, 0, lattice.L()}).m;
}

Model make_model(std::string name, Lattice lat, std::vector<Pauli> gens, std::vector<std::optional<Square>> squares) {
    Model m;
    m.name = std::move(name);
    m.lattice = lat;
    if (lat.L() < 2) throw UsageError("lattice size must be >= 2");
    squares.resize(gens.size());
    for (std::size_t g = 0; g < gens.size(); ++g) {
        BitVec sup = gens[g].support();
        Square s;
        if (squares[g]) {
            s = lat.canonical(*squares[g]);
            if (s.r != std::min(2, lat.L())) throw UsageError("generator " + gens[g].str() + " assigned to a non-2x2 square");
            BitVec reg = lat.region(s);
            if ((sup & reg) != sup) throw UsageError("generator " + gens[g].str() + " not supported in " + to_string(s));
        } else {
            auto c = lat.covering_square(sup, 2);
            if (!c) throw UsageError("generator " + gens[g].str() + " is not 2x2-local");
            s = *c;
        }
        m.assignment.push_back(s);
    }
    m.group = StabilizerGroup(lat.qubit_count(), std::move(gens));
    return m;
}

namespace {

Pauli plaquette(const Lattice& lat, int x, int y) {
    int n = lat.qubit_count();
    Pauli p(n);
    for (int q : {lat.edge(x, y, 0), lat.edge(x, y + 1, 0), lat.edge(x, y, 1), lat.edge(x + 1, y, 1)})
        p *= Pauli::single(n, q, 'Z');
    return p;
}

Pauli star(const Lattice& lat, int x, int y) {
    int n = lat.qubit_count();
    Pauli p(n);
    for (int q : {lat.edge(x, y, 0), lat.edge(x - 1, y, 0), lat.edge(x, y, 1), lat.edge(x, y - 1, 1)})
        p *= Pauli::single(n, q, 'X');
    return p;
}

}  // namespace

Model build_toric_code(int L) {
    if (L < 2) throw UsageError("toric code needs L >= 2");
    Lattice lat(L, Layout::edges);
    std::vector<Pauli> gens;
    for (int y = 0; y < L; ++y)
        for (int x = 0; x < L; ++x) gens.push_back(plaquette(lat, x, y));
    for (int y = 0; y < L; ++y)
        for (int x = 0; x < L; ++x) gens.push_back(star(lat, x, y));
    return make_model("toric:" + std::to_string(L), lat, std::move(gens));
}

Model build_unstable_toric_code(int L, std::pair<int, int> pstar) {
    if (L < 2) throw UsageError("unstable toric code needs L >= 2");
    if ((L * L) % 2) throw UsageError("unstable toric code needs an even number of plaquettes");
    Lattice lat(L, Layout::edges);
    std::vector<Pauli> gens;
    std::vector<std::pair<int, int>> seen;
    for (int y = 0; y < L; ++y)
        for (int x = 0; x < L; ++x) {
            int p = lat.site(x, y);
            for (int q : {lat.site(x + 1, y), lat.site(x, y + 1)}) {
                std::pair<int, int> key{std::min(p, q), std::max(p, q)};
                if (p == q || std::find(seen.begin(), seen.end(), key) != seen.end()) continue;
                seen.push_back(key);
                gens.push_back(plaquette(lat, p % L, p / L) * plaquette(lat, q % L, q / L));
            }
        }
    for (int y = 0; y < L; ++y)
        for (int x = 0; x < L; ++x) gens.push_back(star(lat, x, y));
    gens.push_back(plaquette(lat, pstar.first, pstar.second));
    return make_model("unstable-toric:" + std::to_string(L), lat, std::move(gens));
}

Model parse_model(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::optional<Lattice> lat;
    std::vector<Pauli> gens;
    std::vector<std::optional<Square>> squares;
    static const std::regex header(R"(\s*lattice\s+L=(\d+)\s+layout=(edges|sites)\s*)");
    static const std::regex sq(R"(@square\s*\(\s*(-?\d+)\s*,\s*(-?\d+)\s*,\s*(\d+)\s*\))");
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::smatch m;
        if (!lat) {
            if (!std::regex_match(line, m, header))
                throw UsageError("line " + std::to_string(lineno) + ": expected 'lattice L=<int> layout=<edges|sites>'");
            lat = Lattice(std::stoi(m[1]), m[2] == "edges" ? Layout::edges : Layout::sites);
            continue;
        }
        std::optional<Square> s;
        if (std::regex_search(line, m, sq)) {
            s = Square{std::stoi(m[1]), std::stoi(m[2]), std::stoi(m[3])};
            line = m.prefix().str() + m.suffix().str();
        }
        try {
            gens.push_back(Pauli::parse(line, lat->qubit_count()));
        } catch (const UsageError& e) {
            throw UsageError("line " + std::to_string(lineno) + ": " + e.what());
        }
        squares.push_back(s);
    }
    if (!lat) throw UsageError("model file has no lattice header");
    return make_model("file", *lat, std::move(gens), std::move(squares));
}

std::string format_model(const Model& m) {
    std::ostringstream out;
    out << "lattice L=" << m.lattice.L() << " layout=" << (m.lattice.layout() == Layout::edges ? "edges" : "sites") << "\n";
    for (std::size_t g = 0; g < m.group.generators().size(); ++g) {
        const auto& s = m.assignment[g];
        out << m.group.generators()[g].str() << " @square (" << s.x << "," << s.y << "," << s.r << ")\n";
    }
    return out.str();
}

Model load_model_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw UsageError("cannot open model file " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    Model m = parse_model(ss.str());
    m.name = path;
    return m;
}

Model builtin_model(const std::string& spec) {
    auto colon = spec.find(':');
    if (colon == std::string::npos) throw UsageError("builtin model must look like toric:<L>");
    std::string kind = spec.substr(0, colon);
    int L;
    try {
        L = std::stoi(spec.substr(colon + 1));
    } catch (const std::exception&) {
        throw UsageError("bad lattice size in '" + spec + "'");
    }
    if (kind == "toric") return build_toric_code(L);
    if (kind == "unstable-toric") return build_unstable_toric_code(L);
    throw UsageError("unknown builtin model '" + kind + "'");
}

// ---- matrix-free Hamiltonian ----

Hamiltonian::Hamiltonian(const Model& model, const LocalDecomposition* v, double v_scale)
    : model_(&model), v_(v), scale_(v_scale), dim_(1LL << model.qubit_count()) {
    if (model.qubit_count() > 62) throw ResourceError("Hilbert space too large", -1);
    require_matrix_free(dim_, "Hamiltonian");
}

void Hamiltonian::apply(const Vec& in, Vec& out) const {
    out = Vec::Zero(dim_);
    static const cplx ipow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    int n = model_->qubit_count();
    for (const auto& g : model_->group.generators()) {
        unsigned long long xm = 0, zm = 0;
        for (int q = 0; q < n; ++q) {
            if (g.x().get(q)) xm |= 1ULL << q;
            if (g.z().get(q)) zm |= 1ULL << q;
        }
        cplx ph = -0.5 * ipow[g.phase()];
        for (long long b = 0; b < dim_; ++b) {
            out[b] += 0.5 * in[b];
            out[b ^ xm] += ((__builtin_popcountll(zm & b) & 1) ? -ph : ph) * in[b];
        }
    }
    if (!v_) return;
    for (const auto& [s, op] : v_->terms()) {
        long long inner = 0;
        for (int q : op.qubits) inner |= 1LL << q;
        long d = op.m.rows();
        std::vector<long long> sc(d, 0);
        for (long a = 0; a < d; ++a)
            for (std::size_t k = 0; k < op.qubits.size(); ++k)
                if ((a >> k) & 1) sc[a] |= 1LL << op.qubits[k];
        for (long long b = 0; b < dim_; ++b) {
            if (b & inner) continue;
            // b is the "rest" pattern; act on the block spanned by rest | sc[*]
            for (long c = 0; c < d; ++c) {
                cplx x = in[b | sc[c]] * scale_;
                if (x == cplx(0)) continue;
                for (long r = 0; r < d; ++r) out[b | sc[r]] += op.m(r, c) * x;
            }
        }
    }
}

Mat Hamiltonian::dense() const {
    require_dense(dim_, "dense Hamiltonian");
    Mat h = model_->h0_dense();
    if (v_) h += v_->dense() * scale_;
    return h;
}

}  // namespace tqo
