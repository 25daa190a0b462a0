// Command-line front end: every command prints its primary output to stdout and, with --out,
// also writes it to a directory together with a manifest.json.
#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "tqo/errors.hpp"
#include "tqo/flow.hpp"
#include "tqo/locality.hpp"
#include "tqo/perturbation.hpp"
#include "tqo/spectral.hpp"
#include "tqo/tqo_check.hpp"

using json = nlohmann::json;
using namespace tqo;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Common {
    std::string model_file, builtin, perturbation, out;
    int jobs = 1;
};

struct Output {
    json report = json::object();
    std::string csv;
    std::string table;  // human-readable text printed instead of JSON when non-empty
    bool pass = true;
};

std::string fmt(double v) {
    std::ostringstream s;
    s << std::setprecision(17) << v;
    return s.str();
}

json square_json(const Square& s) { return {{"x", s.x}, {"y", s.y}, {"r", s.r}}; }

json class_json(const std::optional<DecayClass>& c) {
    if (!c) return nullptr;
    return {{"J", c->J}, {"mu", c->mu}, {"alpha", c->alpha}};
}

Model load_model(const Common& c) {
    if (!c.model_file.empty() && !c.builtin.empty()) throw UsageError("give either --model or --builtin, not both");
    if (!c.model_file.empty()) return load_model_file(c.model_file);
    if (!c.builtin.empty()) return builtin_model(c.builtin);
    throw UsageError("a model is required (--model <file> or --builtin toric:<L>)");
}

// the claimed class as read and the strength actually measured at the claimed (mu, alpha)
json decomposition_json(const LocalDecomposition& v) {
    json j = {{"terms", v.size()}, {"claimed", class_json(v.claimed)}};
    if (v.claimed) j["verified"] = {{"J", v.strength(v.claimed->mu, v.claimed->alpha)},
                                    {"mu", v.claimed->mu},
                                    {"alpha", v.claimed->alpha},
                                    {"holds", v.satisfies(*v.claimed)}};
    return j;
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::vector<double> all_eigs(const Mat& h) {
    Eigen::SelfAdjointEigenSolver<Mat> es(h, Eigen::EigenvaluesOnly);
    return {es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size()};
}

std::vector<double> lowest(const Model& m, const LocalDecomposition* v, double scale, int count) {
    long long dim = 1LL << m.qubit_count();
    if (dim <= dense_cap()) {
        Mat h = m.h0_dense();
        if (v && !v->empty()) h += scale * v->dense();
        auto ev = all_eigs(h);
        ev.resize(std::min<std::size_t>(ev.size(), std::size_t(count)));
        return ev;
    }
    Hamiltonian h(m, v && !v->empty() ? v : nullptr, scale);
    return low_spectrum(h, count);
}

std::vector<int> parse_qubits(const std::string& s) {
    std::vector<int> q;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, '+')) {
        try {
            q.push_back(std::stoi(tok));
        } catch (const std::exception&) {
            throw UsageError("bad qubit index '" + tok + "' in region '" + s + "'");
        }
    }
    std::sort(q.begin(), q.end());
    return q;
}

// ---- commands ----

Output cmd_check(const Common& c, const std::string& condition, const std::string& method, std::optional<int> lstar,
                 std::optional<int> cutoff, double f) {
    Model m = load_model(c);
    int ls = lstar ? *lstar : default_lstar(m.lattice.L());
    if (ls < 0) throw UsageError("--lstar must be nonnegative");
    TqoReport r;
    if (condition == "tqo2" && method == "stabilizer")
        r = check_tqo2_stabilizer(m, ls, c.jobs);
    else if (condition == "tqo2")
        r = check_tqo2_exact_all(m, ls, c.jobs);
    else if (method == "stabilizer")
        r = check_tqo1_stabilizer(m, ls, cutoff ? *cutoff : std::max(ls, m.lattice.L()), f);
    else
        r = check_tqo1_exact_all(m, ls, c.jobs);
    Output o;
    o.pass = r.pass;
    json w = json::array();
    for (const auto& x : r.witnesses) w.push_back({{"square", square_json(x.square)}, {"diagnostic", x.diagnostic}});
    o.report = {{"model", m.name},
                {"L", m.lattice.L()},
                {"condition", condition},
                {"method", method},
                {"L_star", r.L_star},
                {"pass", r.pass},
                {"squares_checked", r.squares_checked},
                {"witnesses", w},
                {"distance", r.distance ? json(*r.distance) : json(nullptr)},
                {"distance_lower_bound", r.distance_lower_bound},
                {"max_deviation", r.max_deviation},
                {"notes", r.notes}};
    std::ostringstream t;
    t << "model      " << m.name << " L=" << m.lattice.L() << "\n"
      << "check      " << condition << " (" << method << "), L*=" << r.L_star << "\n"
      << "squares    " << r.squares_checked << "\n";
    if (r.distance) t << "distance   " << *r.distance << "\n";
    if (method == "exact") t << "deviation  " << r.max_deviation << "\n";
    for (const auto& x : r.witnesses) t << "witness    " << to_string(x.square) << "  " << x.diagnostic << "\n";
    for (const auto& n : r.notes) t << "note       " << n << "\n";
    t << "result     " << (r.pass ? "PASS" : "FAIL") << "\n";
    o.table = t.str();
    return o;
}

Output cmd_spectrum(const Common& c, int count, double scale) {
    Model m = load_model(c);
    std::optional<LocalDecomposition> v;
    if (!c.perturbation.empty()) v = load_perturbation_file(m.lattice, c.perturbation);
    auto ev = lowest(m, v ? &*v : nullptr, scale, count);
    auto h0 = lowest(m, nullptr, 0, count);
    auto rep = band_report(ev, h0);
    Output o;
    json gaps = json::array();
    for (const auto& g : rep.gaps) gaps.push_back({{"k", g.k}, {"k_next", g.k_next}, {"gap", g.gap}});
    json bands = json::array();
    for (const auto& b : rep.band) bands.push_back(b ? json(*b) : json(nullptr));
    o.report = {{"model", m.name}, {"eigenvalues", ev}, {"shifted", rep.eigenvalues}, {"band", bands},
                {"gaps", gaps},    {"shift", rep.shift}, {"delta", rep.delta}, {"scale", scale}};
    if (v) {
        o.report["perturbation"] = decomposition_json(*v);
        if (v->claimed && v->claimed->J > 0) o.report["fitted_c1"] = fit_c1(rep, v->claimed->J * scale);
    }
    return o;
}

Output cmd_sweep(const Common& c, const std::string& param, double from, double to, int steps, int count) {
    if (steps < 1) throw UsageError("--steps must be >= 1");
    Model m = load_model(c);
    std::vector<double> xs;
    for (int i = 0; i <= steps; ++i) xs.push_back(from + (to - from) * i / steps);
    Output o;
    std::ostringstream csv;
    if (param == "h") {
        auto r = sector_gap_sweep(m, xs);
        csv << "h,ground_energy,gap,ground_all_minus,ground_all_plus\n";
        for (const auto& p : r.points)
            csv << fmt(p.h) << "," << fmt(p.ground_energy) << "," << fmt(p.gap) << "," << p.ground_all_minus << ","
                << p.ground_all_plus << "\n";
        o.report = {{"model", m.name},
                    {"param", "h"},
                    {"crossing", r.crossing ? json(*r.crossing) : json(nullptr)},
                    {"exhaustive", r.exhaustive}};
    } else {
        if (c.perturbation.empty()) throw UsageError("--param J needs --perturbation");
        auto v = load_perturbation_file(m.lattice, c.perturbation);
        csv << "J";
        for (int k = 0; k < count; ++k) csv << ",e" << k;
        csv << "\n";
        for (double x : xs) {
            auto ev = lowest(m, &v, x, count);
            csv << fmt(x);
            for (double e : ev) csv << "," << fmt(e);
            csv << "\n";
        }
        o.report = {{"model", m.name}, {"param", "J"}, {"perturbation", decomposition_json(v)}};
    }
    o.csv = csv.str();
    return o;
}

Output cmd_flow(const Common& c, int levels, std::optional<int> lstar, int depth, int jmax) {
    Model m = load_model(c);
    if (c.perturbation.empty()) throw UsageError("flow needs --perturbation");
    auto v = load_perturbation_file(m.lattice, c.perturbation);
    FlowContext ctx(m);
    FlowOptions opt;
    opt.L_star = lstar ? *lstar : m.lattice.L();
    opt.series.depth = depth;
    opt.j_max = jmax;
    opt.check_spectrum = ctx.dense_feasible();
    auto st = initial_state(ctx, v, opt.L_star);
    json out = json::array();
    double r0 = NAN;
    if (ctx.dense_feasible()) r0 = offdiag_residual(ctx, dense_hamiltonian(ctx, st));
    for (int i = 0; i < levels; ++i) {
        st = flow_step(ctx, st, opt);
        const auto& r = st.reports.back();
        out.push_back({{"level", r.level},
                       {"v_class", class_json(r.v_class)},
                       {"w_class", class_json(r.w_class)},
                       {"offdiag_residual", r.offdiag_residual},
                       {"series_residual", r.series_residual},
                       {"e_bound", r.e_bound},
                       {"lambda", r.lambda},
                       {"tqo1_defect", r.tqo1_defect},
                       {"spectrum_shift", r.spectrum_shift},
                       {"note", r.note}});
    }
    Output o;
    o.report = {{"model", m.name},
                {"L_star", opt.L_star},
                {"depth", depth},
                {"j_max", jmax},
                {"reset_schedule", "after every level"},
                {"reset_epsilon", opt.reset_epsilon},
                {"reset_gain", opt.reset_gain},
                {"initial_offdiag_residual", r0},
                {"perturbation", decomposition_json(v)},
                {"levels", out}};
    return o;
}

Output cmd_scalar_flow(const std::string& config, ScalarFlowParams p, int n_max) {
    if (!config.empty()) {
        std::ifstream in(config);
        if (!in) throw UsageError("cannot read config " + config);
        json j;
        try {
            in >> j;
        } catch (const json::exception& e) {
            throw UsageError(std::string("config is not valid JSON: ") + e.what());
        }
        auto get = [&](const char* k, double& x) {
            if (j.contains(k)) {
                if (!j[k].is_number()) throw UsageError(std::string("config field '") + k + "' must be a number");
                x = j[k].get<double>();
            }
        };
        get("J", p.J);
        get("mu", p.mu);
        get("c1", p.c1);
        get("c2", p.c2);
        get("c3", p.c3);
        get("c", p.c);
        get("epsilon", p.epsilon);
        get("L", p.L);
        get("target", p.target);
        if (j.contains("n_max")) n_max = j["n_max"].get<int>();
    }
    auto r = scalar_flow(p, n_max);
    Output o;
    std::ostringstream csv;
    csv << "n,J,Jd,mu,E\n";
    for (const auto& q : r.trajectory)
        csv << q.n << "," << fmt(q.J) << "," << fmt(q.Jd) << "," << fmt(q.mu) << "," << fmt(q.E) << "\n";
    o.csv = csv.str();
    o.pass = !r.breakdown;
    o.report = {{"params",
                 {{"J", p.J}, {"mu", p.mu}, {"c1", p.c1}, {"c2", p.c2}, {"c3", p.c3}, {"c", p.c},
                  {"epsilon", p.epsilon}, {"L", p.L}, {"target", p.target}}},
                {"n_max", n_max},
                {"breakdown", r.breakdown ? json(*r.breakdown) : json(nullptr)},
                {"below_target", r.below_target ? json(*r.below_target) : json(nullptr)}};
    if (r.breakdown) std::cerr << "flow breakdown at level " << *r.breakdown << "\n";
    return o;
}

struct ChainOpts {
    int n = 0;
    double K = 1, hx = 0.9, hz = 0.4;
};

Output cmd_lieb_robinson(const Common& c, const ChainOpts& ch, const std::string& regions, const std::string& ops,
                         const std::vector<double>& times) {
    Mat H;
    int n;
    if (ch.n > 0) {
        n = ch.n;
        H = mixed_field_chain(n, ch.K, ch.hx, ch.hz);
    } else {
        Model m = load_model(c);
        n = m.qubit_count();
        require_dense(1LL << n, "Lieb-Robinson evolution");
        H = m.h0_dense();
        if (!c.perturbation.empty()) H += load_perturbation_file(m.lattice, c.perturbation).dense();
    }
    auto comma = regions.find(',');
    if (comma == std::string::npos) throw UsageError("--regions must look like A,B with qubits joined by '+'");
    auto qa = parse_qubits(regions.substr(0, comma)), qb = parse_qubits(regions.substr(comma + 1));
    for (int q : qa)
        if (std::binary_search(qb.begin(), qb.end(), q)) throw UsageError("regions overlap on qubit " + std::to_string(q));
    if (ops.size() != 3 || ops[1] != ',') throw UsageError("--ops must look like Z,X");
    auto build = [&](const std::vector<int>& qs, char letter) {
        Pauli p(n);
        for (int q : qs) {
            if (q < 0 || q >= n) throw UsageError("qubit " + std::to_string(q) + " out of range");
            p *= Pauli::single(n, q, letter);
        }
        std::vector<int> all(n);
        for (int q = 0; q < n; ++q) all[q] = q;
        return pauli_matrix(p, all);
    };
    Mat a = build(qa, ops[0]), b = build(qb, ops[2]);
    HeisenbergEvolution ev(H);
    std::ostringstream csv;
    csv << "t,norm\n";
    for (double t : times) csv << fmt(t) << "," << fmt(lr_commutator_norm(ev, a, b, t)) << "\n";
    Output o;
    o.csv = csv.str();
    o.report = {{"qubits", n}, {"regions", regions}, {"ops", ops}};
    return o;
}

Output cmd_continue(const Common& c, int steps, int band, const std::string& integ, double span, int res) {
    Model m = load_model(c);
    if (c.perturbation.empty()) throw UsageError("continue needs --perturbation");
    require_dense(1LL << m.qubit_count(), "continuation");
    auto v = load_perturbation_file(m.lattice, c.perturbation);
    Mat H0 = m.h0_dense(), V = v.dense();
    auto F = build_filter(span, res);
    auto r = continue_projector(H0, V, band, steps, F, integ == "left" ? Integrator::left : Integrator::midpoint);
    auto all = m.all_qubits();
    int n = m.qubit_count();
    Mat z = dress_operator(pauli_matrix(Pauli::single(n, 0, 'Z'), all), r.U);
    Mat x = dress_operator(pauli_matrix(Pauli::single(n, 0, 'X'), all), r.U);
    json dressed = {{"anticommutator_norm", (z * x + x * z).norm()}};
    for (const auto& g : m.group.generators())
        if (!g.z().any()) {
            Mat P1 = band_projector(H0 + V, band);
            Mat d = dress_operator(pauli_matrix(g, all), r.U);
            dressed["loop"] = g.str();
            dressed["loop_expectation"] = (P1 * d).trace().real() / band;
            break;
        }
    Output o;
    o.pass = true;
    o.report = {{"model", m.name},
                {"steps", steps},
                {"band", band},
                {"integrator", integ},
                {"filter", {{"span", span}, {"resolution", F.resolution}, {"mask", "smooth step exp(-1/x) ratio"}}},
                {"max_deviation", r.max_deviation},
                {"min_gap", r.min_gap},
                {"unitarity", r.unitarity},
                {"band_ranks", r.band_ranks},
                {"dressed", dressed},
                {"perturbation", decomposition_json(v)}};
    return o;
}

Output cmd_gen(const Common& c, const PerturbationOptions& p, const std::string& output) {
    Model m = load_model(c);
    auto v = random_perturbation(m.lattice, p);
    std::string text = format_perturbation(v);
    Output o;
    if (!output.empty()) {
        std::ofstream f(output);
        if (!f) throw UsageError("cannot write " + output);
        f << text;
        o.report = {{"written", output}, {"perturbation", decomposition_json(v)}};
    } else {
        o.table = text;
    }
    return o;
}

void write_artifacts(const std::string& dir, const std::string& command, const json& config, const Output& o,
                     double seconds) {
    std::filesystem::create_directories(dir);
    if (!o.csv.empty()) std::ofstream(dir + "/" + command + ".csv") << o.csv;
    std::ofstream(dir + "/" + command + ".json") << o.report.dump(2) << "\n";
    std::ostringstream hash;
    hash << std::hex << std::setw(16) << std::setfill('0') << fnv1a(config.dump());
    json manifest = {{"command", command},
                     {"config", config},
                     {"config_hash", hash.str()},
                     {"versions",
                      {{"tqo", kVersion},
                       {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                     "." + std::to_string(EIGEN_MINOR_VERSION)},
                       {"compiler", __VERSION__}}},
                     {"timings", {{"total_seconds", seconds}}},
                     {"pass", o.pass}};
    std::ofstream(dir + "/manifest.json") << manifest.dump(2) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tqo: topological quantum order checks, spectra and flows"};
    app.require_subcommand(1);
    Common common;
    auto add_common = [&](CLI::App* s, bool perturbation) {
        s->add_option("--model", common.model_file, "model file");
        s->add_option("--builtin", common.builtin, "builtin model, toric:<L> or unstable-toric:<L>");
        if (perturbation) s->add_option("--perturbation", common.perturbation, "perturbation file");
        s->add_option("--out", common.out, "directory for reports and manifest");
        s->add_option("--jobs", common.jobs, "worker threads")->check(CLI::PositiveNumber);
    };

    std::string condition = "tqo2", method = "stabilizer";
    std::optional<int> lstar, cutoff;
    double f_factor = 1;
    auto* check = app.add_subcommand("check", "verify TQO-1 or TQO-2");
    add_common(check, false);
    check->add_option("--condition", condition)->check(CLI::IsMember({"tqo1", "tqo2"}));
    check->add_option("--method", method)->check(CLI::IsMember({"exact", "stabilizer"}));
    check->add_option("--lstar", lstar, "largest square size checked");
    check->add_option("--cutoff", cutoff, "weight cutoff of the TQO-1 logical search");
    check->add_option("--f", f_factor, "TQO-1 requires distance > f * L*");

    int count = 8;
    double scale = 1;
    auto* spectrum = app.add_subcommand("spectrum", "low spectrum and band report");
    add_common(spectrum, true);
    spectrum->add_option("--count", count)->check(CLI::PositiveNumber);
    spectrum->add_option("--scale", scale, "multiplies the perturbation");

    std::string param = "h";
    double from = 0, to = 0.5;
    int steps = 100;
    auto* sweep = app.add_subcommand("sweep", "parameter sweep (h: sector energies, J: perturbation strength)");
    add_common(sweep, true);
    sweep->add_option("--param", param)->check(CLI::IsMember({"J", "h"}));
    sweep->add_option("--from", from);
    sweep->add_option("--to", to);
    sweep->add_option("--steps", steps);
    sweep->add_option("--count", count)->check(CLI::PositiveNumber);

    int levels = 1, depth = 8, jmax = 4;
    auto* flow = app.add_subcommand("flow", "run flow levels H(n) -> H(n+1)");
    add_common(flow, true);
    flow->add_option("--levels", levels)->check(CLI::PositiveNumber);
    flow->add_option("--lstar", lstar);
    flow->add_option("--depth", depth)->check(CLI::PositiveNumber);
    flow->add_option("--jmax", jmax)->check(CLI::NonNegativeNumber);

    std::string config;
    ScalarFlowParams sp;
    int n_max = 10;
    auto* sflow = app.add_subcommand("scalar-flow", "iterate the scalar flow recursion");
    sflow->add_option("--config", config, "JSON file with J, mu, c1, c2, c3, c, epsilon, L, n_max, target");
    sflow->add_option("--J", sp.J);
    sflow->add_option("--mu", sp.mu);
    sflow->add_option("--c1", sp.c1);
    sflow->add_option("--c2", sp.c2);
    sflow->add_option("--c3", sp.c3);
    sflow->add_option("--c", sp.c);
    sflow->add_option("--epsilon", sp.epsilon);
    sflow->add_option("--L", sp.L);
    sflow->add_option("--n-max", n_max);
    sflow->add_option("--out", common.out);

    ChainOpts chain;
    std::string regions, ops = "Z,Z";
    std::vector<double> times;
    auto* lr = app.add_subcommand("lieb-robinson", "commutator norm growth");
    add_common(lr, true);
    lr->add_option("--chain", chain.n, "use an open mixed-field chain of this many qubits");
    lr->add_option("--K", chain.K);
    lr->add_option("--hx", chain.hx);
    lr->add_option("--hz", chain.hz);
    lr->add_option("--regions", regions, "A,B with qubits joined by '+', e.g. 0,5 or 0+1,6")->required();
    lr->add_option("--ops", ops, "Pauli letters for A and B, e.g. Z,X");
    lr->add_option("--times", times)->delimiter(',')->required();

    int band = 4;
    std::string integ = "midpoint";
    double span = 320;
    int res = 32000;
    auto* cont = app.add_subcommand("continue", "quasi-adiabatic continuation of the ground band");
    add_common(cont, true);
    cont->add_option("--steps", steps);
    cont->add_option("--band", band)->check(CLI::PositiveNumber);
    cont->add_option("--integrator", integ)->check(CLI::IsMember({"left", "midpoint"}));
    cont->add_option("--filter-span", span);
    cont->add_option("--filter-resolution", res);

    PerturbationOptions gp;
    std::string output;
    auto* gen = app.add_subcommand("gen-perturbation", "write a seeded random perturbation");
    add_common(gen, false);
    gen->add_option("--seed", gp.seed);
    gen->add_option("--q", gp.q);
    gen->add_option("--J", gp.J);
    gen->add_option("--mu", gp.mu);
    gen->add_flag("--two-local", gp.two_local, "nearest perpendicular edge pairs instead of full squares");
    gen->add_option("--output", output);

    if (argc < 2) {
        std::cerr << app.help();
        return 2;
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    CLI::App* sub = app.get_subcommands().front();
    json cfg = json::object();
    for (const CLI::Option* opt : sub->get_options()) {
        if (opt->get_name() == "--help" || opt->get_name() == "--out" || opt->get_name() == "--jobs") continue;
        if (opt->count() > 0) cfg[opt->get_name()] = opt->as<std::string>();
    }

    auto t0 = std::chrono::steady_clock::now();
    try {
        Output o;
        std::string name = sub->get_name();
        if (sub == check)
            o = cmd_check(common, condition, method, lstar, cutoff, f_factor);
        else if (sub == spectrum)
            o = cmd_spectrum(common, count, scale);
        else if (sub == sweep)
            o = cmd_sweep(common, param, from, to, steps, count);
        else if (sub == flow)
            o = cmd_flow(common, levels, lstar, depth, jmax);
        else if (sub == sflow)
            o = cmd_scalar_flow(config, sp, n_max);
        else if (sub == lr)
            o = cmd_lieb_robinson(common, chain, regions, ops, times);
        else if (sub == cont)
            o = cmd_continue(common, steps, band, integ, span, res);
        else
            o = cmd_gen(common, gp, output);
        if (!o.csv.empty())
            std::cout << o.csv;
        else if (!o.table.empty())
            std::cout << o.table;
        else
            std::cout << o.report.dump(2) << "\n";
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!common.out.empty()) write_artifacts(common.out, name, cfg, o, secs);
        return o.pass ? 0 : 1;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const ResourceError& e) {
        std::cerr << "resource error: " << e.what() << "\n";
        return 3;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 1;
    }
}
