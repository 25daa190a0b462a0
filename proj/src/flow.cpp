#include "tqo/flow.hpp"

#include <algorithm>
#include <cmath>

#include "tqo/errors.hpp"
#include "tqo/tqo_check.hpp"

namespace tqo {

FlowContext::FlowContext(const Model& model) : model_(&model) {}

const LocalBlock& FlowContext::local(const Square& sq) {
    Square A = lattice().canonical(sq);
    auto it = cache_.find(A);
    if (it != cache_.end()) return it->second;
    LocalBlock b;
    auto h = model_->local_hamiltonian(A);
    b.qubits = h.qubits;
    b.h0 = h.m;
    b.p = model_->local_ground_projector(A).m;
    b.q = Mat::Identity(b.p.rows(), b.p.cols()) - b.p;
    b.pinv = b.h0.isZero(0) ? Mat::Zero(b.h0.rows(), b.h0.cols()) : hermitian_pinv(b.h0, 1e-10);
    return cache_.emplace(A, std::move(b)).first->second;
}

bool FlowContext::dense_feasible() const { return (1LL << model_->qubit_count()) <= dense_cap(); }

const Mat& FlowContext::ground_basis() {
    if (!basis_) basis_ = dense_feasible() ? tqo::ground_basis(*model_) : Mat();
    return *basis_;
}

LocalDecomposition FlowContext::h0_decomposition() const {
    LocalDecomposition h(&lattice());
    std::vector<Square> seen = model_->assignment;
    std::sort(seen.begin(), seen.end());
    seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
    for (const auto& s : seen) h.add(s, model_->term(s));
    return h;
}

LocalOp e_super(FlowContext& ctx, const Square& A, const LocalOp& O) {
    const auto& b = ctx.local(A);
    Mat o = extend(O.m, O.qubits, b.qubits);
    Mat left = b.q * b.pinv * o * b.p;
    Mat right = b.p * o * b.pinv * b.q;
    return {b.qubits, left - right};
}

LocalDecomposition pad_boundary(const LocalDecomposition& dec) {
    const auto& lat = dec.lattice();
    LocalDecomposition out(&lat);
    for (const auto& [s, op] : dec.terms()) out.add(lat.neighborhood(s), op);
    if (dec.claimed) {
        auto c = *dec.claimed;
        double base = c.J * std::exp(2 * c.mu);
        double fit = base > 0 ? std::max(1.0, out.strength(c.mu, c.alpha) / base) : 1.0;
        out.claimed = DecayClass{fit * base, c.mu, c.alpha};
        if (!out.satisfies(*out.claimed)) throw NumericalError("padded class failed re-verification");
    }
    return out;
}

double shift_ground_expectation(FlowContext& ctx, LocalDecomposition& dec, double* defect) {
    if (defect) *defect = 0;
    if (dec.empty()) return 0;
    const Mat& V = ctx.ground_basis();
    if (V.size() == 0) {
        if (defect) *defect = NAN;
        return 0;
    }
    auto all = ctx.model().all_qubits();
    double k = double(V.cols()), total = 0;
    LocalDecomposition out(&dec.lattice());
    for (const auto& [s, op] : dec.terms()) {
        Mat m = V.adjoint() * apply_local(op, all, V);
        double c = m.trace().real() / k;
        if (defect) *defect = std::max(*defect, opnorm(m - c * Mat::Identity(m.rows(), m.cols())));
        Mat shifted = op.m - c * Mat::Identity(op.m.rows(), op.m.cols());
        out.add(s, LocalOp{op.qubits, shifted});
        total += c;
    }
    out.claimed = dec.claimed;
    dec = std::move(out);
    return total;
}

namespace {

bool share_qubit(const std::vector<int>& a, const std::vector<int>& b) {
    auto i = a.begin();
    auto j = b.begin();
    while (i != a.end() && j != b.end()) {
        if (*i == *j) return true;
        if (*i < *j)
            ++i;
        else
            ++j;
    }
    return false;
}

Square chi_square(const Lattice& lat, const Square& A, const Square& B) {
    Square nb = lat.neighborhood(B);
    for (int r = std::max(A.r + B.r, nb.r); r < lat.L(); ++r)
        for (const auto& C : lat.squares(r))
            if (lat.contains(C, A) && lat.contains(C, nb)) return C;
    return lat.canonical({0, 0, lat.L()});
}

Mat dense_of(const LocalDecomposition& d, int n) {
    if (d.empty()) return Mat::Zero(1L << n, 1L << n);
    return d.dense();
}

LocalDecomposition sum(const LocalDecomposition& a, const LocalDecomposition& b) {
    LocalDecomposition out = a;
    out.claimed.reset();
    for (const auto& [s, op] : b.terms()) out.add(s, op);
    return out;
}

// ||Q X P|| for the global ground space spanned by V
double offdiag_with(const Mat& V, const Mat& X) {
    Mat r = X * V;
    r -= V * (V.adjoint() * r);
    return opnorm(r);
}

double series_residual(FlowContext& ctx, const LocalDecomposition& S, const Mat& h0w, const Mat& vd) {
    const Mat& V = ctx.ground_basis();
    if (V.size() == 0) return NAN;
    Mat s = dense_of(S, ctx.model().qubit_count());
    return offdiag_with(V, s * h0w - h0w * s + vd);
}

}  // namespace

LocalDecomposition commutator_decomposition(const LocalDecomposition& S, const LocalDecomposition& V) {
    const auto& lat = S.lattice();
    LocalDecomposition out(&lat);
    for (const auto& [A, s] : S.terms())
        for (const auto& [B, v] : V.terms()) {
            if (!share_qubit(s.qubits, v.qubits)) continue;
            LocalOp c = commutator(s, v);
            double scale = s.m.norm() * v.m.norm();
            if (c.m.norm() <= 1e-15 * scale) continue;
            out.add(chi_square(lat, A, B), c);
        }
    return out;
}

LinearizedSolution solve_linearized(FlowContext& ctx, const LocalDecomposition& V, const LocalDecomposition& W,
                                    const SeriesOptions& opt) {
    if (opt.depth < 1) throw UsageError("series depth must be >= 1");
    const auto& lat = ctx.lattice();
    LinearizedSolution sol{LocalDecomposition(&lat), pad_boundary(V), W, {}, {}, {}, 0, 0};
    sol.shift = shift_ground_expectation(ctx, sol.V, &sol.tqo1_defect);
    double wdef = 0;
    sol.shift += shift_ground_expectation(ctx, sol.W, &wdef);
    if (sol.V.empty()) return sol;

    bool dense = ctx.ground_basis().size() > 0;
    Mat h0w, vd;
    if (dense) {
        int n = ctx.model().qubit_count();
        h0w = ctx.model().h0_dense() + dense_of(sol.W, n);
        vd = dense_of(sol.V, n);
    }
    double floor = 1e-13 * (1 + sol.V.strength(0, 0));

    LocalDecomposition part(&lat);
    for (const auto& [A, v] : sol.V.terms()) part.add(A, e_super(ctx, A, v));
    for (int i = 1;; ++i) {
        for (const auto& [A, s] : part.terms()) sol.S.add(A, s);
        sol.parts.push_back(part);
        if (dense) sol.residuals.push_back(series_residual(ctx, sol.S, h0w, vd));
        LocalDecomposition d = commutator_decomposition(part, sol.W);
        bool done = d.empty() || i >= opt.depth;
        if (!done && dense) {
            const auto& r = sol.residuals;
            std::size_t m = r.size();
            if (r.back() <= floor) {
                done = true;
            } else if (m >= 3 && r[m - 1] >= r[m - 2] && r[m - 2] >= r[m - 3]) {
                throw NumericalError("series diverged: residual " + std::to_string(r[m - 1]) +
                                     " not decreasing over two depths");
            } else if (m >= 2 && r[m - 1] > opt.stall_ratio * r[m - 2]) {
                done = true;
            }
        }
        sol.D.push_back(std::move(d));
        if (done) break;
        part = LocalDecomposition(&lat);
        for (const auto& [C, dc] : sol.D.back().terms()) part.add(C, e_super(ctx, C, dc));
    }
    return sol;
}

LocalDecomposition transformed_diagonal(FlowContext& ctx, const LinearizedSolution& sol) {
    const auto& lat = ctx.lattice();
    LocalDecomposition out(&lat);
    auto block = [&](const Square& A, const LocalOp& op) {
        const auto& b = ctx.local(A);
        Mat o = extend(op.m, op.qubits, b.qubits);
        Mat d = b.p * o * b.p + b.q * o * b.q;
        out.add(A, LocalOp{b.qubits, d});
    };
    for (const auto& [A, v] : sol.V.terms()) block(A, v);
    // the last D is not absorbed by any S^(i) and stays off-diagonal
    for (std::size_t i = 0; i + 1 < sol.D.size(); ++i)
        for (const auto& [C, d] : sol.D[i].terms()) block(C, d);
    const Mat& V = ctx.ground_basis();
    if (V.size() > 0) {
        auto all = ctx.model().all_qubits();
        for (const auto& [A, t] : out.terms()) {
            Mat tv = apply_local(t, all, V);
            tv -= V * (V.adjoint() * tv);
            if (opnorm(tv) > 1e-10 * (1 + opnorm(t.m)))
                throw NumericalError("transformed term on " + to_string(A) + " is not block-diagonal");
        }
    }
    return out;
}

namespace {

struct ShellCache {
    std::map<std::vector<int>, std::pair<Mat, Mat>> gen;  // region -> (S_region, e^S_region)
};

const std::pair<Mat, Mat>& shell_generator(ShellCache& cache, const std::vector<LocalOp>& S_terms,
                                           const std::vector<int>& region) {
    auto it = cache.gen.find(region);
    if (it != cache.gen.end()) return it->second;
    long d = 1L << region.size();
    require_dense(d, "shell region");
    Mat s = Mat::Zero(d, d);
    for (const auto& t : S_terms)
        if (qubit_subset(t.qubits, region)) s += extend(t.m, t.qubits, region);
    Mat u = expm(s);
    return cache.gen.emplace(region, std::make_pair(std::move(s), std::move(u))).first->second;
}

std::vector<LocalOp> shells(ShellCache& cache, const std::vector<LocalOp>& S_terms, const LocalOp& O,
                            const std::vector<std::vector<int>>& regions) {
    std::vector<LocalOp> out;
    LocalOp prev;
    for (const auto& reg : regions) {
        const auto& [s, u] = shell_generator(cache, S_terms, reg);
        Mat o = extend(O.m, O.qubits, reg);
        Mat w = u * o * u.adjoint() - o - (s * o - o * s);
        LocalOp cur{reg, w};
        Mat d = prev.qubits.empty() ? w : Mat(w - extend(prev.m, prev.qubits, reg));
        out.push_back({reg, d});
        prev = std::move(cur);
    }
    return out;
}

}  // namespace

std::vector<LocalOp> shell_decomposition(const std::vector<LocalOp>& S_terms, const LocalOp& O,
                                         const std::vector<std::vector<int>>& regions) {
    ShellCache cache;
    return shells(cache, S_terms, O, regions);
}

LocalDecomposition second_order_remainder(const LocalDecomposition& S, const LocalDecomposition& H, int j_max,
                                          std::vector<std::vector<double>>* shell_norms) {
    if (j_max < 0) throw UsageError("j_max must be >= 0");
    const auto& lat = S.lattice();
    LocalDecomposition out(&lat);
    if (shell_norms) shell_norms->clear();
    if (S.empty()) return out;
    std::vector<LocalOp> terms;
    for (const auto& [A, s] : S.terms()) terms.push_back(s);
    ShellCache cache;
    Square whole = lat.canonical({0, 0, lat.L()});
    for (const auto& [B, o] : H.terms()) {
        std::vector<Square> sq;
        for (int j = 0;; ++j) {
            Square b = j == j_max ? whole : lat.grow(B, j);
            sq.push_back(b);
            if (b == whole) break;
        }
        std::vector<std::vector<int>> regions;
        for (const auto& b : sq) regions.push_back(lat.qubits(b));
        auto d = shells(cache, terms, o, regions);
        std::vector<double> norms;
        for (std::size_t j = 0; j < d.size(); ++j) {
            norms.push_back(opnorm(d[j].m));
            if (d[j].m.norm() > 0) out.add(sq[j], d[j]);
        }
        if (shell_norms) shell_norms->push_back(std::move(norms));
    }
    return out;
}

DecayClass degree_reset(const DecayClass& c, double epsilon, double alpha_gain) {
    if (!(epsilon > 0 && epsilon < 1)) throw UsageError("epsilon must lie in (0,1)");
    if (!(alpha_gain > 0)) throw UsageError("alpha_gain must be positive");
    if (c.J == 0) return {0, c.mu, c.alpha + alpha_gain};
    double cp = std::pow(alpha_gain / std::exp(1.0), alpha_gain);
    double mu = c.mu - std::pow(c.J, epsilon / alpha_gain);
    if (mu <= 0) throw NumericalError("decay exhausted: reset rate " + std::to_string(mu));
    return {cp * std::pow(c.J, 1 - epsilon), mu, c.alpha + alpha_gain};
}

namespace {

void move_large(const LocalDecomposition& in, int L_star, LocalDecomposition& keep, std::optional<Mat>& E,
                double& e_bound, int n, bool dense) {
    for (const auto& [s, op] : in.terms()) {
        if (s.r <= L_star) {
            keep.add(s, op);
            continue;
        }
        e_bound += opnorm(op.m);
        if (dense) {
            if (!E) E = Mat::Zero(1L << n, 1L << n);
            std::vector<int> all(n);
            for (int q = 0; q < n; ++q) all[q] = q;
            *E += extend(op.m, op.qubits, all);
        }
    }
}

Eigen::VectorXd eigenvalues(const Mat& h) {
    Eigen::SelfAdjointEigenSolver<Mat> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

}  // namespace

Mat dense_hamiltonian(FlowContext& ctx, const FlowState& st) {
    Mat h = ctx.model().h0_dense();
    for (const auto& w : st.W_parts)
        if (!w.empty()) h += w.dense();
    if (!st.V.empty()) h += st.V.dense();
    if (st.E) h += *st.E;
    h.diagonal().array() += st.lambda;
    return h;
}

double offdiag_residual(FlowContext& ctx, const Mat& H) {
    const Mat& V = ctx.ground_basis();
    if (V.size() == 0) throw ResourceError("global ground space not available", 1LL << ctx.model().qubit_count());
    return offdiag_with(V, H);
}

FlowState initial_state(FlowContext& ctx, const LocalDecomposition& V, int L_star) {
    FlowState st;
    st.V = LocalDecomposition(&ctx.lattice());
    move_large(V, L_star, st.V, st.E, st.e_bound, ctx.model().qubit_count(), ctx.dense_feasible());
    st.mu = V.claimed ? V.claimed->mu : 1.0;
    st.V.claimed = V.claimed;
    if (st.V.claimed && !st.V.satisfies(*st.V.claimed)) throw UsageError("perturbation violates its claimed class");
    return st;
}

FlowState flow_step(FlowContext& ctx, const FlowState& st, const FlowOptions& opt) {
    const auto& lat = ctx.lattice();
    int n = ctx.model().qubit_count();
    bool dense = ctx.dense_feasible();
    FlowState next = st;
    next.level = st.level + 1;
    LevelReport rep;
    rep.level = next.level;

    // shift every W(k) so that W(k) P = 0, then solve on the merged W
    LocalDecomposition W(&lat);
    for (auto& w : next.W_parts) {
        next.lambda += shift_ground_expectation(ctx, w);
        for (const auto& [s, op] : w.terms()) W.add(s, op);
    }
    if (st.V.empty()) {
        rep.lambda = next.lambda;
        rep.e_bound = next.e_bound;
        rep.v_class = DecayClass{0, st.mu, 0};
        rep.note = "V = 0";
        next.reports.push_back(rep);
        return next;
    }

    std::optional<Eigen::VectorXd> before;
    if (opt.check_spectrum && dense) before = eigenvalues(dense_hamiltonian(ctx, next));

    auto sol = solve_linearized(ctx, st.V, W, opt.series);
    next.lambda += sol.shift;
    rep.tqo1_defect = sol.tqo1_defect;
    if (!sol.residuals.empty()) rep.series_residual = sol.residuals.back();

    LocalDecomposition wt = transformed_diagonal(ctx, sol);
    LocalDecomposition vt = commutator_decomposition(sol.S, sol.V);
    LocalDecomposition h = sum(sum(ctx.h0_decomposition(), sol.W), sol.V);
    LocalDecomposition om = second_order_remainder(sol.S, h, opt.j_max);
    for (const auto& [s, op] : om.terms()) vt.add(s, op);
    if (!sol.D.empty())
        for (const auto& [s, op] : sol.D.back().terms()) vt.add(s, op);

    // W(k) were already shifted above, so the series shifts them only by rounding-level amounts
    if (next.E && dense) {
        Mat u = expm(dense_of(sol.S, n));
        *next.E = u * *next.E * u.adjoint();
    }
    LocalDecomposition wk(&lat), vk(&lat);
    move_large(wt, opt.L_star, wk, next.E, next.e_bound, n, dense);
    move_large(vt, opt.L_star, vk, next.E, next.e_bound, n, dense);

    double mu = st.mu / 2;
    rep.w_class = DecayClass{wk.strength(st.mu, 0), st.mu, 0};
    wk.claimed = rep.w_class;
    DecayClass measured{vk.strength(mu, -1), mu, -1};
    vk.claimed = measured;
    try {
        auto reset = degree_reset(measured, opt.reset_epsilon, opt.reset_gain);
        if (vk.satisfies(reset)) {
            vk.claimed = reset;
            next.mu = reset.mu;
        } else {
            rep.note = "degree reset class failed verification; kept measured class";
            next.mu = mu;
        }
    } catch (const NumericalError& e) {
        rep.note = std::string(e.what()) + "; kept measured class";
        next.mu = mu;
    }
    rep.v_class = *vk.claimed;
    next.W_parts.push_back(std::move(wk));
    next.V = std::move(vk);

    if (dense) {
        Mat hn = dense_hamiltonian(ctx, next);
        rep.offdiag_residual = offdiag_residual(ctx, hn);
        if (before) {
            auto after = eigenvalues(hn);
            double shift = (after - *before).cwiseAbs().maxCoeff();
            rep.spectrum_shift = shift;
            double scale = 1 + before->cwiseAbs().maxCoeff();
            if (shift > 1e-9 * scale)
                throw NumericalError("flow step changed the spectrum by " + std::to_string(shift));
        }
    }
    rep.lambda = next.lambda;
    rep.e_bound = next.e_bound;
    next.reports.push_back(rep);
    return next;
}

ScalarFlowResult scalar_flow(const ScalarFlowParams& p, int n_max) {
    if (!(p.epsilon >= 0 && p.epsilon < 1)) throw UsageError("epsilon must lie in [0,1)");
    if (p.J < 0 || p.mu <= 0 || p.c1 < 0 || p.c2 < 0 || p.c3 < 0 || p.c < 0 || p.L <= 0)
        throw UsageError("scalar flow constants must be nonnegative with mu, L > 0");
    ScalarFlowResult res;
    ScalarFlowPoint cur{0, p.J, 0, p.mu, 0};
    res.trajectory.push_back(cur);
    if (p.target > 0 && cur.J < p.target) res.below_target = 0;
    for (int k = 0; k < n_max; ++k) {
        ScalarFlowPoint nx;
        nx.n = k + 1;
        nx.J = p.c1 * std::pow(cur.J, 2 * (1 - p.epsilon));
        nx.Jd = p.c2 * std::pow(cur.J, 1 - p.epsilon);
        nx.mu = cur.mu / 2 - p.c3 * std::pow(nx.J, p.epsilon / 10);
        nx.E = cur.E + p.c * p.L * p.L * p.L * cur.J * std::exp(-p.c3 * p.L * cur.mu);
        res.trajectory.push_back(nx);
        cur = nx;
        if (p.target > 0 && !res.below_target && cur.J < p.target) res.below_target = nx.n;
        if (cur.mu <= 0) {
            res.breakdown = nx.n;
            break;
        }
    }
    return res;
}

}  // namespace tqo
