#include "tqo/tqo_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tqo/errors.hpp"
#include "tqo/parallel.hpp"

namespace tqo {

int default_lstar(int L) { return std::max(0, L / 2 - 1); }

Mat ground_basis(const Model& model, unsigned long long seed) {
    int n = model.qubit_count();
    long long dim = 1LL << n;
    require_matrix_free(dim, "ground basis");
    int rank = model.group.rank();
    long long k = 1LL << (n - rank);
    long long cols = std::min<long long>(dim, k + 8);
    if (dim * cols > matrix_free_cap() * 4) throw ResourceError("ground space too large for a basis", dim * cols);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    Mat x(dim, cols);
    for (long long c = 0; c < cols; ++c)
        for (long long r = 0; r < dim; ++r) x(r, c) = cplx(g(rng), g(rng));
    auto all = model.all_qubits();
    for (const auto& s : model.group.generators()) {
        Mat y = x;
        pauli_left_multiply(s, all, y);
        x = (x + y) * 0.5;
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(x.adjoint() * x);
    const RVec& ev = es.eigenvalues();
    double top = ev.maxCoeff();
    std::vector<int> keep;
    for (int i = 0; i < ev.size(); ++i)
        if (ev(i) > 1e-10 * top) keep.push_back(i);
    if (static_cast<long long>(keep.size()) != k) throw NumericalError("ground basis rank mismatch");
    Mat v(dim, k);
    for (long long i = 0; i < k; ++i) v.col(i) = x * es.eigenvectors().col(keep[i]) / std::sqrt(ev(keep[i]));
    Eigen::HouseholderQR<Mat> qr(v);
    return qr.householderQ() * Mat::Identity(dim, k);
}

Mat reduced_state(const Mat& V, int n, std::span<const int> keep) {
    std::vector<int> rest;
    for (int q = 0; q < n; ++q)
        if (!std::binary_search(keep.begin(), keep.end(), q)) rest.push_back(q);
    auto table = [](std::span<const int> qs) {
        std::vector<long> t(1L << qs.size(), 0);
        for (long a = 0; a < long(t.size()); ++a)
            for (std::size_t k = 0; k < qs.size(); ++k)
                if ((a >> k) & 1) t[a] |= 1L << qs[k];
        return t;
    };
    auto sk = table(keep), sr = table(rest);
    Mat rho = Mat::Zero(long(sk.size()), long(sk.size()));
    Mat m(long(sk.size()), long(sr.size()));
    for (long c = 0; c < V.cols(); ++c) {
        for (long a = 0; a < long(sk.size()); ++a)
            for (long r = 0; r < long(sr.size()); ++r) m(a, r) = V(sk[a] | sr[r], c);
        rho.noalias() += m * m.adjoint();
    }
    return rho;
}

Mat range_basis(const Mat& psd, double rel_cut) {
    Eigen::SelfAdjointEigenSolver<Mat> es(psd);
    const RVec& ev = es.eigenvalues();
    double top = std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
    std::vector<int> keep;
    for (int i = 0; i < ev.size(); ++i)
        if (ev(i) > rel_cut * top) keep.push_back(i);
    Mat u(psd.rows(), long(keep.size()));
    for (std::size_t i = 0; i < keep.size(); ++i) u.col(long(i)) = es.eigenvectors().col(keep[i]);
    return u;
}

double max_principal_sine(const Mat& U1, const Mat& U2) {
    if (U1.cols() == 0 && U2.cols() == 0) return 0;
    if (U1.cols() != U2.cols()) return 1;
    Mat r = U2 - U1 * (U1.adjoint() * U2);
    Eigen::JacobiSVD<Mat> svd(r);
    return std::min(1.0, svd.singularValues().size() ? svd.singularValues()(0) : 0.0);
}

TqoReport check_tqo2_stabilizer(const Model& model, int L_star, int jobs) {
    TqoReport rep;
    rep.condition = Condition::tqo2;
    rep.method = Method::stabilizer;
    rep.L_star = L_star;
    const Lattice& lat = model.lattice;
    std::vector<Square> all;
    for (int r = 1; r <= std::min(L_star, lat.L()); ++r)
        for (const auto& s : lat.squares(r)) all.push_back(s);
    std::vector<std::optional<Witness>> found(all.size());
    parallel_for(int(all.size()), jobs, [&](int i) {
        const Square& A = all[i];
        auto GA = model.group.supported_subgroup(lat.region(A));
        auto GB = model.group.generated_subgroup(lat.region(lat.neighborhood(A)));
        for (const auto& g : GA.generators())
            if (!GB.contains(g)) {
                found[i] = Witness{A, g.str() + " in G(A) but not generated inside " + to_string(lat.neighborhood(A))};
                return;
            }
    });
    rep.squares_checked = int(all.size());
    for (auto& w : found)
        if (w) rep.witnesses.push_back(*w);
    rep.pass = rep.witnesses.empty();
    return rep;
}

TqoReport check_tqo1_stabilizer(const Model& model, int L_star, int weight_cutoff, double f_factor) {
    TqoReport rep;
    rep.condition = Condition::tqo1;
    rep.method = Method::stabilizer;
    rep.L_star = L_star;
    int f = int(std::floor(f_factor * L_star));
    if (weight_cutoff < f)
        throw UsageError("weight cutoff " + std::to_string(weight_cutoff) + " below threshold f(L*)=" + std::to_string(f));
    Pauli w;
    auto d = model.group.minimum_distance(weight_cutoff, &w);
    if (d) {
        rep.distance = *d;
        rep.distance_lower_bound = *d - 1;
        rep.pass = *d > f;
        if (!rep.pass) {
            auto sq = model.lattice.smallest_covering_square(w.support());
            rep.witnesses.push_back({sq.value_or(Square{0, 0, model.lattice.L()}),
                                     "logical operator " + w.str() + " of weight " + std::to_string(*d)});
        }
    } else {
        rep.distance_lower_bound = weight_cutoff;
        rep.pass = true;
    }
    if (rep.distance && model.name.rfind("toric", 0) == 0 && model.lattice.layout() == Layout::edges &&
        *rep.distance == model.lattice.L())
        rep.notes.push_back("toric distance equals L, not L-1");
    return rep;
}

LocalOp supported_ground_projector(const Model& model, const Square& B) {
    auto q = model.lattice.qubits(B);
    auto region = model.lattice.region(B);
    long d = 1L << q.size();
    require_dense(d, "local ground projector");
    Mat m = Mat::Identity(d, d);
    for (const auto& g : model.group.generators()) {
        if ((g.support() & region) != g.support()) continue;
        Mat sm = m;
        pauli_left_multiply(g, q, sm);
        m = (m + sm) * 0.5;
    }
    return {std::move(q), std::move(m)};
}

namespace {

const Mat& basis_or(const Model& model, const Mat* basis, Mat& store) {
    if (basis) return *basis;
    store = ground_basis(model);
    return store;
}

Pauli pauli_from_index(int n, std::span<const int> qubits, long idx) {
    BitVec x(n), z(n);
    for (std::size_t k = 0; k < qubits.size(); ++k) {
        int code = int((idx >> (2 * k)) & 3);  // 0 I, 1 X, 2 Z, 3 Y
        if (code & 1) x.set(qubits[k]);
        if (code & 2) z.set(qubits[k]);
    }
    return Pauli(x, z, int(x.overlap(z) & 3));
}

}  // namespace

Tqo1Exact check_tqo1_exact(const Model& model, const Square& A, double tol, const Mat* basis) {
    Mat store;
    const Mat& V = basis_or(model, basis, store);
    int n = model.qubit_count();
    auto q = model.lattice.qubits(A);
    if (2 * q.size() > 24) throw ResourceError("Pauli basis on " + to_string(A) + " too large", 1LL << (2 * q.size()));
    std::vector<int> rest;
    for (int i = 0; i < n; ++i)
        if (!std::binary_search(q.begin(), q.end(), i)) rest.push_back(i);
    long da = 1L << q.size(), dr = 1L << rest.size(), k = V.cols();
    std::vector<long> sa(da, 0), sr(dr, 0);
    for (long a = 0; a < da; ++a)
        for (std::size_t j = 0; j < q.size(); ++j)
            if ((a >> j) & 1) sa[a] |= 1L << q[j];
    for (long r = 0; r < dr; ++r)
        for (std::size_t j = 0; j < rest.size(); ++j)
            if ((r >> j) & 1) sr[r] |= 1L << rest[j];
    // R[i][j] = Tr_{A^c} |v_j><v_i|, so <v_i|O|v_j> = tr(O R[i][j])
    std::vector<Mat> blocks(k, Mat(da, dr));
    for (long c = 0; c < k; ++c)
        for (long a = 0; a < da; ++a)
            for (long r = 0; r < dr; ++r) blocks[c](a, r) = V(sa[a] | sr[r], c);
    std::vector<Mat> R(k * k);
    for (long i = 0; i < k; ++i)
        for (long j = 0; j < k; ++j) R[i * k + j] = (blocks[j] * blocks[i].adjoint()).transpose();
    Tqo1Exact res;
    Mat m(k, k);
    for (long idx = 1; idx < da * da; ++idx) {
        Pauli p = pauli_from_index(n, q, idx);
        Mat o = pauli_matrix(p, q);
        for (long i = 0; i < k; ++i)
            for (long j = 0; j < k; ++j) m(i, j) = o.cwiseProduct(R[i * k + j]).sum();
        cplx c = m.trace() / double(k);
        m.diagonal().array() -= c;
        double dev = opnorm(m);
        if (dev > res.max_deviation) {
            res.max_deviation = dev;
            res.worst = p.str();
        }
    }
    res.pass = res.max_deviation <= tol;
    return res;
}

Tqo2Exact check_tqo2_exact(const Model& model, const Square& A, double angle_tol, double rank_cut,
                           const Mat* basis) {
    Mat store;
    const Mat& V = basis_or(model, basis, store);
    const Lattice& lat = model.lattice;
    auto qa = lat.qubits(A);
    Square B = lat.neighborhood(A);
    Tqo2Exact res;
    res.B = B;
    Mat rho = reduced_state(V, model.qubit_count(), qa);
    Mat rho_b;
    if (B.r >= lat.L())
        rho_b = rho;  // P_B = P on the whole torus
    else {
        LocalOp pb = supported_ground_projector(model, B);
        rho_b = partial_trace(pb.m, pb.qubits, qa);
    }
    Mat u1 = range_basis(rho, rank_cut), u2 = range_basis(rho_b, rank_cut);
    res.rank_global = int(u1.cols());
    res.rank_local = int(u2.cols());
    double s = max_principal_sine(u1, u2);
    res.max_angle = std::asin(std::min(1.0, s));
    res.pass = res.rank_global == res.rank_local && res.max_angle < angle_tol;
    return res;
}

namespace {

std::vector<Square> squares_up_to(const Lattice& lat, int max_r) {
    std::vector<Square> out;
    for (int r = 1; r <= std::min(max_r, lat.L()); ++r)
        for (const auto& s : lat.squares(r)) out.push_back(s);
    return out;
}

}  // namespace

TqoReport check_tqo2_exact_all(const Model& model, int max_r, int jobs) {
    Mat V = ground_basis(model);
    auto sq = squares_up_to(model.lattice, max_r);
    std::vector<Tqo2Exact> res(sq.size());
    parallel_for(int(sq.size()), jobs, [&](int i) { res[i] = check_tqo2_exact(model, sq[i], 1e-8, 1e-10, &V); });
    TqoReport rep;
    rep.condition = Condition::tqo2;
    rep.method = Method::exact;
    rep.L_star = max_r;
    rep.squares_checked = int(sq.size());
    for (std::size_t i = 0; i < sq.size(); ++i) {
        rep.max_deviation = std::max(rep.max_deviation, res[i].max_angle);
        if (!res[i].pass)
            rep.witnesses.push_back({sq[i], "kernel rank " + std::to_string(res[i].rank_global) + " vs local " +
                                                std::to_string(res[i].rank_local) + ", angle " +
                                                std::to_string(res[i].max_angle)});
    }
    rep.pass = rep.witnesses.empty();
    return rep;
}

TqoReport check_tqo1_exact_all(const Model& model, int max_r, int jobs) {
    Mat V = ground_basis(model);
    auto sq = squares_up_to(model.lattice, max_r);
    std::vector<Tqo1Exact> res(sq.size());
    parallel_for(int(sq.size()), jobs, [&](int i) { res[i] = check_tqo1_exact(model, sq[i], 1e-8, &V); });
    TqoReport rep;
    rep.condition = Condition::tqo1;
    rep.method = Method::exact;
    rep.L_star = max_r;
    rep.squares_checked = int(sq.size());
    for (std::size_t i = 0; i < sq.size(); ++i) {
        rep.max_deviation = std::max(rep.max_deviation, res[i].max_deviation);
        if (!res[i].pass)
            rep.witnesses.push_back({sq[i], res[i].worst + " deviates by " + std::to_string(res[i].max_deviation)});
    }
    rep.pass = rep.witnesses.empty();
    return rep;
}

CorollaryResult corollary_check(const Model& model, const Square& A, const LocalOp& O_A, double tol,
                                const Mat* basis) {
    const Lattice& lat = model.lattice;
    auto qa = lat.qubits(A);
    if (!qubit_subset(O_A.qubits, qa)) throw UsageError("operator not supported on " + to_string(A));
    Mat store;
    const Mat& V = basis_or(model, basis, store);
    CorollaryResult res{};
    res.residual_global = opnorm(apply_local(O_A, model.all_qubits(), V));
    Square B = lat.neighborhood(A);
    if (B.r >= lat.L())
        res.residual_local = res.residual_global;
    else {
        LocalOp pb = supported_ground_projector(model, B);
        res.residual_local = opnorm(extend(O_A, pb.qubits).m * pb.m);
    }
    if (res.residual_global > tol)
        res.status = CorollaryStatus::precondition_violated;
    else
        res.status = res.residual_local <= tol ? CorollaryStatus::pass : CorollaryStatus::fail;
    return res;
}

}  // namespace tqo
