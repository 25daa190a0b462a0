#include "tqo/dense.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#include "tqo/errors.hpp"

namespace tqo {

long long dense_cap() {
    if (const char* env = std::getenv("TQO_MAX_DENSE_DIM")) {
        try {
            long long v = std::stoll(env);
            if (v > 0) return v;
        } catch (const std::exception&) {
        }
        throw UsageError(std::string("TQO_MAX_DENSE_DIM is not a positive integer: ") + env);
    }
    return 1LL << 13;
}

long long matrix_free_cap() { return 1LL << 26; }

void require_dense(long long dim, const char* what) {
    if (dim > dense_cap()) throw ResourceError(std::string(what) + " exceeds the dense cap", dim);
}

void require_matrix_free(long long dim, const char* what) {
    if (dim > matrix_free_cap()) throw ResourceError(std::string(what) + " exceeds the matrix-free cap", dim);
}

std::vector<int> qubit_union(std::span<const int> a, std::span<const int> b) {
    std::vector<int> out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

bool qubit_subset(std::span<const int> a, std::span<const int> b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

namespace {

// positions of `from` inside the sorted list `to`
std::vector<int> positions(std::span<const int> from, std::span<const int> to) {
    std::vector<int> pos;
    pos.reserve(from.size());
    for (int q : from) {
        auto it = std::lower_bound(to.begin(), to.end(), q);
        if (it == to.end() || *it != q) throw UsageError("qubit " + std::to_string(q) + " not in target region");
        pos.push_back(int(it - to.begin()));
    }
    return pos;
}

std::vector<long> scatter_table(const std::vector<int>& pos) {
    std::vector<long> t(1L << pos.size(), 0);
    for (long a = 0; a < long(t.size()); ++a)
        for (std::size_t k = 0; k < pos.size(); ++k)
            if ((a >> k) & 1) t[a] |= 1L << pos[k];
    return t;
}

long gather(long c, const std::vector<int>& pos) {
    long a = 0;
    for (std::size_t k = 0; k < pos.size(); ++k)
        if ((c >> pos[k]) & 1) a |= 1L << k;
    return a;
}

}  // namespace

void pauli_left_multiply(const Pauli& p, std::span<const int> qubits, Mat& m) {
    long xm = 0, zm = 0;
    for (std::size_t k = 0; k < qubits.size(); ++k) {
        if (p.x().get(qubits[k])) xm |= 1L << k;
        if (p.z().get(qubits[k])) zm |= 1L << k;
    }
    if (p.weight() != __builtin_popcountl(xm | zm)) throw UsageError("Pauli " + p.str() + " not supported on region");
    static const cplx ipow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    cplx ph = ipow[p.phase()];
    Mat out(m.rows(), m.cols());
    for (long b = 0; b < m.rows(); ++b) {
        cplx s = (__builtin_popcountl(zm & b) & 1) ? -ph : ph;
        out.row(b ^ xm) = s * m.row(b);
    }
    m.swap(out);
}

Mat pauli_matrix(const Pauli& p, std::span<const int> qubits) {
    Mat m = Mat::Identity(1L << qubits.size(), 1L << qubits.size());
    pauli_left_multiply(p, qubits, m);
    return m;
}

Mat extend(const Mat& m, std::span<const int> from, std::span<const int> to) {
    if (from.size() == to.size()) return m;
    auto pos = positions(from, to);
    auto sc = scatter_table(pos);
    long inner = 0;
    for (long s : sc) inner |= s;
    long D = 1L << to.size(), d = long(sc.size());
    Mat out = Mat::Zero(D, D);
    for (long c = 0; c < D; ++c) {
        long cf = gather(c, pos), rest = c & ~inner;
        for (long r = 0; r < d; ++r) out(rest | sc[r], c) = m(r, cf);
    }
    return out;
}

LocalOp extend(const LocalOp& op, std::span<const int> to) {
    return {std::vector<int>(to.begin(), to.end()), extend(op.m, op.qubits, to)};
}

Mat partial_trace(const Mat& m, std::span<const int> all, std::span<const int> keep) {
    auto pk = positions(keep, all);
    std::vector<int> traced;
    for (int k = 0; k < int(all.size()); ++k)
        if (std::find(pk.begin(), pk.end(), k) == pk.end()) traced.push_back(k);
    auto sk = scatter_table(pk), st = scatter_table(traced);
    long dk = long(sk.size());
    Mat out = Mat::Zero(dk, dk);
    for (long a = 0; a < dk; ++a)
        for (long b = 0; b < dk; ++b) {
            cplx s = 0;
            for (long e : st) s += m(sk[a] | e, sk[b] | e);
            out(a, b) = s;
        }
    return out;
}

Mat retensor(const Mat& rho, std::span<const int> keep, std::span<const int> all) {
    double scale = std::ldexp(1.0, -int(all.size() - keep.size()));
    return extend(rho, keep, all) * scale;
}

Mat apply_local(const LocalOp& op, std::span<const int> all, const Mat& x) {
    auto pos = positions(op.qubits, all);
    auto sc = scatter_table(pos);
    long inner = 0;
    for (long s : sc) inner |= s;
    long d = long(sc.size());
    Mat out(x.rows(), x.cols()), blk(d, x.cols());
    for (long rest = 0; rest < x.rows(); ++rest) {
        if (rest & inner) continue;
        for (long a = 0; a < d; ++a) blk.row(a) = x.row(rest | sc[a]);
        Mat y = op.m * blk;
        for (long a = 0; a < d; ++a) out.row(rest | sc[a]) = y.row(a);
    }
    return out;
}

LocalOp commutator(const LocalOp& a, const LocalOp& b) {
    auto u = qubit_union(a.qubits, b.qubits);
    Mat ea = extend(a.m, a.qubits, u), eb = extend(b.m, b.qubits, u);
    return {u, ea * eb - eb * ea};
}

double power_norm(const Mat& a, double rel_tol, int max_iter) {
    if (a.size() == 0) return 0;
    std::mt19937_64 rng(12345);
    std::normal_distribution<double> nd;
    Vec v(a.cols());
    for (auto& c : v) c = cplx(nd(rng), nd(rng));
    v.normalize();
    double prev = 0;
    for (int it = 0; it < max_iter; ++it) {
        Vec w = a.adjoint() * (a * v);
        double lam = w.norm();
        if (lam == 0) return 0;
        v = w / lam;
        if (std::abs(lam - prev) <= rel_tol * lam) return std::sqrt(lam);
        prev = lam;
    }
    return std::sqrt(prev);
}

double opnorm(const Mat& a) {
    if (a.size() == 0) return 0;
    if (a.rows() < 1024) {
        Eigen::SelfAdjointEigenSolver<Mat> es(a.adjoint() * a, Eigen::EigenvaluesOnly);
        return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
    }
    return power_norm(a);
}

Mat random_gue(int dim, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    Mat g(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) g(i, j) = cplx(nd(rng), nd(rng));
    return (g + g.adjoint()) * 0.5;
}

Mat random_gue(int dim, unsigned long long seed) {
    std::mt19937_64 rng(seed);
    return random_gue(dim, rng);
}

Mat spectral_projector(const Mat& h, double lo, double hi) {
    Eigen::SelfAdjointEigenSolver<Mat> es(h);
    const auto& ev = es.eigenvalues();
    std::vector<int> idx;
    for (int i = 0; i < ev.size(); ++i)
        if (ev[i] >= lo && ev[i] <= hi) idx.push_back(i);
    Mat v(h.rows(), long(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) v.col(long(k)) = es.eigenvectors().col(idx[k]);
    return v * v.adjoint();
}

Mat hermitian_pinv(const Mat& h, double rel_cut) {
    Eigen::SelfAdjointEigenSolver<Mat> es(h);
    const auto& ev = es.eigenvalues();
    double mx = ev.cwiseAbs().maxCoeff();
    RVec inv(ev.size());
    for (int i = 0; i < ev.size(); ++i) inv[i] = std::abs(ev[i]) > rel_cut * mx ? 1.0 / ev[i] : 0.0;
    return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().adjoint();
}

Mat expm(const Mat& s) { return s.exp(); }

}  // namespace tqo

namespace tqo {

void add_pauli(Mat& m, const Pauli& p, std::span<const int> qubits, cplx coeff) {
    long xm = 0, zm = 0;
    for (std::size_t k = 0; k < qubits.size(); ++k) {
        if (p.x().get(qubits[k])) xm |= 1L << k;
        if (p.z().get(qubits[k])) zm |= 1L << k;
    }
    if (p.weight() != __builtin_popcountl(xm | zm)) throw UsageError("Pauli " + p.str() + " not supported on region");
    static const cplx ipow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    cplx ph = coeff * ipow[p.phase()];
    for (long b = 0; b < m.cols(); ++b) m(b ^ xm, b) += (__builtin_popcountl(zm & b) & 1) ? -ph : ph;
}

}  // namespace tqo
