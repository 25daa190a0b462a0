#pragma once

#include <complex>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "tqo/pauli.hpp"

namespace tqo {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;

// Dense materialization cap (2^13 unless TQO_MAX_DENSE_DIM overrides it).
long long dense_cap();
// Matrix-free cap, 2^26.
long long matrix_free_cap();
void require_dense(long long dim, const char* what);
void require_matrix_free(long long dim, const char* what);

// Operator on an ordered list of qubits; bit k of a basis index is qubits[k].
struct LocalOp {
    std::vector<int> qubits;
    Mat m;
};

std::vector<int> qubit_union(std::span<const int> a, std::span<const int> b);
bool qubit_subset(std::span<const int> a, std::span<const int> b);

// Dense image of p on the given qubits; p must be supported inside them.
Mat pauli_matrix(const Pauli& p, std::span<const int> qubits);
// p times m, where m acts on qubits
void pauli_left_multiply(const Pauli& p, std::span<const int> qubits, Mat& m);

// Tensor with identity: from must be a subset of to.
Mat extend(const Mat& m, std::span<const int> from, std::span<const int> to);
LocalOp extend(const LocalOp& op, std::span<const int> to);
// Trace out everything in all but keep.
Mat partial_trace(const Mat& m, std::span<const int> all, std::span<const int> keep);
// Inverse of partial_trace up to normalization: rho (on keep) tensor I / 2^k.
Mat retensor(const Mat& rho, std::span<const int> keep, std::span<const int> all);

// (op tensor I) x, where the rows of x index the basis of `all`
Mat apply_local(const LocalOp& op, std::span<const int> all, const Mat& x);

LocalOp commutator(const LocalOp& a, const LocalOp& b);

// Spectral norm: exact below 2^10, power iteration on A^dag A (1e-8 relative) above.
double opnorm(const Mat& a);
double power_norm(const Mat& a, double rel_tol = 1e-8, int max_iter = 5000);
Mat random_gue(int dim, unsigned long long seed);
Mat random_gue(int dim, std::mt19937_64& rng);

// Projector onto the span of eigenvectors of the Hermitian h whose eigenvalues lie in [lo, hi].
Mat spectral_projector(const Mat& h, double lo, double hi);
// Moore-Penrose pseudoinverse of a Hermitian matrix with relative cutoff.
Mat hermitian_pinv(const Mat& h, double rel_cut = 1e-10);
// e^{S} for anti-Hermitian S via Pade-13 scaling and squaring
Mat expm(const Mat& s);

}  // namespace tqo

namespace tqo {
// m += coeff * p, with p restricted to the given qubits
void add_pauli(Mat& m, const Pauli& p, std::span<const int> qubits, cplx coeff);
}  // namespace tqo
