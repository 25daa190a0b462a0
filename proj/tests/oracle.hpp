#pragma once
// Independent dense reference implementations used only by tests.

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using C = std::complex<double>;
using M = Eigen::MatrixXcd;

inline M kron(const M& a, const M& b) {
    M out(a.rows() * b.rows(), a.cols() * b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

inline M sigma(char c) {
    M m(2, 2);
    switch (c) {
        case 'X': m << 0, 1, 1, 0; break;
        case 'Y': m << 0, C(0, -1), C(0, 1), 0; break;
        case 'Z': m << 1, 0, 0, -1; break;
        default: m << 1, 0, 0, 1;
    }
    return m;
}

// letters[k] acts on qubit k, qubit k is bit k of the basis index (so it is the rightmost kron factor for k = 0)
inline M pauli_string(const std::string& letters, C coeff = 1) {
    M out = M::Identity(1, 1);
    for (char c : letters) out = kron(sigma(c), out);
    return coeff * out;
}

}  // namespace oracle

namespace oracle {

// Letter-string Pauli with a complex coefficient; products computed from 2x2 matrices.
struct LPauli {
    std::string letters;
    C coeff = 1;
};

inline LPauli lmul(const LPauli& a, const LPauli& b) {
    LPauli out{std::string(a.letters.size(), 'I'), a.coeff * b.coeff};
    for (std::size_t k = 0; k < a.letters.size(); ++k) {
        M prod = sigma(a.letters[k]) * sigma(b.letters[k]);
        for (char c : std::string("IXYZ")) {
            M s = sigma(c);
            C t = (s.adjoint() * prod).trace() / 2.0;
            if (std::abs(t) > 0.5) { out.letters[k] = c; out.coeff *= t; break; }
        }
    }
    return out;
}

inline bool lsame(const LPauli& a, const LPauli& b) { return a.letters == b.letters && std::abs(a.coeff - b.coeff) < 1e-12; }

// every product of subsets of gens
inline std::vector<LPauli> enumerate_group(const std::vector<LPauli>& gens) {
    std::vector<LPauli> out;
    std::size_t n = gens.empty() ? 0 : gens[0].letters.size();
    for (unsigned long mask = 0; mask < (1UL << gens.size()); ++mask) {
        LPauli p{std::string(n, 'I'), 1};
        for (std::size_t g = 0; g < gens.size(); ++g)
            if ((mask >> g) & 1) p = lmul(p, gens[g]);
        out.push_back(p);
    }
    return out;
}

}  // namespace oracle
