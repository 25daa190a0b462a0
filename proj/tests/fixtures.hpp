#pragma once
// Random inputs shared by the unit tests and the acceptance binary.

#include <random>
#include <vector>

#include "tqo/dense.hpp"
#include "tqo/errors.hpp"
#include "tqo/lattice.hpp"
#include "tqo/pauli.hpp"

namespace fixtures {

// `count` independent commuting Hermitian Paulis on n qubits whose group excludes -I.
inline std::vector<tqo::Pauli> random_commuting_paulis(int n, int count, std::mt19937_64& rng) {
    std::vector<tqo::Pauli> out;
    std::uniform_int_distribution<int> letter(0, 3), coin(0, 1);
    int rank = 0;
    for (int tries = 0; int(out.size()) < count && tries < 100000; ++tries) {
        std::string text = coin(rng) ? "-1" : "+1";
        bool any = false;
        for (int q = 0; q < n; ++q) {
            int l = letter(rng);
            if (l) {
                text += std::string(" ") + "XYZ"[l - 1] + std::to_string(q);
                any = true;
            }
        }
        if (!any) continue;
        tqo::Pauli p = tqo::Pauli::parse(text, n);
        bool ok = true;
        for (const auto& o : out) ok = ok && tqo::commutes(o, p);
        if (!ok) continue;
        auto trial = out;
        trial.push_back(p);
        try {
            tqo::StabilizerGroup g(n, trial);
            if (g.rank() == rank + 1) {
                out = trial;
                rank = g.rank();
            }
        } catch (const tqo::UsageError&) {
        }
    }
    return out;
}

// H0 = sum (I - S)/2 as a dense matrix on n qubits
inline tqo::Mat projector_sum(int n, const std::vector<tqo::Pauli>& gens) {
    std::vector<int> all(n);
    for (int q = 0; q < n; ++q) all[q] = q;
    long d = 1L << n;
    tqo::Mat h = tqo::Mat::Identity(d, d) * (0.5 * double(gens.size()));
    for (const auto& g : gens) tqo::add_pauli(h, g, all, -0.5);
    return h;
}

// sum_i Q_i R_i Q_i with Q_i = (I - S_i)/2 and R_i a random Hermitian operator on the support of S_i,
// so every term commutes with the ground projector and annihilates it.
inline tqo::Mat dressed_block_perturbation(int n, const std::vector<tqo::Pauli>& gens, std::mt19937_64& rng) {
    std::vector<int> all(n);
    for (int q = 0; q < n; ++q) all[q] = q;
    long d = 1L << n;
    tqo::Mat w = tqo::Mat::Zero(d, d);
    for (const auto& g : gens) {
        std::vector<int> sup;
        for (int q = 0; q < n; ++q)
            if (g.support().get(q)) sup.push_back(q);
        tqo::Mat r = tqo::extend(tqo::random_gue(1 << sup.size(), rng), sup, all);
        tqo::Mat q = tqo::Mat::Identity(d, d) * 0.5;
        tqo::add_pauli(q, g, all, -0.5);
        w += q * r * q;
    }
    return w;
}

// Wen plaquette model on sites: X Z / Z X on every 2x2 block of sites, all mutually commuting.
inline tqo::Model wen_model(int L) {
    tqo::Lattice lat(L, tqo::Layout::sites);
    int n = lat.qubit_count();
    std::vector<tqo::Pauli> g;
    for (int x = 0; x < L; ++x)
        for (int y = 0; y < L; ++y)
            g.push_back(tqo::Pauli::single(n, lat.site(x, y), 'X') * tqo::Pauli::single(n, lat.site(x + 1, y), 'Z') *
                        tqo::Pauli::single(n, lat.site(x, y + 1), 'Z') *
                        tqo::Pauli::single(n, lat.site(x + 1, y + 1), 'X'));
    return tqo::make_model("wen", lat, g);
}

// random Hermitian (or anti-Hermitian) local decomposition with one term per listed square
inline tqo::LocalDecomposition random_decomposition(const tqo::Lattice& lat, const std::vector<tqo::Square>& squares,
                                                    double scale, bool anti, std::mt19937_64& rng) {
    tqo::LocalDecomposition d(&lat);
    for (const auto& s : squares) {
        auto q = lat.qubits(s);
        tqo::Mat m = tqo::random_gue(1 << q.size(), rng);
        m *= scale / tqo::opnorm(m);
        if (anti) m *= tqo::cplx(0, 1);
        d.add(s, m);
    }
    return d;
}

}  // namespace fixtures
