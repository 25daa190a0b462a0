#pragma once

#include <string>

#include "tqo/lattice.hpp"

namespace tqo {

struct PerturbationOptions {
    unsigned long long seed = 1;
    int q = 1;         // largest square size
    double J = 0.01;
    double mu = 1.0;
    // Sum of random two-qubit terms on perpendicular edge pairs meeting at a corner of each cell,
    // one block per cell (edges layout only, r = 1).
    bool two_local = false;
};

// GUE blocks normalized to ||V_{r,A}|| = J e^{-mu r}; claimed class (J, mu, 0).
LocalDecomposition random_perturbation(const Lattice& lat, const PerturbationOptions& opt);

// Text format:
//   perturbation L=<int> layout=<edges|sites> [J=<real> mu=<real> alpha=<real>]
//   @square (x,y,r) pauli        followed by lines "<real coefficient> <Pauli>"
//   @square (x,y,r) dense <d>    followed by d*d "re im" pairs, row-major
std::string format_perturbation(const LocalDecomposition& v);
// Verifies the claimed decay class when the header carries one.
LocalDecomposition parse_perturbation(const Lattice& lat, const std::string& text);
LocalDecomposition load_perturbation_file(const Lattice& lat, const std::string& path);

}  // namespace tqo
