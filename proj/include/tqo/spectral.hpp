#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tqo/lattice.hpp"

namespace tqo {

struct LinearOperator {
    long long dim = 0;
    std::function<void(const Vec&, Vec&)> apply;
};
LinearOperator as_operator(const Hamiltonian& h);
LinearOperator as_operator(const Mat& m);

struct LanczosOptions {
    int krylov = 60;
    int max_restarts = 200;
    double tol = 1e-10;  // residual relative to the spectral scale
    unsigned long long seed = 5;
};

// The `count` smallest eigenvalues, ascending.
std::vector<double> low_spectrum(const Mat& h, int count);
// Restarted Lanczos with full reorthogonalization; converged vectors are locked one at a time,
// so exactly degenerate eigenvalues are returned with their multiplicity.
std::vector<double> low_spectrum(const LinearOperator& h, int count, const LanczosOptions& opt = {},
                                 std::vector<Vec>* vectors = nullptr);
// Dense below the dense cap, Lanczos above.
std::vector<double> low_spectrum(const Hamiltonian& h, int count);

struct BandGap {
    int k, k_next;
    double gap;
};

struct SpectralReport {
    std::vector<double> eigenvalues;           // shifted, ascending
    std::vector<std::optional<int>> band;      // H0 level each eigenvalue is assigned to
    std::vector<BandGap> gaps;
    double shift = 0;
    double delta = 0;                          // half the width of the ground band
};

// Shifts the spectrum of H0+V so the ground band (the lowest multiplicity(0) eigenvalues) is centred
// on zero and assigns every eigenvalue to the nearest H0 level.
SpectralReport band_report(std::vector<double> eigenvalues, const std::vector<double>& h0_levels);
// max over assigned eigenvalues with k >= 1 of (|lambda - k| - delta)_+ / (k J)
double fit_c1(const SpectralReport& r, double J);

struct BandCheck {
    bool pass = true;
    std::vector<bool> inside;   // per eigenvalue, lambda in I_k
    bool gaps_ok = true;        // gap >= 1/2 for every k with J < J_k
    bool multiplicities_ok = true;
    std::string detail;
};
// h0_levels lists the H0 spectrum with multiplicity; band populations must match it.
BandCheck verify_bands(const SpectralReport& r, const std::vector<double>& h0_levels, double J, double c1,
                       double delta);

// Smallest b with W^2 <= b^2 H0^2; nullopt when W does not annihilate ker(H0).
std::optional<double> relative_bound(const Mat& W, const Mat& H0, double tol = 1e-9, Vec* attained = nullptr);

enum class ContainmentStatus { pass, fail, skipped };
struct Containment {
    ContainmentStatus status;
    double worst_excess = 0;   // distance of the worst eigenvalue outside the union
    std::string note;
};
Containment spectrum_containment_check(const Mat& H0, const Mat& W, double b, double tol = 1e-9);

// Unstable toric sectors: each generator equals +-(product of plaquettes) or a star.
struct SectorModel {
    int plaquettes = 0, stars = 0;
    std::vector<std::vector<int>> plaquette_terms;   // plaquette sets of Z-type generators
    std::vector<int> plaquette_signs;
    std::vector<std::vector<int>> star_terms;
    std::vector<int> star_signs;
};
SectorModel sector_model(const Model& model);
// Energy of -sum S + h sum_p B_p in the sector with plaquette values b and star values a (entries +-1).
double sector_energy(const SectorModel& s, const std::vector<int>& b, const std::vector<int>& a, double h);

struct SweepPoint {
    double h;
    double ground_energy;
    double gap;
    bool ground_all_minus;  // every B_p = -1 in the ground sector
    bool ground_all_plus;
};
struct SweepResult {
    std::vector<SweepPoint> points;
    std::optional<double> crossing;  // h where the all-minus plaquette sector overtakes
    bool exhaustive = false;         // plaquette sectors enumerated completely
};
SweepResult sector_gap_sweep(const Model& model, const std::vector<double>& h_values);
// Every sector energy with multiplicity (small models only), for comparison with dense spectra.
std::vector<double> all_sector_energies(const Model& model, double h);

}  // namespace tqo
