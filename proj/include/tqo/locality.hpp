#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tqo/lattice.hpp"

namespace tqo {

// Open chain of n qubits: K * sum (Z_i Z_{i+1} + hx X_i + hz Z_i).
Mat mixed_field_chain(int n, double K, double hx, double hz);
// qubits of an open chain within distance l of the sorted set `core`
std::vector<int> chain_ball(int n, const std::vector<int>& core, int l);

// Heisenberg evolution O -> e^{iHt} O e^{-iHt} through one eigendecomposition of H.
class HeisenbergEvolution {
public:
    explicit HeisenbergEvolution(const Mat& H);
    long dim() const { return long(energies_.size()); }
    Mat evolve(const Mat& O, double t) const;
    const RVec& energies() const { return energies_; }

private:
    RVec energies_;
    bool real_ = false;
    Eigen::MatrixXd ur_;
    Mat uc_;
};

// ||[e^{iHt} O_A e^{-iHt}, O_B]|| for operators given on the full space
double lr_commutator_norm(const HeisenbergEvolution& ev, const Mat& OA, const Mat& OB, double t);
double lr_commutator_norm(const Mat& H, const Mat& OA, const Mat& OB, double t);

struct FrontFit {
    std::vector<int> distances;
    std::vector<double> arrival;   // first time the norm reaches the threshold
    double velocity = NAN;         // inverse slope of arrival vs distance
    double intercept = NAN;
};

// Z on `source` against Z on source + d for each distance, scanned over times in (0, t_max].
FrontFit lr_front(const Mat& H, int n, int source, const std::vector<int>& distances, double t_max, int t_steps,
                  double threshold = 0.01);

// F_mu(x) = e^{-mu x} / (1 + x^2)
double f_mu(double mu, double x);
// sup over cell pairs (u, v) of sum over terms containing both of ||term|| / F_mu(dist(u, v))
double interaction_norm_mu(const Lattice& lat, const std::vector<std::pair<Square, double>>& norms, double mu);
double interaction_norm_mu(const LocalDecomposition& dec, double mu);

// F~(w) = -m(w)/w with a smooth odd-compatible mask m, and the real odd F(t) on [0, T].
struct FilterFunction {
    double T = 0;
    int resolution = 0;
    std::vector<double> t, F;
    // exact F~ used by the frequency-domain generator
    double freq(double w) const;
    // -2 * Simpson integral of F(t) sin(w t) over [0, T]
    double freq_quadrature(double w) const;
};

// smooth step: 0 at 0, 1 for |w| >= 1/2, all derivatives continuous
double filter_mask(double w);
double filter_time(double t);
FilterFunction build_filter(double span_T, int resolution, double tol = 1e-4);

enum class GeneratorMethod { spectral, quadrature };

// D_s = i int F(t) e^{iHt} V e^{-iHt} dt, evaluated in the eigenbasis of H
Mat quasi_adiabatic_generator(const Mat& H, const Mat& V, const FilterFunction& F,
                              GeneratorMethod method = GeneratorMethod::spectral, double quad_tol = 1e-6);

enum class Integrator { left, midpoint };

struct ContinuationResult {
    Mat U;
    double max_deviation = 0;
    double min_gap = INFINITY;
    double unitarity = 0;
    std::vector<int> band_ranks;
    std::vector<double> deviations;   // per s node
};

// Continues the lowest `band` eigenvectors of H0 + sV from s = 0 to 1 with `steps` ordered exponentials.
ContinuationResult continue_projector(const Mat& H0, const Mat& V, int band, int steps, const FilterFunction& F,
                                      Integrator integ = Integrator::midpoint, double min_gap = 0.5);

Mat dress_operator(const Mat& O, const Mat& U);

// ||O_l - U O U^dagger|| where O_l keeps the regions[l] part and averages the rest to the identity
std::vector<double> dressed_locality_profile(const Mat& O, const Mat& U, int n,
                                             const std::vector<std::vector<int>>& regions);

// projector onto the `band` lowest eigenvectors
Mat band_projector(const Mat& H, int band, double* gap = nullptr);

}  // namespace tqo
