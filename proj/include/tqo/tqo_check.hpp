#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tqo/lattice.hpp"

namespace tqo {

enum class Condition { tqo1, tqo2 };
enum class Method { exact, stabilizer };

struct Witness {
    Square square;
    std::string diagnostic;
};

struct TqoReport {
    Condition condition = Condition::tqo2;
    Method method = Method::stabilizer;
    int L_star = 0;
    bool pass = true;
    std::vector<Witness> witnesses;
    int squares_checked = 0;
    std::optional<int> distance;          // TQO-1 stabilizer: exhaustive distance, if found
    int distance_lower_bound = 0;         // d > this when no logical was found
    double max_deviation = 0;             // exact methods
    std::vector<std::string> notes;
};

int default_lstar(int L);

// Orthonormal basis of the common +1 space of the group (columns), built matrix-free.
Mat ground_basis(const Model& model, unsigned long long seed = 7);
// Reduced density matrix of the normalized projector onto span(V) on the kept qubits (unnormalized sum).
Mat reduced_state(const Mat& V, int n, std::span<const int> keep);

// Projector onto the common +1 space of the generators supported inside B, on B's qubits.
LocalOp supported_ground_projector(const Model& model, const Square& B);

TqoReport check_tqo2_stabilizer(const Model& model, int L_star, int jobs = 1);
// Passes iff no logical operator of weight <= f_factor * L_star exists.
TqoReport check_tqo1_stabilizer(const Model& model, int L_star, int weight_cutoff, double f_factor = 1.0);

struct Tqo1Exact {
    bool pass = true;
    double max_deviation = 0;
    std::string worst;  // Pauli attaining the max
};
Tqo1Exact check_tqo1_exact(const Model& model, const Square& A, double tol = 1e-8, const Mat* basis = nullptr);

struct Tqo2Exact {
    bool pass = true;
    int rank_global = 0, rank_local = 0;
    double max_angle = 0;  // largest principal angle between the kernels
    Square B;
};
Tqo2Exact check_tqo2_exact(const Model& model, const Square& A, double angle_tol = 1e-8,
                           double rank_cut = 1e-10, const Mat* basis = nullptr);

// Exact TQO-2 over every square of size 1..max_r.
TqoReport check_tqo2_exact_all(const Model& model, int max_r, int jobs = 1);
TqoReport check_tqo1_exact_all(const Model& model, int max_r, int jobs = 1);

enum class CorollaryStatus { pass, fail, precondition_violated };
struct CorollaryResult {
    CorollaryStatus status;
    double residual_global;  // ||O_A P||
    double residual_local;   // ||O_A P_B||
};
CorollaryResult corollary_check(const Model& model, const Square& A, const LocalOp& O_A, double tol = 1e-8,
                                const Mat* basis = nullptr);

// Orthonormal basis of the range of a PSD matrix with relative cutoff.
Mat range_basis(const Mat& psd, double rel_cut);
// sine of the largest principal angle between two subspaces given by orthonormal bases
double max_principal_sine(const Mat& U1, const Mat& U2);

}  // namespace tqo
