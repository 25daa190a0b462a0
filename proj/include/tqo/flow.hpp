#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tqo/lattice.hpp"

namespace tqo {

// Per-square data of the commuting model: H0(A), P_A, Q_A and the pseudoinverse of H0(A).
struct LocalBlock {
    std::vector<int> qubits;
    Mat h0, p, q, pinv;
};

class FlowContext {
public:
    explicit FlowContext(const Model& model);
    const Model& model() const { return *model_; }
    const Lattice& lattice() const { return model_->lattice; }
    const LocalBlock& local(const Square& A);
    // global ground basis, empty when the system is too large
    const Mat& ground_basis();
    bool dense_feasible() const;
    // H0 as a local decomposition: every generator term on its assigned square
    LocalDecomposition h0_decomposition() const;

private:
    const Model* model_;
    std::map<Square, LocalBlock> cache_;
    std::optional<Mat> basis_;
};

// E_A(O) = Q_A H0(A)^+ O P_A - P_A O H0(A)^+ Q_A, on A's qubits
LocalOp e_super(FlowContext& ctx, const Square& A, const LocalOp& O);

// Re-registers every (r, A) term on the (r+2)-square holding A and its neighbours (capped at the torus).
// The claimed class becomes (c J e^{2 mu}, mu, alpha) with c the smallest constant the padded terms satisfy.
LocalDecomposition pad_boundary(const LocalDecomposition& dec);

// Subtracts from every term the multiple of the identity that makes P T P traceless on the ground space.
// Returns the total shift; `defect` receives max ||P T P - c P|| (nonzero when TQO-1 fails on a square).
double shift_ground_expectation(FlowContext& ctx, LocalDecomposition& dec, double* defect = nullptr);

// Commutator [S, V] with each pairwise commutator assigned to the lexicographically first square of the
// smallest size >= p + q that covers A, B and B's nearest neighbours (the torus when nothing smaller fits).
LocalDecomposition commutator_decomposition(const LocalDecomposition& S, const LocalDecomposition& V);

struct LinearizedSolution {
    LocalDecomposition S;
    LocalDecomposition V;                 // shifted and padded V actually used
    LocalDecomposition W;                 // shifted W actually used
    std::vector<LocalDecomposition> D;    // D^(i) = [S^(i), W], i = 1..depth
    std::vector<LocalDecomposition> parts;  // S^(i)
    std::vector<double> residuals;        // ||Q([S_{<=i}, H0+W] + V)P|| per depth, empty if not dense
    double shift = 0;                     // identity removed from V and W
    double tqo1_defect = 0;
};

struct SeriesOptions {
    int depth = 8;
    double stall_ratio = 0.9;  // early stop when residual(i)/residual(i-1) exceeds this
};

// Series solution of Q([S, H0+W] + V)P = 0 with S anti-Hermitian.
LinearizedSolution solve_linearized(FlowContext& ctx, const LocalDecomposition& V, const LocalDecomposition& W,
                                    const SeriesOptions& opt = {});

// Term-wise block-diagonal W~ = sum_A (P_A V_A P_A + Q_A V_A Q_A) + sum_{i<depth} sum_C (P_C D^(i)_C P_C + Q_C D^(i)_C Q_C).
LocalDecomposition transformed_diagonal(FlowContext& ctx, const LinearizedSolution& sol);

// Nested regions B_0 c B_1 c ... and operator O on B_0; S terms are (qubits, operator) pairs.
// Returns D_0 = omega_{B_0}(O) and D_j = omega_{B_j}(O) - omega_{B_{j-1}}(O), each on the qubits of B_j.
std::vector<LocalOp> shell_decomposition(const std::vector<LocalOp>& S_terms, const LocalOp& O,
                                         const std::vector<std::vector<int>>& regions);

// omega(H) = e^S H e^{-S} - H - [S, H] term by term, shells B_j = grow(B, j) up to j_max
// (the last shell also absorbs everything beyond it).
LocalDecomposition second_order_remainder(const LocalDecomposition& S, const LocalDecomposition& H, int j_max,
                                          std::vector<std::vector<double>>* shell_norms = nullptr);

DecayClass degree_reset(const DecayClass& c, double epsilon, double alpha_gain);

struct LevelReport {
    int level = 0;
    DecayClass v_class, w_class;
    double offdiag_residual = NAN;  // ||Q H(n) P||
    double series_residual = NAN;
    double e_bound = 0;
    double lambda = 0;
    double tqo1_defect = 0;
    double spectrum_shift = NAN;    // max eigenvalue change vs H(0), dense only
    std::string note;
};

struct FlowState {
    int level = 0;
    std::vector<LocalDecomposition> W_parts;
    LocalDecomposition V;
    std::optional<Mat> E;   // dense error Hamiltonian when the system is small
    double e_bound = 0;     // sum of norms moved into E
    double lambda = 0;
    double mu = 1;          // current decay rate
    std::vector<LevelReport> reports;
};

struct FlowOptions {
    int L_star = 1;
    SeriesOptions series;
    int j_max = 4;
    double reset_epsilon = 0.5;
    double reset_gain = 7;   // restores alpha from -1 to 6
    bool check_spectrum = true;
};

FlowState initial_state(FlowContext& ctx, const LocalDecomposition& V, int L_star);
// One level H(n) -> H(n+1) = e^S H(n) e^{-S}.
FlowState flow_step(FlowContext& ctx, const FlowState& state, const FlowOptions& opt);
// Dense H(n) = H0 + W + V + E + lambda.
Mat dense_hamiltonian(FlowContext& ctx, const FlowState& state);
// ||Q H P|| with the global ground projector
double offdiag_residual(FlowContext& ctx, const Mat& H);

struct ScalarFlowParams {
    double J = 0.01, mu = 1, c1 = 1, c2 = 1, c3 = 0, c = 1, epsilon = 0.1, L = 10;
    double target = 0;  // level where J drops below this is reported (0: unused)
};
struct ScalarFlowPoint {
    int n;
    double J, Jd, mu, E;
};
struct ScalarFlowResult {
    std::vector<ScalarFlowPoint> trajectory;
    std::optional<int> breakdown;   // level where mu <= 0
    std::optional<int> below_target;
};
ScalarFlowResult scalar_flow(const ScalarFlowParams& p, int n_max);

}  // namespace tqo
