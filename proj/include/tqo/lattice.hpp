#pragma once

#include <compare>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "tqo/dense.hpp"
#include "tqo/pauli.hpp"

namespace tqo {

enum class Layout { edges, sites };

// r x r block of cells anchored at (x, y); r >= L means the whole torus.
struct Square {
    int x = 0, y = 0, r = 1;
    bool operator==(const Square&) const = default;
    bool operator<(const Square& o) const { return std::tie(r, x, y) < std::tie(o.r, o.x, o.y); }
};
std::string to_string(const Square& s);

// Z_L x Z_L torus with l-infinity distance. In the edges layout every cell owns the four
// edges of its boundary, so neighbouring squares share boundary qubits.
class Lattice {
public:
    Lattice() = default;
    Lattice(int L, Layout layout);

    int L() const { return L_; }
    Layout layout() const { return layout_; }
    int qubit_count() const { return layout_ == Layout::edges ? 2 * L_ * L_ : L_ * L_; }

    int wrap(int a) const { return ((a % L_) + L_) % L_; }
    // orientation 0: horizontal edge (x,y)-(x+1,y); 1: vertical edge (x,y)-(x,y+1)
    int edge(int x, int y, int o) const { return 2 * (wrap(y) * L_ + wrap(x)) + o; }
    int site(int x, int y) const { return wrap(y) * L_ + wrap(x); }
    int distance(int x1, int y1, int x2, int y2) const;

    Square canonical(Square s) const;
    std::vector<Square> squares(int r) const;
    Square grow(const Square& s, int j) const;
    // the (r+2)-square holding s and its nearest neighbours
    Square neighborhood(const Square& s) const { return grow(s, 1); }
    bool contains(const Square& outer, const Square& inner) const;
    bool contains_cell(const Square& s, int x, int y) const;
    bool overlaps(const Square& a, const Square& b) const;

    std::vector<int> qubits(const Square& s) const;
    BitVec region(const Square& s) const;
    // lexicographically first r-square whose qubits cover the support
    std::optional<Square> covering_square(const BitVec& support, int r) const;
    // smallest covering size, then lexicographically first
    std::optional<Square> smallest_covering_square(const BitVec& support) const;

private:
    int L_ = 0;
    Layout layout_ = Layout::edges;
};

struct DecayClass {
    double J = 0, mu = 1, alpha = 0;
};

// Sum of terms each supported on a declared square, keyed by (r, anchor).
class LocalDecomposition {
public:
    explicit LocalDecomposition(const Lattice* lat = nullptr) : lat_(lat) {}

    const Lattice& lattice() const { return *lat_; }
    // adds m (on lattice.qubits(s)) to the term at s
    void add(const Square& s, const Mat& m);
    // adds an operator on a subset of the square's qubits
    void add(const Square& s, const LocalOp& op);
    const std::map<Square, LocalOp>& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }
    std::size_t size() const { return terms_.size(); }
    void clear() { terms_.clear(); }

    std::optional<DecayClass> claimed;

    Mat dense() const;
    LocalOp total_on(std::span<const int> qubits) const;
    // max_r max_A ||V_{r,A}|| r^alpha e^{mu r} as a function of (mu, alpha)
    double strength(double mu, double alpha) const;
    bool satisfies(const DecayClass& c, double slack = 1e-9) const;
    LocalDecomposition scaled(double s) const;

private:
    const Lattice* lat_;
    std::map<Square, LocalOp> terms_;
};

struct Model {
    std::string name;
    Lattice lattice;
    StabilizerGroup group;
    std::vector<Square> assignment;  // one 2x2 square per generator

    int qubit_count() const { return lattice.qubit_count(); }
    // indices of generators assigned to 2x2 squares inside s
    std::vector<int> generators_in(const Square& s) const;
    std::vector<int> generators_at(const Square& a) const;
    // P_B: product of the local zero-eigenspace projectors over 2x2 squares inside B
    LocalOp local_ground_projector(const Square& B) const;
    // H0(A) = sum of G_F over 2x2 squares F inside A
    LocalOp local_hamiltonian(const Square& A) const;
    // G_A for a single 2x2 square
    LocalOp term(const Square& A) const;
    Mat h0_dense() const;
    // -sum of generators, the normalization used for the unstable toric code energies
    Mat stabilizer_hamiltonian_dense() const;
    Mat ground_projector_dense() const;
    std::vector<int> all_qubits() const;
};

Model build_toric_code(int L);
// p* is the plaquette (cell) at pstar
Model build_unstable_toric_code(int L, std::pair<int, int> pstar = {0, 0});
// generators with optional explicit squares; unassigned generators get the canonical square
Model make_model(std::string name, Lattice lat, std::vector<Pauli> gens,
                 std::vector<std::optional<Square>> squares = {});

Model parse_model(const std::string& text);
std::string format_model(const Model& m);
Model load_model_file(const std::string& path);
// "toric:<L>" or "unstable-toric:<L>"
Model builtin_model(const std::string& spec);

// Matrix-free H0 (+ V) with fixed summation order.
class Hamiltonian {
public:
    Hamiltonian(const Model& model, const LocalDecomposition* v = nullptr, double v_scale = 1.0);
    long long dim() const { return dim_; }
    void apply(const Vec& in, Vec& out) const;
    Mat dense() const;

private:
    const Model* model_;
    const LocalDecomposition* v_;
    double scale_;
    long long dim_;
};

}  // namespace tqo
