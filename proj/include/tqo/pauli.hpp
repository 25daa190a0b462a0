#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tqo/bits.hpp"

namespace tqo {

// i^phase X^x Z^z on n qubits, phase in Z_4.
class Pauli {
public:
    Pauli() = default;
    explicit Pauli(int n) : x_(n), z_(n) {}
    Pauli(BitVec x, BitVec z, int phase);

    static Pauli single(int n, int qubit, char letter);
    // "+1 X3 Z7"; the coefficient multiplies the written tensor product (Y letters allowed)
    static Pauli parse(std::string_view text, int n);
    std::string str() const;

    int size() const { return x_.size(); }
    const BitVec& x() const { return x_; }
    const BitVec& z() const { return z_; }
    int phase() const { return phase_; }
    // power k of i in front of the written letters, i.e. the printed coefficient
    int coefficient_power() const;

    bool hermitian() const { return (phase_ & 1) == int(x_.dot(z_)); }
    bool is_identity_up_to_phase() const { return !x_.any() && !z_.any(); }
    BitVec support() const { return x_ | z_; }
    int weight() const { return support().count(); }
    char letter(int q) const;

    Pauli& operator*=(const Pauli& o);
    friend Pauli operator*(Pauli a, const Pauli& b) { return a *= b; }
    bool operator==(const Pauli&) const = default;
    bool equal_up_to_phase(const Pauli& o) const { return x_ == o.x_ && z_ == o.z_; }
    Pauli negated() const { Pauli p = *this; p.phase_ = (p.phase_ + 2) & 3; return p; }

private:
    BitVec x_, z_;
    int phase_ = 0;
};

Pauli multiply(const Pauli& p, const Pauli& q);
bool commutes(const Pauli& p, const Pauli& q);

// Abelian group generated by commuting Hermitian Paulis, never containing -I.
class StabilizerGroup {
public:
    StabilizerGroup() = default;
    StabilizerGroup(int n, std::vector<Pauli> generators);

    int qubit_count() const { return n_; }
    const std::vector<Pauli>& generators() const { return gens_; }
    int rank() const { return int(basis_.size()); }

    bool contains(const Pauli& p) const;
    bool contains_up_to_phase(const Pauli& p) const;
    bool is_subgroup_of(const StabilizerGroup& g) const;
    // Reduces p against the echelon basis; the remainder is identity iff p is in the group up to phase.
    Pauli reduce(Pauli p) const;

    // all group elements supported inside region
    StabilizerGroup supported_subgroup(const BitVec& region) const;
    // subgroup generated by the declared generators supported inside region
    StabilizerGroup generated_subgroup(const BitVec& region) const;

    // Smallest weight of an operator commuting with every generator but outside the group
    // (phases ignored). Empty when none exists with weight <= cutoff.
    std::optional<int> minimum_distance(int weight_cutoff, Pauli* witness = nullptr) const;

private:
    void insert(Pauli p);
    int n_ = 0;
    std::vector<Pauli> gens_;
    std::vector<Pauli> basis_;
    std::vector<int> pivot_;
};

}  // namespace tqo
