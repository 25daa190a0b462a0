#include "tqo/pauli.hpp"

#include <array>
#include <sstream>

#include "tqo/errors.hpp"

namespace tqo {

namespace {

void check_size(const Pauli& p, const Pauli& q) {
    if (p.size() != q.size())
        throw UsageError("qubit count mismatch: " + std::to_string(p.size()) + " vs " +
                         std::to_string(q.size()));
}

bool pivot_bit(const Pauli& p, int pos) {
    int n = p.size();
    return pos < n ? p.x().get(pos) : p.z().get(pos - n);
}

int first_bit(const Pauli& p) {
    int f = p.x().first();
    if (f >= 0) return f;
    f = p.z().first();
    return f >= 0 ? f + p.size() : -1;
}

}  // namespace

Pauli::Pauli(BitVec x, BitVec z, int phase) : x_(std::move(x)), z_(std::move(z)), phase_(phase & 3) {
    if (x_.size() != z_.size()) throw UsageError("x and z parts differ in length");
}

Pauli Pauli::single(int n, int qubit, char letter) {
    if (qubit < 0 || qubit >= n) throw UsageError("qubit " + std::to_string(qubit) + " out of range");
    Pauli p(n);
    switch (letter) {
        case 'I': break;
        case 'X': p.x_.set(qubit); break;
        case 'Z': p.z_.set(qubit); break;
        case 'Y': p.x_.set(qubit); p.z_.set(qubit); p.phase_ = 1; break;  // Y = iXZ
        default: throw UsageError(std::string("bad Pauli letter '") + letter + "'");
    }
    return p;
}

Pauli Pauli::parse(std::string_view text, int n) {
    std::istringstream in{std::string(text)};
    std::string tok;
    Pauli p(n);
    int coeff = 0;
    bool first = true;
    while (in >> tok) {
        if (first) {
            first = false;
            if (tok == "+1" || tok == "1" || tok == "+") { coeff = 0; continue; }
            if (tok == "-1" || tok == "-") { coeff = 2; continue; }
            if (tok == "+i" || tok == "i") { coeff = 1; continue; }
            if (tok == "-i") { coeff = 3; continue; }
        }
        if (tok.size() < 2) throw UsageError("bad Pauli token '" + tok + "'");
        int q;
        try {
            std::size_t used = 0;
            q = std::stoi(tok.substr(1), &used);
            if (used + 1 != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw UsageError("bad Pauli token '" + tok + "'");
        }
        if (q >= 0 && q < n && (p.x_.get(q) || p.z_.get(q)))
            throw UsageError("qubit " + std::to_string(q) + " repeated");
        p *= single(n, q, tok[0]);
    }
    p.phase_ = (p.phase_ + coeff) & 3;
    return p;
}

int Pauli::coefficient_power() const {
    return (phase_ - x_.overlap(z_)) & 3;
}

char Pauli::letter(int q) const {
    bool x = x_.get(q), z = z_.get(q);
    return x ? (z ? 'Y' : 'X') : (z ? 'Z' : 'I');
}

std::string Pauli::str() const {
    static const char* coeff[] = {"+1", "+i", "-1", "-i"};
    std::string s = coeff[coefficient_power()];
    for (int q = 0; q < size(); ++q) {
        char c = letter(q);
        if (c != 'I') s += " " + std::string(1, c) + std::to_string(q);
    }
    return s;
}

Pauli& Pauli::operator*=(const Pauli& o) {
    check_size(*this, o);
    // Z^a X^b = (-1)^{a.b} X^b Z^a
    phase_ = (phase_ + o.phase_ + 2 * (z_.overlap(o.x_) & 1)) & 3;
    x_ ^= o.x_;
    z_ ^= o.z_;
    return *this;
}

Pauli multiply(const Pauli& p, const Pauli& q) { return p * q; }

bool commutes(const Pauli& p, const Pauli& q) {
    check_size(p, q);
    return p.x().dot(q.z()) == p.z().dot(q.x());
}

StabilizerGroup::StabilizerGroup(int n, std::vector<Pauli> generators) : n_(n), gens_(std::move(generators)) {
    for (std::size_t a = 0; a < gens_.size(); ++a) {
        if (gens_[a].size() != n) throw UsageError("generator on wrong qubit count");
        if (!gens_[a].hermitian()) throw UsageError("generator " + gens_[a].str() + " is not Hermitian");
        for (std::size_t b = 0; b < a; ++b)
            if (!commutes(gens_[a], gens_[b]))
                throw UsageError("generators " + gens_[b].str() + " and " + gens_[a].str() + " anticommute");
    }
    for (const auto& g : gens_) insert(g);
}

Pauli StabilizerGroup::reduce(Pauli p) const {
    for (std::size_t k = 0; k < basis_.size(); ++k)
        if (pivot_bit(p, pivot_[k])) p *= basis_[k];
    return p;
}

void StabilizerGroup::insert(Pauli p) {
    p = reduce(std::move(p));
    int f = first_bit(p);
    if (f < 0) {
        if (p.phase() != 0) throw UsageError("generators produce -I");
        return;
    }
    basis_.push_back(std::move(p));
    pivot_.push_back(f);
}

bool StabilizerGroup::contains(const Pauli& p) const {
    if (p.size() != n_) throw UsageError("qubit count mismatch");
    Pauli r = reduce(p);
    return r.is_identity_up_to_phase() && r.phase() == 0;
}

bool StabilizerGroup::contains_up_to_phase(const Pauli& p) const {
    if (p.size() != n_) throw UsageError("qubit count mismatch");
    return reduce(p).is_identity_up_to_phase();
}

bool StabilizerGroup::is_subgroup_of(const StabilizerGroup& g) const {
    for (const auto& b : basis_)
        if (!g.contains(b)) return false;
    return true;
}

StabilizerGroup StabilizerGroup::supported_subgroup(const BitVec& region) const {
    // Left kernel of generator exponents -> (x,z) restricted to the complement of region,
    // tracking the actual products so phases stay exact.
    struct Row { BitVec out; Pauli prod; };
    BitVec mask(n_);
    for (int q = 0; q < n_; ++q) mask.set(q, !region.get(q));
    std::vector<Row> pivots;
    std::vector<int> pos;
    std::vector<Pauli> kernel;
    for (const auto& g : basis_) {
        // outside part packed as [x|z] over 2n bits
        BitVec out(2 * n_);
        for (int q = 0; q < n_; ++q)
            if (mask.get(q)) { out.set(q, g.x().get(q)); out.set(n_ + q, g.z().get(q)); }
        Row r{std::move(out), g};
        for (std::size_t k = 0; k < pivots.size(); ++k)
            if (r.out.get(pos[k])) { r.out ^= pivots[k].out; r.prod *= pivots[k].prod; }
        int f = r.out.first();
        if (f < 0) kernel.push_back(std::move(r.prod));
        else { pos.push_back(f); pivots.push_back(std::move(r)); }
    }
    return StabilizerGroup(n_, std::move(kernel));
}

StabilizerGroup StabilizerGroup::generated_subgroup(const BitVec& region) const {
    std::vector<Pauli> sub;
    for (const auto& g : gens_) {
        BitVec s = g.support();
        if ((s & region) == s) sub.push_back(g);
    }
    return StabilizerGroup(n_, std::move(sub));
}

std::optional<int> StabilizerGroup::minimum_distance(int weight_cutoff, Pauli* witness) const {
    if (weight_cutoff < 1) throw UsageError("weight cutoff must be >= 1");
    int m = int(gens_.size());
    // syndrome of each single-qubit Pauli: which generators it anticommutes with
    std::vector<std::array<BitVec, 3>> syn(n_);
    static const char letters[3] = {'X', 'Y', 'Z'};
    for (int q = 0; q < n_; ++q)
        for (int l = 0; l < 3; ++l) {
            Pauli s = Pauli::single(n_, q, letters[l]);
            BitVec b(m);
            for (int a = 0; a < m; ++a) b.set(a, !commutes(s, gens_[a]));
            syn[q][l] = std::move(b);
        }
    std::vector<int> qs, ls;
    bool found = false;
    // depth-first over increasing qubit subsets of exact weight w
    auto search = [&](auto&& self, int w, int start, const BitVec& acc) -> void {
        if (found) return;
        if (int(qs.size()) == w) {
            if (acc.any()) return;
            Pauli p(n_);
            for (int k = 0; k < w; ++k) p *= Pauli::single(n_, qs[k], letters[ls[k]]);
            if (!contains_up_to_phase(p)) {
                found = true;
                if (witness) *witness = p;
            }
            return;
        }
        int left = w - int(qs.size());
        for (int q = start; q <= n_ - left && !found; ++q)
            for (int l = 0; l < 3 && !found; ++l) {
                qs.push_back(q); ls.push_back(l);
                self(self, w, q + 1, acc ^ syn[q][l]);
                qs.pop_back(); ls.pop_back();
            }
    };
    for (int w = 1; w <= std::min(weight_cutoff, n_); ++w) {
        search(search, w, 0, BitVec(m));
        if (found) return w;
    }
    return std::nullopt;
}

}  // namespace tqo
