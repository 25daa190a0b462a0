#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "oracle.hpp"
#include "tqo/errors.hpp"
#include "tqo/dense.hpp"
#include "tqo/lattice.hpp"
#include "tqo/pauli.hpp"

using namespace tqo;

namespace {

std::vector<int> range(int n) {
    std::vector<int> v(n);
    for (int i = 0; i < n; ++i) v[i] = i;
    return v;
}

oracle::LPauli to_letters(const Pauli& p) {
    oracle::LPauli l{std::string(p.size(), 'I'), 1};
    for (int q = 0; q < p.size(); ++q) l.letters[q] = p.letter(q);
    static const oracle::C ip[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    l.coeff = ip[p.coefficient_power()];
    return l;
}

Pauli from_index(int n, int idx, int phase) {
    Pauli p(n);
    static const char L[4] = {'I', 'X', 'Y', 'Z'};
    for (int q = 0; q < n; ++q, idx /= 4) p *= Pauli::single(n, q, L[idx % 4]);
    Pauli ph{BitVec(n), BitVec(n), phase};
    return p * ph;
}

Pauli random_pauli(int n, std::mt19937& rng) {
    return from_index(n, int(rng() % (1u << (2 * n))), int(rng() % 4));
}

}  // namespace

TEST_CASE("product of X with itself is the identity") {
    Pauli x = Pauli::single(2, 0, 'X');
    Pauli p = x * x;
    CHECK(p.is_identity_up_to_phase());
    CHECK(p.phase() == 0);
}

TEST_CASE("X times Z matches the 2x2 matrix product") {
    Pauli p = Pauli::single(1, 0, 'X') * Pauli::single(1, 0, 'Z');
    CHECK(p.x().get(0));
    CHECK(p.z().get(0));
    std::vector<int> q{0};
    Mat expect = oracle::sigma('X') * oracle::sigma('Z');
    CHECK((pauli_matrix(p, q) - expect).norm() < 1e-14);
    CHECK(p.str() == "-i Y0");
}

TEST_CASE("multiplying by the identity changes nothing") {
    std::mt19937 rng(3);
    for (int t = 0; t < 20; ++t) {
        Pauli p = random_pauli(4, rng);
        CHECK(p * Pauli(4) == p);
    }
}

TEST_CASE("qubit count mismatch is rejected") {
    CHECK_THROWS_AS(Pauli(2) * Pauli(3), UsageError);
    CHECK_THROWS_AS(commutes(Pauli(2), Pauli(3)), UsageError);
}

TEST_CASE("products are phase exact against dense matrices on three qubits") {
    auto q = range(3);
    for (int a = 0; a < 64; ++a)
        for (int b = 0; b < 64; ++b) {
            Pauli p = from_index(3, a, a % 4), r = from_index(3, b, (b / 3) % 4);
            Mat lhs = pauli_matrix(p * r, q);
            Mat rhs = pauli_matrix(p, q) * pauli_matrix(r, q);
            REQUIRE((lhs - rhs).norm() < 1e-12);
            // the letter oracle agrees as well
            REQUIRE(oracle::lsame(to_letters(p * r), oracle::lmul(to_letters(p), to_letters(r))));
            REQUIRE((pauli_matrix(p, q) - oracle::pauli_string(to_letters(p).letters, to_letters(p).coeff)).norm() < 1e-12);
        }
}

TEST_CASE("multiplication is associative") {
    std::mt19937 rng(11);
    for (int t = 0; t < 2000; ++t) {
        Pauli a = random_pauli(3, rng), b = random_pauli(3, rng), c = random_pauli(3, rng);
        REQUIRE((a * b) * c == a * (b * c));
    }
}

TEST_CASE("commutation agrees with dense commutators") {
    std::mt19937 rng(5);
    for (int t = 0; t < 300; ++t) {
        int n = 1 + int(rng() % 6);
        Pauli a = random_pauli(n, rng), b = random_pauli(n, rng);
        auto q = range(n);
        Mat ma = pauli_matrix(a, q), mb = pauli_matrix(b, q);
        REQUIRE(commutes(a, b) == ((ma * mb - mb * ma).norm() < 1e-12));
    }
    CHECK(commutes(Pauli::single(1, 0, 'X'), Pauli::single(1, 0, 'X')));
    CHECK_FALSE(commutes(Pauli::single(1, 0, 'X'), Pauli::single(1, 0, 'Z')));
}

TEST_CASE("hermiticity predicate matches the dense image") {
    std::mt19937 rng(8);
    for (int t = 0; t < 200; ++t) {
        Pauli a = random_pauli(3, rng);
        Mat m = pauli_matrix(a, range(3));
        CHECK(a.hermitian() == ((m - m.adjoint()).norm() < 1e-12));
    }
}

TEST_CASE("text format round trip") {
    Pauli p = Pauli::parse("+1 X3 Z7", 8);
    CHECK(p.str() == "+1 X3 Z7");
    Pauli y = Pauli::parse("-i Y0 X2", 3);
    CHECK(Pauli::parse(y.str(), 3) == y);
    CHECK_THROWS_AS(Pauli::parse("+1 Q3", 4), UsageError);
    CHECK_THROWS_AS(Pauli::parse("+1 X9", 4), UsageError);
    CHECK_THROWS_AS(Pauli::parse("+1 X1 Z1", 4), UsageError);
}

TEST_CASE("plaquette and star commute on the L=2 torus") {
    Model m = build_toric_code(2);
    auto q = m.all_qubits();
    const auto& g = m.group.generators();
    for (int p = 0; p < 4; ++p)
        for (int s = 4; s < 8; ++s) {
            CHECK(commutes(g[p], g[s]));
            Mat a = pauli_matrix(g[p], q), b = pauli_matrix(g[s], q);
            CHECK((a * b - b * a).norm() < 1e-12);
        }
}

TEST_CASE("membership") {
    Model m = build_toric_code(2);
    int n = m.qubit_count();
    CHECK(m.group.contains(Pauli(n)));
    CHECK(m.group.contains(m.group.generators()[0]));
    CHECK_FALSE(m.group.contains(m.group.generators()[0].negated()));
    CHECK(m.group.contains_up_to_phase(m.group.generators()[0].negated()));

    // exhaustive enumeration of the 2^8 generator products
    std::vector<oracle::LPauli> gens;
    for (const auto& g : m.group.generators()) gens.push_back(to_letters(g));
    auto all = oracle::enumerate_group(gens);
    for (int q = 0; q < n; ++q) {
        Pauli z = Pauli::single(n, q, 'Z');
        bool in_oracle = false;
        for (const auto& e : all) in_oracle |= oracle::lsame(e, to_letters(z));
        CHECK_FALSE(in_oracle);
        CHECK_FALSE(m.group.contains(z));
    }
    // every enumerated element is a member, with its phase
    for (const auto& e : all) {
        std::string txt = "+1";
        for (int q = 0; q < n; ++q)
            if (e.letters[q] != 'I') txt += " " + std::string(1, e.letters[q]) + std::to_string(q);
        Pauli p = Pauli::parse(txt, n);
        if (std::abs(e.coeff - oracle::C(-1)) < 1e-12) p = p.negated();
        CHECK(m.group.contains(p));
    }
}

TEST_CASE("groups containing -I are rejected") {
    Pauli z = Pauli::single(1, 0, 'Z');
    CHECK_THROWS_AS(StabilizerGroup(1, {z, z.negated()}), UsageError);
    CHECK_THROWS_AS(StabilizerGroup(1, {z, Pauli::single(1, 0, 'X')}), UsageError);
}

TEST_CASE("supported subgroup edge cases") {
    Model m = build_toric_code(4);
    int n = m.qubit_count();
    BitVec all(n), none(n);
    for (int q = 0; q < n; ++q) all.set(q);
    auto full = m.group.supported_subgroup(all);
    CHECK(full.is_subgroup_of(m.group));
    CHECK(m.group.is_subgroup_of(full));
    CHECK(m.group.supported_subgroup(none).rank() == 0);
    CHECK(m.group.generated_subgroup(none).rank() == 0);
    CHECK(m.group.generated_subgroup(all).rank() == m.group.rank());
}

TEST_CASE("subgroup of a single plaquette region is generated by that plaquette") {
    // L=2 analog checked by exhaustive enumeration
    Model m2 = build_toric_code(2);
    BitVec reg = m2.group.generators()[0].support();
    auto sub = m2.group.supported_subgroup(reg);
    std::vector<oracle::LPauli> gens;
    for (const auto& g : m2.group.generators()) gens.push_back(to_letters(g));
    int count = 0;
    for (const auto& e : oracle::enumerate_group(gens)) {
        bool inside = true;
        for (int q = 0; q < m2.qubit_count(); ++q)
            if (e.letters[q] != 'I' && !reg.get(q)) inside = false;
        count += inside;
    }
    // 2^8 products double count each element (two dependencies), so divide by 4
    CHECK(count / 4 == (1 << sub.rank()));
    CHECK(sub.rank() == 1);

    Model m = build_toric_code(4);
    auto s4 = m.group.supported_subgroup(m.group.generators()[5].support());
    CHECK(s4.rank() == 1);
    CHECK(s4.contains(m.group.generators()[5]));
}

TEST_CASE("generated subgroup sits inside the supported subgroup") {
    std::mt19937 rng(17);
    for (const Model& m : {build_toric_code(4), build_unstable_toric_code(4)}) {
        for (int t = 0; t < 30; ++t) {
            Square s{int(rng() % 4), int(rng() % 4), 1 + int(rng() % 3)};
            BitVec reg = m.lattice.region(s);
            auto sup = m.group.supported_subgroup(reg);
            auto gen = m.group.generated_subgroup(reg);
            CHECK(gen.is_subgroup_of(sup));
            CHECK(sup.is_subgroup_of(m.group));
            for (const auto& g : sup.generators()) CHECK((g.support() & reg) == g.support());
        }
    }
    // 2x2 block: both constructions agree for the toric code
    Model m = build_toric_code(4);
    BitVec reg = m.lattice.region({1, 1, 2});
    CHECK(m.group.supported_subgroup(reg).is_subgroup_of(m.group.generated_subgroup(reg)));
}

TEST_CASE("minimum distance") {
    CHECK_THROWS_AS(build_toric_code(2).group.minimum_distance(0), UsageError);
    // product state stabilized by single Z's: nothing commutes except Z's, which are in the group
    std::vector<Pauli> zs;
    for (int q = 0; q < 3; ++q) zs.push_back(Pauli::single(3, q, 'Z'));
    CHECK_FALSE(StabilizerGroup(3, zs).minimum_distance(3).has_value());
    // drop one Z: a single-qubit logical appears
    zs.pop_back();
    CHECK(StabilizerGroup(3, zs).minimum_distance(3) == 1);
    // toric code: the exhaustive value is L, not L-1
    CHECK(build_toric_code(2).group.minimum_distance(4) == 2);
    Pauli w;
    CHECK(build_toric_code(3).group.minimum_distance(4, &w) == 3);
    CHECK(w.weight() == 3);
    CHECK_FALSE(build_toric_code(3).group.minimum_distance(2).has_value());
}
