#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <random>

#include "oracle.hpp"
#include "tqo/errors.hpp"
#include "tqo/lattice.hpp"

using namespace tqo;

namespace {

// H0 rebuilt from letter strings, independent of the symplectic code path
Mat oracle_h0(const Model& m) {
    int n = m.qubit_count();
    Mat h = Mat::Zero(1L << n, 1L << n);
    for (const auto& g : m.group.generators()) {
        std::string letters(n, 'I');
        for (int q = 0; q < n; ++q) letters[q] = g.letter(q);
        static const oracle::C ip[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
        h += (Mat::Identity(1L << n, 1L << n) - oracle::pauli_string(letters, ip[g.coefficient_power()])) * 0.5;
    }
    return h;
}

Eigen::VectorXd eigs(const Mat& h) {
    return Eigen::SelfAdjointEigenSolver<Mat>(h, Eigen::EigenvaluesOnly).eigenvalues();
}

Mat kernel_projector(const Mat& h) {
    Eigen::SelfAdjointEigenSolver<Mat> es(h);
    Mat p = Mat::Zero(h.rows(), h.cols());
    for (int i = 0; i < h.rows(); ++i)
        if (std::abs(es.eigenvalues()[i]) < 1e-9) p += es.eigenvectors().col(i) * es.eigenvectors().col(i).adjoint();
    return p;
}

}  // namespace

TEST_CASE("square families") {
    Lattice lat(4, Layout::edges);
    CHECK(lat.squares(2).size() == 16);
    CHECK(lat.squares(1).size() == 16);
    CHECK(lat.squares(5).empty());
    auto whole = lat.squares(4);
    REQUIRE(whole.size() == 1);
    CHECK(int(lat.qubits(whole[0]).size()) == lat.qubit_count());
    CHECK_THROWS_AS(lat.squares(0), UsageError);
}

TEST_CASE("lattice geometry") {
    Lattice lat(6, Layout::edges);
    CHECK(lat.distance(0, 0, 5, 5) == 1);
    CHECK(lat.distance(0, 0, 3, 1) == 3);
    Square a{5, 5, 1};
    Square b = lat.neighborhood(a);
    CHECK(b == Square{4, 4, 3});
    CHECK(lat.contains(b, a));
    CHECK(lat.contains(b, Square{0, 0, 1}));
    CHECK_FALSE(lat.contains(b, Square{1, 0, 1}));
    CHECK(lat.overlaps(Square{5, 5, 2}, Square{0, 0, 1}));
    CHECK_FALSE(lat.overlaps(Square{1, 1, 2}, Square{3, 3, 1}));
    // one cell holds exactly the four edges of its plaquette
    Model m = build_toric_code(6);
    CHECK(lat.region({2, 3, 1}) == m.group.generators()[lat.site(2, 3)].support());
    CHECK(lat.neighborhood({0, 0, 5}) == Square{0, 0, 6});
}

TEST_CASE("toric code at L=2") {
    Model m = build_toric_code(2);
    CHECK(m.qubit_count() == 8);
    CHECK(m.group.generators().size() == 8);
    Mat h = m.h0_dense();
    CHECK((h - oracle_h0(m)).norm() < 1e-12);
    auto ev = eigs(h);
    int zero = 0;
    for (int i = 0; i < ev.size(); ++i) {
        CHECK(std::abs(ev[i] - std::round(ev[i])) < 1e-10);
        CHECK(ev[i] > -1e-10);
        zero += std::abs(ev[i]) < 1e-10;
    }
    CHECK(zero == 4);
    double first = 1e9;
    for (int i = 0; i < ev.size(); ++i)
        if (ev[i] > 1e-8) first = std::min(first, ev[i]);
    CHECK(first == doctest::Approx(2.0));
}

TEST_CASE("plaquettes multiply to the identity") {
    for (int L : {2, 3, 4}) {
        Model m = build_toric_code(L);
        Pauli p(m.qubit_count());
        for (int k = 0; k < L * L; ++k) p *= m.group.generators()[k];
        CHECK(p.is_identity_up_to_phase());
        CHECK(p.phase() == 0);
        CHECK(m.group.rank() == 2 * L * L - 2);
    }
}

TEST_CASE("unstable toric code") {
    CHECK_THROWS_AS(build_unstable_toric_code(3), UsageError);
    Model t = build_toric_code(2), u = build_unstable_toric_code(2);
    // p* at the origin by default
    CHECK(u.group.generators().back() == t.group.generators()[0]);
    Mat pt = kernel_projector(t.h0_dense()), pu = kernel_projector(u.h0_dense());
    CHECK((pt - pu).norm() < 1e-10);
    CHECK((u.ground_projector_dense() - pu).norm() < 1e-10);
    // energies of -sum S have gap 2 above the ground space
    auto ev = eigs(u.stabilizer_hamiltonian_dense());
    double e0 = ev[0], gap = 0;
    for (int i = 0; i < ev.size(); ++i)
        if (ev[i] > e0 + 1e-8) { gap = ev[i] - e0; break; }
    CHECK(gap == doctest::Approx(2.0));
    // same group as the toric code
    CHECK(u.group.is_subgroup_of(t.group));
    CHECK(t.group.is_subgroup_of(u.group));
    Model u4 = build_unstable_toric_code(4);
    CHECK(u4.group.rank() == build_toric_code(4).group.rank());
}

TEST_CASE("moving the selected plaquette is a translation") {
    Model a = build_unstable_toric_code(2, {0, 0}), b = build_unstable_toric_code(2, {1, 1});
    CHECK((eigs(a.h0_dense()) - eigs(b.h0_dense())).norm() < 1e-9);
}

TEST_CASE("local ground projectors") {
    Model m = build_toric_code(2);
    Square whole{0, 0, 2};
    auto pa = m.local_ground_projector(whole);
    Mat k = kernel_projector(m.h0_dense());
    CHECK((pa.m - k).norm() < 1e-10);
    CHECK(std::abs(pa.m.trace().real() - 4) < 1e-10);
    for (const Square& s : {Square{0, 0, 1}, Square{1, 0, 1}, whole}) {
        auto p = m.local_ground_projector(s);
        CHECK((p.m * p.m - p.m).norm() < 1e-12);
        CHECK((p.m - p.m.adjoint()).norm() < 1e-12);
    }
    // one 2x2 square at L=4: P_A is the zero eigenspace of G_A
    Model m4 = build_toric_code(4);
    Square a{1, 2, 2};
    auto g = m4.term(a);
    auto p = m4.local_ground_projector(a);
    auto h = m4.local_hamiltonian(a);
    Mat probe = p.m * Mat::Random(p.m.rows(), 3);
    CHECK((g.m * probe).norm() < 1e-10);
    CHECK((h.m * probe).norm() < 1e-10);
    CHECK((p.m * probe - probe).norm() < 1e-10);
    // P_B sits inside P_A for A inside B (site layout keeps the 3x3 block small)
    Lattice sl(4, Layout::sites);
    std::vector<Pauli> zz;
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) {
            zz.push_back(Pauli::single(16, sl.site(x, y), 'Z') * Pauli::single(16, sl.site(x + 1, y), 'Z'));
            zz.push_back(Pauli::single(16, sl.site(x, y), 'Z') * Pauli::single(16, sl.site(x, y + 1), 'Z'));
        }
    Model ising = make_model("ising", sl, zz);
    auto pa2 = ising.local_ground_projector({1, 2, 2});
    auto pb = ising.local_ground_projector({1, 2, 3});
    Mat pa_ext = extend(pa2.m, pa2.qubits, pb.qubits);
    CHECK((pa_ext * pb.m - pb.m).norm() < 1e-10);
}

TEST_CASE("dense cap is enforced") {
    setenv("TQO_MAX_DENSE_DIM", "64", 1);
    Model m = build_toric_code(2);
    CHECK_THROWS_AS(m.h0_dense(), ResourceError);
    unsetenv("TQO_MAX_DENSE_DIM");
    CHECK_NOTHROW(m.h0_dense());
}

TEST_CASE("projector terms commute") {
    for (const Model& m : {build_toric_code(4), build_unstable_toric_code(4), build_toric_code(3)}) {
        const auto& g = m.group.generators();
        for (std::size_t a = 0; a < g.size(); ++a)
            for (std::size_t b = 0; b < a; ++b) REQUIRE(commutes(g[a], g[b]));
    }
    Model m = build_unstable_toric_code(2);
    auto q = m.all_qubits();
    for (const auto& a : m.group.generators())
        for (const auto& b : m.group.generators()) {
            Mat x = pauli_matrix(a, q), y = pauli_matrix(b, q);
            REQUIRE((x * y - y * x).norm() < 1e-12);
        }
}

TEST_CASE("matrix-free application matches the dense Hamiltonian") {
    Model m = build_unstable_toric_code(2);
    LocalDecomposition v(&m.lattice);
    std::mt19937_64 rng(4);
    v.add({0, 1, 1}, random_gue(16, rng));
    v.add({0, 0, 2}, random_gue(256, rng) * 0.01);
    Hamiltonian h(m, &v, 0.3);
    Mat d = h.dense();
    Vec x = Vec::Random(256), y;
    h.apply(x, y);
    CHECK((y - d * x).norm() < 1e-10);
    // frustration free: ground vectors are annihilated
    Hamiltonian h0(m);
    Mat p = m.ground_projector_dense();
    Vec g = p * Vec::Random(256);
    h0.apply(g, y);
    CHECK(y.norm() < 1e-10);
}

TEST_CASE("model files") {
    Model m = build_unstable_toric_code(4);
    Model back = parse_model(format_model(m));
    CHECK(back.group.generators() == m.group.generators());
    CHECK(back.assignment == m.assignment);
    std::string text = "lattice L=2 layout=sites\n# chain\n+1 Z0 Z1\n+1 Z1 Z3 @square (0,0,2)\n";
    Model s = parse_model(text);
    CHECK(s.qubit_count() == 4);
    CHECK(s.assignment[1] == Square{0, 0, 2});
    CHECK_THROWS_AS(parse_model("lattice L=2\n+1 Z0"), UsageError);
    CHECK_THROWS_AS(parse_model("lattice L=3 layout=sites\n+1 Z0 Z4 Z8\n"), UsageError);
    CHECK_THROWS_AS(parse_model("lattice L=2 layout=sites\n+1 Z0\n+1 X0\n"), UsageError);
    CHECK(builtin_model("toric:3").qubit_count() == 18);
    CHECK_THROWS_AS(builtin_model("torus:3"), UsageError);
}

TEST_CASE("decay class predicate") {
    Model m = build_toric_code(4);
    LocalDecomposition v(&m.lattice);
    v.add({0, 0, 1}, Mat::Identity(16, 16) * 0.5);
    CHECK(v.strength(1.0, 0.0) == doctest::Approx(0.5 * std::exp(1.0)));
    CHECK(v.satisfies({0.5 * std::exp(1.0), 1.0, 0.0}));
    CHECK_FALSE(v.satisfies({0.5, 1.0, 0.0}));
}
