#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "tqo/errors.hpp"
#include "tqo/locality.hpp"
#include "tqo/perturbation.hpp"

using namespace tqo;

namespace {

std::vector<int> range(int n) {
    std::vector<int> a(n);
    for (int i = 0; i < n; ++i) a[i] = i;
    return a;
}

Mat op(int n, const std::string& text) { return pauli_matrix(Pauli::parse(text, n), range(n)); }

const FilterFunction& fine_filter() {
    static const FilterFunction f = build_filter(320, 32000);
    return f;
}

}  // namespace

TEST_CASE("Heisenberg evolution matches matrix exponentials") {
    std::mt19937_64 rng(1);
    Mat hc = random_gue(16, rng);
    Mat hr = mixed_field_chain(4, 1.0, 0.7, 0.3);
    Mat o = random_gue(16, rng);
    for (const Mat* h : {&hc, &hr}) {
        HeisenbergEvolution ev(*h);
        for (double t : {0.3, 1.7}) {
            Mat u = expm(*h * cplx(0, t));
            CHECK((ev.evolve(o, t) - u * o * u.adjoint()).norm() < 1e-10);
        }
    }
}

TEST_CASE("Lieb-Robinson commutator basics") {
    int n = 6;
    Mat h = mixed_field_chain(n, 1.0, 0.9, 0.4);
    Mat a = op(n, "+1 Z0"), b = op(n, "+1 X4");
    CHECK(lr_commutator_norm(h, a, b, 0) == 0);
    HeisenbergEvolution ev(h);
    double prev = 0;
    for (double t : {0.2, 0.5, 1.0, 3.0, 10.0}) {
        double v = lr_commutator_norm(ev, a, b, t);
        CHECK(v <= 2 * (1 + 1e-12));
        if (t <= 1) CHECK(v >= prev);
        prev = v;
    }
}

TEST_CASE("front velocity is finite and linear in the coupling") {
    int n = 8;
    std::vector<double> v;
    for (double K : {1.0, 1.5, 3.0}) {
        auto fit = lr_front(mixed_field_chain(n, K, 0.9, 0.4), n, 0, {1, 2, 3, 4, 5}, 8.0, 64);
        for (double t : fit.arrival) CHECK(std::isfinite(t));
        REQUIRE(std::isfinite(fit.velocity));
        CHECK(fit.velocity > 0);
        v.push_back(fit.velocity / K);
    }
    CHECK(v[1] == doctest::Approx(v[0]).epsilon(0.15));
    CHECK(v[2] == doctest::Approx(v[0]).epsilon(0.15));
}

TEST_CASE("F_mu interaction norm") {
    Lattice lat(8, Layout::sites);
    CHECK(interaction_norm_mu(lat, {}, 1.0) == 0);
    double w = 0.3, mu = 0.7;
    // cells (1,1) and (3,2) sit at distance 2 inside the 3-square at (1,1)
    double one = interaction_norm_mu(lat, {{{1, 1, 3}, w}}, mu);
    CHECK(one == doctest::Approx(w * (1 + 4) * std::exp(mu * 2)).epsilon(1e-14));

    // every square saturating a (K, mu, 6)-decaying class stays below 4K
    double K = 0.05;
    for (double m : {0.3, 1.0, 2.0}) {
        std::vector<std::pair<Square, double>> norms;
        for (int r = 1; r < lat.L(); ++r)
            for (const auto& s : lat.squares(r)) norms.push_back({s, K * std::exp(-m * r) * std::pow(r, -6.0)});
        CHECK(interaction_norm_mu(lat, norms, m) <= 4 * K);
    }
}

TEST_CASE("filter function values, oddness and smoothness") {
    const auto& f = fine_filter();
    CHECK(f.freq(1) == -1);
    CHECK(f.freq(-2) == 0.5);
    CHECK(f.freq(0) == 0);
    double worst = 0;
    for (int k = 0; k <= 4000; ++k) {
        double w = 0.5 + k * 0.01;
        worst = std::max({worst, std::abs(f.freq(w) + 1 / w), std::abs(f.freq(-w) - 1 / w)});
    }
    CHECK(worst < 1e-12);
    for (double w : {0.05, 0.2, 0.45, 0.7, 3.0}) CHECK(f.freq(-w) == -f.freq(w));
    for (double t : {0.1, 1.0, 7.0, 55.0}) CHECK(filter_time(-t) == -filter_time(t));
    CHECK(filter_time(1e-9) == doctest::Approx(0.5).epsilon(1e-6));

    // fourth differences of the mask stay bounded as the step halves
    auto d4 = [](double h) {
        double m = 0;
        for (double w = -1; w <= 1; w += h)
            m = std::max(m, std::abs(filter_mask(w + 2 * h) - 4 * filter_mask(w + h) + 6 * filter_mask(w) -
                                     4 * filter_mask(w - h) + filter_mask(w - 2 * h)) /
                                std::pow(h, 4));
        return m;
    };
    double a = d4(1e-2), b = d4(5e-3);
    CHECK(b <= 1.5 * a);

    // tail falls faster than t^-4 once the span is large
    auto tail = [](double T) {
        double m = 0;
        for (int k = 0; k <= 200; ++k) m = std::max(m, std::abs(filter_time(T / 2 + T / 2 * k / 200)));
        return m;
    };
    CHECK(tail(160) / tail(320) > 16);
    CHECK(tail(320) / tail(640) > 16);

    CHECK_THROWS_AS(build_filter(10, 1000), UsageError);
    for (double w : {0.5, 1.0, 3.0, 0.3}) CHECK(std::abs(f.freq_quadrature(w) - f.freq(w)) < 1e-6);
}

TEST_CASE("quasi-adiabatic generator against closed forms and time quadrature") {
    const auto& f = fine_filter();
    Mat h = Mat::Zero(2, 2);
    h(1, 1) = 1;
    std::mt19937_64 rng(4);
    Mat v = random_gue(2, rng);
    CHECK(quasi_adiabatic_generator(h, Mat::Zero(2, 2), f).norm() == 0);
    Mat d = quasi_adiabatic_generator(h, v, f, GeneratorMethod::quadrature, 1e-6);
    CHECK(std::abs(d(1, 0) + v(1, 0)) < 1e-6);
    CHECK(std::abs(d(0, 1) - v(0, 1)) < 1e-6);
    CHECK(std::abs(d(0, 0)) < 1e-12);
    CHECK((d + d.adjoint()).norm() < 1e-10);

    // direct time integral i int F(t) e^{iHt} V e^{-iHt} dt with exact exponentials on a 2-qubit system
    Mat H = random_gue(4, rng), V = random_gue(4, rng);
    Eigen::SelfAdjointEigenSolver<Mat> es(H);
    Mat sum = Mat::Zero(4, 4);
    double step = 0.01, T = 320;
    int m = int(T / step);
    for (int k = 1; k <= m; ++k) {
        double t = k * step, w = k == m ? 0.5 : 1.0;
        Mat up = es.eigenvectors() * (es.eigenvalues() * t).unaryExpr([](double x) { return std::polar(1.0, x); }).asDiagonal() *
                 es.eigenvectors().adjoint();
        Mat ev = up * V * up.adjoint();
        // F odd: the t and -t contributions combine into F(t) (ev - ev^dagger)
        sum += w * filter_time(t) * (ev - up.adjoint() * V * up);
    }
    Mat direct = cplx(0, 1) * sum * step;
    Mat spectral = quasi_adiabatic_generator(H, V, f);
    CHECK((direct - spectral).norm() < 1e-3 * (1 + spectral.norm()));

    auto coarse = build_filter(160, 16000);
    CHECK_THROWS_AS(quasi_adiabatic_generator(H * 30.0, V, coarse, GeneratorMethod::quadrature, 1e-9), NumericalError);
}

TEST_CASE("continuation of the toric ground band") {
    Model toric = build_toric_code(2);
    Mat H0 = toric.h0_dense();
    const auto& f = fine_filter();
    auto still = continue_projector(H0, Mat::Zero(256, 256), 4, 3, f);
    CHECK((still.U - Mat::Identity(256, 256)).norm() == 0);
    CHECK(still.max_deviation < 1e-12);

    PerturbationOptions o;
    o.J = 0.02;
    o.two_local = true;
    o.seed = 3;
    Mat V = random_perturbation(toric.lattice, o).dense();
    auto l1 = continue_projector(H0, V, 4, 40, f, Integrator::left);
    auto l2 = continue_projector(H0, V, 4, 80, f, Integrator::left);
    CHECK(l1.max_deviation / l2.max_deviation == doctest::Approx(2).epsilon(0.2));
    auto mid = continue_projector(H0, V, 4, 40, f, Integrator::midpoint);
    CHECK(mid.max_deviation < 1e-3);
    CHECK(mid.max_deviation < l2.max_deviation);
    for (int r : mid.band_ranks) CHECK(r == 4);
    CHECK(mid.unitarity < 1e-9);

    // dressed operators keep their algebra and the loop expectation
    Mat U = mid.U;
    auto q = toric.all_qubits();
    Mat zs = pauli_matrix(Pauli::single(8, 0, 'Z'), q), xs = pauli_matrix(Pauli::single(8, 0, 'X'), q);
    Mat dz = dress_operator(zs, U), dx = dress_operator(xs, U);
    CHECK((dz * dx + dx * dz).norm() < 1e-10);
    CHECK((dress_operator(zs, Mat::Identity(256, 256)) - zs).norm() == 0);
    const Pauli* loop = nullptr;
    for (const auto& g : toric.group.generators())
        if (!g.z().any()) loop = &g;
    REQUIRE(loop);
    Mat dl = dress_operator(pauli_matrix(*loop, q), U);
    Mat P1 = band_projector(H0 + V, 4);
    double expect = (P1 * dl).trace().real() / 4;
    CHECK(std::abs(expect - 1) <= 2 * mid.max_deviation + 1e-12);
}

TEST_CASE("continuation aborts when the gap closes") {
    Model toric = build_toric_code(2);
    Mat H0 = toric.h0_dense();
    Eigen::SelfAdjointEigenSolver<Mat> es(H0);
    Vec e = es.eigenvectors().col(10);
    Mat V = -3.0 * e * e.adjoint();
    CHECK_THROWS_AS(continue_projector(H0, V, 4, 20, fine_filter()), NumericalError);
}

TEST_CASE("dressed locality profile") {
    int n = 10;
    auto all = range(n);
    Mat h0 = Mat::Zero(1L << n, 1L << n), v = Mat::Zero(1L << n, 1L << n);
    for (int i = 0; i + 1 < n; ++i) {
        h0.diagonal().array() += 0.5;
        add_pauli(h0, Pauli::single(n, i, 'Z') * Pauli::single(n, i + 1, 'Z'), all, -0.5);
    }
    for (int i = 0; i < n; ++i) add_pauli(v, Pauli::single(n, i, 'X'), all, 0.1);
    Mat U = expm(quasi_adiabatic_generator(h0, v, fine_filter()));
    CHECK((U.adjoint() * U - Mat::Identity(U.rows(), U.cols())).norm() < 1e-9);

    Mat o = op(n, "+1 X4");
    std::vector<std::vector<int>> regions;
    for (int l = 0; l <= 6; ++l) regions.push_back(chain_ball(n, {4}, l));
    auto same = dressed_locality_profile(o, Mat::Identity(U.rows(), U.cols()), n, {regions[0]});
    CHECK(same[0] < 1e-14);
    auto prof = dressed_locality_profile(o, U, n, regions);
    CHECK(prof.back() < 1e-12);
    for (std::size_t l = 1; l < prof.size(); ++l) CHECK(prof[l] <= prof[l - 1] * (1 + 1e-12));
    // successive ratios grow: faster than geometric
    for (std::size_t l = 2; l + 1 < prof.size(); ++l)
        if (prof[l] > 1e-13) CHECK(prof[l] / prof[l - 1] < prof[l - 1] / std::max(prof[l - 2], 1e-300) * 1.5);
    MESSAGE("profile: " << prof[0] << " " << prof[1] << " " << prof[2] << " " << prof[3] << " " << prof[4]);
}
