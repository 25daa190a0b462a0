#include "tqo/locality.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "tqo/errors.hpp"

namespace tqo {

namespace {

std::vector<int> range(int n) {
    std::vector<int> all(n);
    for (int q = 0; q < n; ++q) all[q] = q;
    return all;
}

// nodes and weights of n-point Gauss-Legendre on [-1, 1]
std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
    std::vector<double> x(n), w(n);
    for (int i = 0; i < n; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5)), dp = 0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1, p1 = 0;
            for (int k = 1; k <= n; ++k) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2 * k - 1) * z * p1 - (k - 1) * p2) / k;
            }
            dp = n * (z * p0 - p1) / (z * z - 1);
            double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        x[i] = z;
        w[i] = 2 / ((1 - z * z) * dp * dp);
    }
    return {x, w};
}

}  // namespace

Mat mixed_field_chain(int n, double K, double hx, double hz) {
    if (n < 2) throw UsageError("chain needs at least two qubits");
    auto all = range(n);
    long d = 1L << n;
    require_dense(d, "chain Hamiltonian");
    Mat h = Mat::Zero(d, d);
    for (int i = 0; i < n; ++i) {
        if (i + 1 < n) add_pauli(h, Pauli::single(n, i, 'Z') * Pauli::single(n, i + 1, 'Z'), all, K);
        add_pauli(h, Pauli::single(n, i, 'X'), all, K * hx);
        add_pauli(h, Pauli::single(n, i, 'Z'), all, K * hz);
    }
    return h;
}

std::vector<int> chain_ball(int n, const std::vector<int>& core, int l) {
    std::vector<int> out;
    for (int q = 0; q < n; ++q)
        for (int c : core)
            if (std::abs(q - c) <= l) {
                out.push_back(q);
                break;
            }
    return out;
}

HeisenbergEvolution::HeisenbergEvolution(const Mat& H) {
    require_dense(H.rows(), "Heisenberg evolution");
    real_ = H.imag().isZero(0);
    if (real_) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H.real());
        energies_ = es.eigenvalues();
        ur_ = es.eigenvectors();
    } else {
        Eigen::SelfAdjointEigenSolver<Mat> es(H);
        energies_ = es.eigenvalues();
        uc_ = es.eigenvectors();
    }
}

Mat HeisenbergEvolution::evolve(const Mat& O, double t) const {
    long d = dim();
    if (real_) {
        Eigen::MatrixXd a = ur_.transpose() * O.real() * ur_, b = ur_.transpose() * O.imag() * ur_;
        Eigen::MatrixXd re(d, d), im(d, d);
        for (long c = 0; c < d; ++c)
            for (long r = 0; r < d; ++r) {
                double ph = (energies_[r] - energies_[c]) * t, cs = std::cos(ph), sn = std::sin(ph);
                re(r, c) = cs * a(r, c) - sn * b(r, c);
                im(r, c) = sn * a(r, c) + cs * b(r, c);
            }
        Mat out(d, d);
        out.real() = ur_ * re * ur_.transpose();
        out.imag() = ur_ * im * ur_.transpose();
        return out;
    }
    Mat a = uc_.adjoint() * O * uc_;
    for (long c = 0; c < d; ++c)
        for (long r = 0; r < d; ++r) a(r, c) *= std::polar(1.0, (energies_[r] - energies_[c]) * t);
    return uc_ * a * uc_.adjoint();
}

double lr_commutator_norm(const HeisenbergEvolution& ev, const Mat& OA, const Mat& OB, double t) {
    Mat a = t == 0 ? OA : ev.evolve(OA, t);
    return opnorm(a * OB - OB * a);
}

double lr_commutator_norm(const Mat& H, const Mat& OA, const Mat& OB, double t) {
    if (t == 0) return opnorm(OA * OB - OB * OA);
    return lr_commutator_norm(HeisenbergEvolution(H), OA, OB, t);
}

namespace {

// ||[A, Z_q]|| = 2 ||A restricted to rows with bit q clear and columns with bit q set||
double z_commutator_norm(const Mat& A, int q) {
    long d = A.rows(), h = d / 2;
    std::vector<long> lo, hi;
    for (long i = 0; i < d; ++i) ((i >> q) & 1 ? hi : lo).push_back(i);
    Mat b(h, h);
    for (long c = 0; c < h; ++c)
        for (long r = 0; r < h; ++r) b(r, c) = A(lo[r], hi[c]);
    Eigen::SelfAdjointEigenSolver<Mat> es(b.adjoint() * b, Eigen::EigenvaluesOnly);
    return 2 * std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

}  // namespace

FrontFit lr_front(const Mat& H, int n, int source, const std::vector<int>& distances, double t_max, int t_steps,
                  double threshold) {
    if (t_steps < 2 || t_max <= 0) throw UsageError("front scan needs t_max > 0 and at least two steps");
    for (int d : distances)
        if (d < 1 || source + d >= n) throw UsageError("distance " + std::to_string(d) + " leaves the chain");
    HeisenbergEvolution ev(H);
    Mat z = pauli_matrix(Pauli::single(n, source, 'Z'), range(n));
    FrontFit fit;
    fit.distances = distances;
    fit.arrival.assign(distances.size(), NAN);
    std::vector<double> prev(distances.size(), 0.0);
    double tp = 0;
    for (int k = 1; k <= t_steps; ++k) {
        double t = t_max * k / t_steps;
        bool pending = false;
        for (double a : fit.arrival) pending = pending || std::isnan(a);
        if (!pending) break;
        Mat a = ev.evolve(z, t);
        for (std::size_t i = 0; i < distances.size(); ++i) {
            if (!std::isnan(fit.arrival[i])) continue;
            double v = z_commutator_norm(a, source + distances[i]);
            if (v >= threshold) {
                double frac = prev[i] > 0 ? (std::log(threshold) - std::log(prev[i])) / (std::log(v) - std::log(prev[i]))
                                          : (threshold - prev[i]) / (v - prev[i]);
                fit.arrival[i] = tp + (t - tp) * frac;
            }
            prev[i] = v;
        }
        tp = t;
    }
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < distances.size(); ++i)
        if (!std::isnan(fit.arrival[i])) {
            xs.push_back(distances[i]);
            ys.push_back(fit.arrival[i]);
        }
    if (xs.size() >= 2) {
        double mx = 0, my = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            mx += xs[i];
            my += ys[i];
        }
        mx /= double(xs.size());
        my /= double(xs.size());
        double sxy = 0, sxx = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            sxy += (xs[i] - mx) * (ys[i] - my);
            sxx += (xs[i] - mx) * (xs[i] - mx);
        }
        double slope = sxy / sxx;
        fit.intercept = my - slope * mx;
        fit.velocity = slope > 0 ? 1 / slope : INFINITY;
    }
    return fit;
}

double f_mu(double mu, double x) { return std::exp(-mu * x) / (1 + x * x); }

double interaction_norm_mu(const Lattice& lat, const std::vector<std::pair<Square, double>>& norms, double mu) {
    int L = lat.L();
    std::map<std::pair<int, int>, double> sums;  // keyed by cell indices
    for (const auto& [sq, w] : norms) {
        Square s = lat.canonical(sq);
        std::vector<int> cells;
        for (int i = 0; i < s.r; ++i)
            for (int j = 0; j < s.r; ++j) cells.push_back(lat.wrap(s.y + j) * L + lat.wrap(s.x + i));
        for (int u : cells)
            for (int v : cells) sums[{u, v}] += w;
    }
    double best = 0;
    for (const auto& [uv, s] : sums) {
        int u = uv.first, v = uv.second;
        double d = lat.distance(u % L, u / L, v % L, v / L);
        best = std::max(best, s / f_mu(mu, d));
    }
    return best;
}

double interaction_norm_mu(const LocalDecomposition& dec, double mu) {
    std::vector<std::pair<Square, double>> norms;
    for (const auto& [s, op] : dec.terms()) norms.emplace_back(s, opnorm(op.m));
    return interaction_norm_mu(dec.lattice(), norms, mu);
}

double filter_mask(double w) {
    double a = 2 * std::abs(w);
    if (a >= 1) return 1;
    if (a <= 0) return 0;
    double f = std::exp(-1 / a), g = std::exp(-1 / (1 - a));
    return f / (f + g);
}

double FilterFunction::freq(double w) const { return w == 0 ? 0 : -filter_mask(w) / w; }

double filter_time(double t) {
    if (t == 0) return 0;
    // F(t) = sign(t)/2 - (1/pi) int_0^{1/2} (1 - m(w)) sin(w t) / w dw
    static const auto gl = gauss_legendre(16);
    int panels = 16 + int(std::ceil(std::abs(t) / 4));
    double h = 0.5 / panels, s = 0;
    for (int p = 0; p < panels; ++p)
        for (std::size_t k = 0; k < gl.first.size(); ++k) {
            double w = h * (p + 0.5 * (gl.first[k] + 1));
            s += 0.5 * h * gl.second[k] * (1 - filter_mask(w)) * std::sin(w * t) / w;
        }
    return (t > 0 ? 0.5 : -0.5) - s / std::numbers::pi;
}

double FilterFunction::freq_quadrature(double w) const {
    // F(0+) = 1/2, but sin(0) = 0 so the endpoint does not contribute
    double h = T / resolution, s = 0;
    for (int k = 1; k <= resolution; ++k) {
        double c = k == resolution ? 1 : (k % 2 ? 4 : 2);
        s += c * F[k] * std::sin(w * t[k]);
    }
    return -2 * s * h / 3;
}

FilterFunction build_filter(double span_T, int resolution, double tol) {
    if (!(span_T > 0) || resolution < 2) throw UsageError("filter needs a positive span and resolution >= 2");
    FilterFunction f;
    f.T = span_T;
    f.resolution = resolution + resolution % 2;
    f.t.resize(f.resolution + 1);
    f.F.resize(f.resolution + 1);
    for (int k = 0; k <= f.resolution; ++k) {
        f.t[k] = span_T * k / f.resolution;
        f.F[k] = filter_time(f.t[k]);
    }
    for (double w : {0.5, 1.0, 2.0}) {
        double err = std::abs(f.freq_quadrature(w) - f.freq(w));
        if (err > tol)
            throw UsageError("filter grid too coarse: quadrature error " + std::to_string(err) + " at w = " +
                             std::to_string(w));
    }
    return f;
}

namespace {

Mat generator_from(const Eigen::SelfAdjointEigenSolver<Mat>& es, const Mat& V, const FilterFunction& F,
                   GeneratorMethod method, double tol) {
    const Mat& u = es.eigenvectors();
    const RVec& e = es.eigenvalues();
    Mat v = u.adjoint() * V * u;
    std::map<long long, double> cache;
    long d = v.rows();
    for (long c = 0; c < d; ++c)
        for (long r = 0; r < d; ++r) {
            double w = e[r] - e[c], f = F.freq(w);
            if (method == GeneratorMethod::quadrature) {
                long long key = std::llround(w * 1e10);
                auto it = cache.find(key);
                if (it == cache.end()) {
                    double q = F.freq_quadrature(w);
                    if (std::abs(q - f) > tol)
                        throw NumericalError("quadrature error " + std::to_string(std::abs(q - f)) +
                                             " at frequency " + std::to_string(w) + "; refine the time grid");
                    it = cache.emplace(key, q).first;
                }
                f = it->second;
            }
            v(r, c) *= f;
        }
    return u * v * u.adjoint();
}

}  // namespace

Mat quasi_adiabatic_generator(const Mat& H, const Mat& V, const FilterFunction& F, GeneratorMethod method,
                              double quad_tol) {
    require_dense(H.rows(), "quasi-adiabatic generator");
    Eigen::SelfAdjointEigenSolver<Mat> es(H);
    Mat d = generator_from(es, V, F, method, quad_tol);
    if ((d + d.adjoint()).norm() > 1e-10 * (1 + d.norm())) throw NumericalError("generator is not anti-Hermitian");
    return d;
}

Mat band_projector(const Mat& H, int band, double* gap) {
    Eigen::SelfAdjointEigenSolver<Mat> es(H);
    const Mat& u = es.eigenvectors();
    Mat v = u.leftCols(band);
    if (gap) *gap = band < H.rows() ? es.eigenvalues()[band] - es.eigenvalues()[band - 1] : INFINITY;
    return v * v.adjoint();
}

ContinuationResult continue_projector(const Mat& H0, const Mat& V, int band, int steps, const FilterFunction& F,
                                      Integrator integ, double min_gap) {
    if (steps < 1) throw UsageError("continuation needs at least one step");
    if (band < 1 || band > H0.rows()) throw UsageError("band size out of range");
    require_dense(H0.rows(), "continuation");
    long d = H0.rows();
    ContinuationResult res;
    auto spectrum = [&](double s) {
        Eigen::SelfAdjointEigenSolver<Mat> es(H0 + s * V);
        const RVec& e = es.eigenvalues();
        double gap = band < d ? e[band] - e[band - 1] : INFINITY;
        res.min_gap = std::min(res.min_gap, gap);
        if (gap < min_gap)
            throw NumericalError("gap condition violated at s = " + std::to_string(s) + ": gap " + std::to_string(gap));
        int rank = 0;
        for (long i = 0; i < d; ++i)
            if (e[i] - e[0] < min_gap / 2) ++rank;
        return std::make_pair(es, rank);
    };
    auto proj = [&](const Eigen::SelfAdjointEigenSolver<Mat>& es) {
        Mat v = es.eigenvectors().leftCols(band);
        return Mat(v * v.adjoint());
    };
    double ds = 1.0 / steps;
    auto [es0, r0] = spectrum(0);
    Mat P0 = proj(es0);
    res.band_ranks.push_back(r0);
    res.deviations.push_back(0);
    res.U = Mat::Identity(d, d);
    auto node = es0;
    for (int k = 0; k < steps; ++k) {
        double s = k * ds;
        Mat D;
        if (integ == Integrator::left) {
            D = generator_from(node, V, F, GeneratorMethod::spectral, 0);
        } else {
            auto mid = spectrum(s + ds / 2).first;
            D = generator_from(mid, V, F, GeneratorMethod::spectral, 0);
        }
        res.U = expm(D * ds) * res.U;
        auto [es1, r1] = spectrum((k + 1) * ds);
        res.band_ranks.push_back(r1);
        double dev = opnorm(proj(es1) - res.U * P0 * res.U.adjoint());
        res.deviations.push_back(dev);
        res.max_deviation = std::max(res.max_deviation, dev);
        node = std::move(es1);
    }
    res.unitarity = (res.U.adjoint() * res.U - Mat::Identity(d, d)).norm();
    if (res.unitarity > 1e-9) throw NumericalError("continuation lost unitarity: " + std::to_string(res.unitarity));
    return res;
}

Mat dress_operator(const Mat& O, const Mat& U) {
    if (O.rows() != U.rows() || O.cols() != U.cols()) throw UsageError("operator and unitary shapes differ");
    return U * O * U.adjoint();
}

std::vector<double> dressed_locality_profile(const Mat& O, const Mat& U, int n,
                                             const std::vector<std::vector<int>>& regions) {
    Mat os = dress_operator(O, U);
    auto all = range(n);
    std::vector<double> out;
    for (const auto& reg : regions) {
        Mat ol = retensor(partial_trace(os, all, reg), reg, all);
        out.push_back(opnorm(ol - os));
    }
    return out;
}

}  // namespace tqo
