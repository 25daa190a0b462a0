#include "tqo/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "tqo/errors.hpp"

namespace tqo {

LinearOperator as_operator(const Hamiltonian& h) {
    return {h.dim(), [&h](const Vec& in, Vec& out) { h.apply(in, out); }};
}

LinearOperator as_operator(const Mat& m) {
    return {m.rows(), [&m](const Vec& in, Vec& out) { out.noalias() = m * in; }};
}

std::vector<double> low_spectrum(const Mat& h, int count) {
    require_dense(h.rows(), "dense eigensolver");
    Eigen::SelfAdjointEigenSolver<Mat> es(h, Eigen::EigenvaluesOnly);
    int c = std::min<int>(count, int(h.rows()));
    std::vector<double> out(c);
    for (int i = 0; i < c; ++i) out[i] = es.eigenvalues()(i);
    return out;
}

namespace {

void orthogonalize(Vec& v, const std::vector<Vec>& basis) {
    for (int pass = 0; pass < 2; ++pass)
        for (const auto& b : basis) v -= b * b.dot(v);
}

}  // namespace

std::vector<double> low_spectrum(const LinearOperator& h, int count, const LanczosOptions& opt,
                                 std::vector<Vec>* vectors) {
    require_matrix_free(h.dim, "Lanczos");
    count = int(std::min<long long>(count, h.dim));
    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> g;
    std::vector<Vec> locked;
    std::vector<double> vals;
    double scale = 0;
    Vec w(h.dim);
    while (int(locked.size()) < count) {
        Vec v(h.dim);
        for (long long i = 0; i < h.dim; ++i) v(i) = cplx(g(rng), g(rng));
        double residual = 0;
        bool converged = false;
        for (int restart = 0; restart <= opt.max_restarts && !converged; ++restart) {
            orthogonalize(v, locked);
            double nv = v.norm();
            if (nv == 0) throw NumericalError("Lanczos start vector lies in the locked space");
            v /= nv;
            std::vector<Vec> q{v};
            std::vector<double> alpha, beta;
            int m = int(std::min<long long>(opt.krylov, h.dim - (long long)locked.size()));
            for (int j = 0; j < m; ++j) {
                h.apply(q[j], w);
                double a = q[j].dot(w).real();
                alpha.push_back(a);
                w -= a * q[j];
                if (j > 0) w -= beta[j - 1] * q[j - 1];
                orthogonalize(w, locked);
                orthogonalize(w, q);
                double b = w.norm();
                scale = std::max({scale, std::abs(a), b});
                if (j + 1 == m || b <= 1e-13 * std::max(scale, 1.0)) break;
                beta.push_back(b);
                q.push_back(w / b);
            }
            int k = int(alpha.size());
            Eigen::MatrixXd T = Eigen::MatrixXd::Zero(k, k);
            for (int i = 0; i < k; ++i) T(i, i) = alpha[i];
            for (int i = 0; i + 1 < k; ++i) T(i, i + 1) = T(i + 1, i) = beta[i];
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
            double theta = es.eigenvalues()(0);
            Vec x = Vec::Zero(h.dim);
            for (int i = 0; i < k; ++i) x += es.eigenvectors()(i, 0) * q[i];
            orthogonalize(x, locked);
            x.normalize();
            h.apply(x, w);
            theta = x.dot(w).real();
            residual = (w - theta * x).norm();
            scale = std::max(scale, std::abs(theta));
            if (residual <= opt.tol * std::max(scale, 1.0)) {
                locked.push_back(x);
                vals.push_back(theta);
                converged = true;
            }
            v = x;
        }
        if (!converged) {
            std::ostringstream msg;
            msg << "Lanczos did not converge for eigenvalue " << locked.size() << " (residual " << residual << ")";
            throw NumericalError(msg.str());
        }
    }
    std::vector<int> order(vals.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return vals[a] < vals[b]; });
    std::vector<double> out;
    for (int i : order) out.push_back(vals[i]);
    if (vectors) {
        vectors->clear();
        for (int i : order) vectors->push_back(locked[i]);
    }
    return out;
}

std::vector<double> low_spectrum(const Hamiltonian& h, int count) {
    if (h.dim() <= dense_cap()) return low_spectrum(h.dense(), count);
    return low_spectrum(as_operator(h), count);
}

SpectralReport band_report(std::vector<double> ev, const std::vector<double>& h0_levels) {
    if (ev.empty() || h0_levels.empty()) throw UsageError("band report needs eigenvalues and H0 levels");
    std::sort(ev.begin(), ev.end());
    std::vector<double> levels = h0_levels;
    std::sort(levels.begin(), levels.end());
    double l0 = levels.front();
    int g = int(std::count_if(levels.begin(), levels.end(), [&](double x) { return std::abs(x - l0) < 1e-9; }));
    g = std::min<int>(g, int(ev.size()));
    SpectralReport r;
    r.delta = (ev[g - 1] - ev[0]) / 2;
    r.shift = l0 - (ev[0] + ev[g - 1]) / 2;
    std::vector<double> distinct;
    for (double x : levels)
        if (distinct.empty() || std::abs(x - distinct.back()) > 1e-9) distinct.push_back(x);
    for (std::size_t i = 0; i < ev.size(); ++i) {
        double e = ev[i] + r.shift;
        r.eigenvalues.push_back(e);
        if (int(i) < g) {
            r.band.push_back(int(std::lround(l0)));
            continue;
        }
        auto best = std::min_element(distinct.begin(), distinct.end(),
                                     [&](double a, double b) { return std::abs(a - e) < std::abs(b - e); });
        r.band.push_back(int(std::lround(*best)));
    }
    for (std::size_t i = 0; i + 1 < distinct.size(); ++i) {
        int k = int(std::lround(distinct[i])), kn = int(std::lround(distinct[i + 1]));
        double top = -1e300, bottom = 1e300;
        for (std::size_t j = 0; j < r.eigenvalues.size(); ++j) {
            if (r.band[j] == k) top = std::max(top, r.eigenvalues[j]);
            if (r.band[j] == kn) bottom = std::min(bottom, r.eigenvalues[j]);
        }
        if (top > -1e300 && bottom < 1e300) r.gaps.push_back({k, kn, bottom - top});
    }
    return r;
}

double fit_c1(const SpectralReport& r, double J) {
    double c1 = 0;
    for (std::size_t i = 0; i < r.eigenvalues.size(); ++i) {
        if (!r.band[i] || *r.band[i] < 1) continue;
        int k = *r.band[i];
        double excess = std::max(0.0, std::abs(r.eigenvalues[i] - k) - r.delta);
        c1 = std::max(c1, excess / (k * J));
    }
    return c1;
}

BandCheck verify_bands(const SpectralReport& r, const std::vector<double>& h0_levels, double J, double c1,
                       double delta) {
    BandCheck out;
    std::ostringstream why;
    for (std::size_t i = 0; i < r.eigenvalues.size(); ++i) {
        bool in = false;
        if (r.band[i]) {
            double k = *r.band[i];
            double lo = k * (1 - c1 * J) - delta, hi = k * (1 + c1 * J) + delta;
            double eps = 1e-12 * std::max(1.0, std::abs(k));
            in = r.eigenvalues[i] >= lo - eps && r.eigenvalues[i] <= hi + eps;
        }
        out.inside.push_back(in);
        if (!in) {
            out.pass = false;
            why << "eigenvalue " << r.eigenvalues[i] << " outside its band; ";
        }
    }
    if (r.eigenvalues.size() == h0_levels.size()) {
        std::map<int, int> want, got;
        for (double x : h0_levels) ++want[int(std::lround(x))];
        for (const auto& b : r.band)
            if (b) ++got[*b];
        if (want != got) {
            out.multiplicities_ok = false;
            out.pass = false;
            why << "band populations differ from H0 multiplicities; ";
        }
    }
    for (const auto& g : r.gaps) {
        double Jk = c1 > 0 ? 1.0 / (c1 * (4 * g.k + 2)) : INFINITY;
        if (J < Jk && g.gap < 0.5) {
            out.gaps_ok = false;
            out.pass = false;
            why << "gap " << g.k << "->" << g.k_next << " = " << g.gap << " below 1/2; ";
        }
    }
    out.detail = why.str();
    return out;
}

std::optional<double> relative_bound(const Mat& W, const Mat& H0, double tol, Vec* attained) {
    require_dense(H0.rows(), "relative bound");
    Eigen::SelfAdjointEigenSolver<Mat> es(H0);
    const RVec& ev = es.eigenvalues();
    double top = std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
    double wn = std::max(1.0, opnorm(W));
    for (int i = 0; i < ev.size(); ++i)
        if (std::abs(ev(i)) <= 1e-10 * top && (W * es.eigenvectors().col(i)).norm() > tol * wn) return std::nullopt;
    Mat pinv = hermitian_pinv(H0);
    Mat m = pinv * W.adjoint() * W * pinv;
    Eigen::SelfAdjointEigenSolver<Mat> ms(m);
    double lam = std::max(0.0, ms.eigenvalues()(ms.eigenvalues().size() - 1));
    if (attained) {
        Vec psi = pinv * ms.eigenvectors().col(ms.eigenvalues().size() - 1);
        double n = psi.norm();
        *attained = n > 0 ? Vec(psi / n) : psi;
    }
    return std::sqrt(lam);
}

Containment spectrum_containment_check(const Mat& H0, const Mat& W, double b, double tol) {
    if (b >= 1) return {ContainmentStatus::skipped, 0, "containment requires b < 1"};
    require_dense(H0.rows(), "containment check");
    Eigen::SelfAdjointEigenSolver<Mat> e0(H0, Eigen::EigenvaluesOnly), e1(Mat(H0 + W), Eigen::EigenvaluesOnly);
    Containment out{ContainmentStatus::pass, 0, ""};
    for (int i = 0; i < e1.eigenvalues().size(); ++i) {
        double lam = e1.eigenvalues()(i), best = INFINITY;
        for (int j = 0; j < e0.eigenvalues().size(); ++j) {
            double l0 = e0.eigenvalues()(j);
            double lo = std::min(l0 * (1 - b), l0 * (1 + b)), hi = std::max(l0 * (1 - b), l0 * (1 + b));
            best = std::min(best, lam < lo ? lo - lam : lam > hi ? lam - hi : 0.0);
        }
        out.worst_excess = std::max(out.worst_excess, best);
    }
    if (out.worst_excess > tol) out.status = ContainmentStatus::fail;
    return out;
}

// ---- unstable toric sectors ----

namespace {

// Solves for the set of faces (plaquettes or stars) whose product has the given support,
// using that every edge borders exactly two faces. Returns the smaller of the two solutions.
std::vector<int> face_set(const Lattice& lat, const BitVec& support, bool plaquettes) {
    int L = lat.L(), n = L * L;
    std::vector<int> val(n, -1);
    auto id = [&](int x, int y) { return lat.wrap(y) * L + lat.wrap(x); };
    // neighbours across each edge: (face, other face, edge)
    std::vector<std::vector<std::pair<int, int>>> adj(n);
    for (int y = 0; y < L; ++y)
        for (int x = 0; x < L; ++x) {
            int h = lat.edge(x, y, 0), v = lat.edge(x, y, 1);
            if (plaquettes) {
                adj[id(x, y)].push_back({id(x, y - 1), h});
                adj[id(x, y - 1)].push_back({id(x, y), h});
                adj[id(x, y)].push_back({id(x - 1, y), v});
                adj[id(x - 1, y)].push_back({id(x, y), v});
            } else {
                adj[id(x, y)].push_back({id(x + 1, y), h});
                adj[id(x + 1, y)].push_back({id(x, y), h});
                adj[id(x, y)].push_back({id(x, y + 1), v});
                adj[id(x, y + 1)].push_back({id(x, y), v});
            }
        }
    std::vector<int> stack{0};
    val[0] = 0;
    while (!stack.empty()) {
        int f = stack.back();
        stack.pop_back();
        for (auto [o, e] : adj[f]) {
            int want = val[f] ^ int(support.get(e));
            if (val[o] == -1) {
                val[o] = want;
                stack.push_back(o);
            } else if (val[o] != want) {
                throw UsageError("generator is not a product of " + std::string(plaquettes ? "plaquettes" : "stars"));
            }
        }
    }
    std::vector<int> in, out;
    for (int f = 0; f < n; ++f) (val[f] ? in : out).push_back(f);
    return in.size() <= out.size() ? in : out;
}

Pauli face_product(const Lattice& lat, const std::vector<int>& faces, bool plaquettes) {
    int n = lat.qubit_count(), L = lat.L();
    Pauli p(n);
    for (int f : faces) {
        int x = f % L, y = f / L;
        char c = plaquettes ? 'Z' : 'X';
        std::vector<int> edges = plaquettes ? std::vector<int>{lat.edge(x, y, 0), lat.edge(x, y + 1, 0),
                                                               lat.edge(x, y, 1), lat.edge(x + 1, y, 1)}
                                            : std::vector<int>{lat.edge(x, y, 0), lat.edge(x - 1, y, 0),
                                                               lat.edge(x, y, 1), lat.edge(x, y - 1, 1)};
        for (int e : edges) p *= Pauli::single(n, e, c);
    }
    return p;
}

}  // namespace

SectorModel sector_model(const Model& model) {
    const Lattice& lat = model.lattice;
    if (lat.layout() != Layout::edges) throw UsageError("sector model needs the edges layout");
    SectorModel s;
    s.plaquettes = s.stars = lat.L() * lat.L();
    for (const auto& g : model.group.generators()) {
        bool zt = !g.x().any(), xt = !g.z().any();
        if (!zt && !xt) throw UsageError("generator " + g.str() + " mixes X and Z");
        auto faces = face_set(lat, zt ? g.z() : g.x(), zt);
        Pauli prod = face_product(lat, faces, zt);
        int sign = prod == g ? 1 : prod.negated() == g ? -1 : 0;
        if (!sign) throw UsageError("generator " + g.str() + " is not a signed face product");
        (zt ? s.plaquette_terms : s.star_terms).push_back(faces);
        (zt ? s.plaquette_signs : s.star_signs).push_back(sign);
    }
    return s;
}

namespace {

double term_energy(const std::vector<std::vector<int>>& terms, const std::vector<int>& signs,
                   const std::vector<int>& vals) {
    double e = 0;
    for (std::size_t t = 0; t < terms.size(); ++t) {
        int prod = signs[t];
        for (int f : terms[t]) prod *= vals[f];
        e -= prod;
    }
    return e;
}

std::vector<int> from_mask(unsigned long long mask, int n) {
    // the last face is fixed by the parity constraint
    std::vector<int> v(n, 1);
    int parity = 0;
    for (int i = 0; i + 1 < n; ++i)
        if ((mask >> i) & 1) {
            v[i] = -1;
            parity ^= 1;
        }
    if (parity) v[n - 1] = -1;
    return v;
}

// energies of the face sectors: exhaustive when small, otherwise uniform configurations and
// their one- and two-pair flips
std::vector<std::pair<std::vector<int>, double>> face_sectors(const std::vector<std::vector<int>>& terms,
                                                             const std::vector<int>& signs, int n, bool& exhaustive) {
    std::vector<std::pair<std::vector<int>, double>> out;
    if (n - 1 <= 20) {
        exhaustive = true;
        for (unsigned long long m = 0; m < (1ULL << (n - 1)); ++m) {
            auto v = from_mask(m, n);
            out.push_back({v, term_energy(terms, signs, v)});
        }
        return out;
    }
    exhaustive = false;
    for (int base : {1, -1}) {
        std::vector<int> v(n, base);
        out.push_back({v, term_energy(terms, signs, v)});
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                v[i] = v[j] = -base;
                out.push_back({v, term_energy(terms, signs, v)});
                v[i] = v[j] = base;
            }
    }
    return out;
}

}  // namespace

double sector_energy(const SectorModel& s, const std::vector<int>& b, const std::vector<int>& a, double h) {
    double e = term_energy(s.plaquette_terms, s.plaquette_signs, b) + term_energy(s.star_terms, s.star_signs, a);
    for (int x : b) e += h * x;
    return e;
}

SweepResult sector_gap_sweep(const Model& model, const std::vector<double>& h_values) {
    SectorModel s = sector_model(model);
    SweepResult res;
    bool ex_b = false, ex_a = false;
    auto bs = face_sectors(s.plaquette_terms, s.plaquette_signs, s.plaquettes, ex_b);
    auto as = face_sectors(s.star_terms, s.star_signs, s.stars, ex_a);
    res.exhaustive = ex_b && ex_a;
    std::vector<double> ea;
    for (auto& [v, e] : as) ea.push_back(e);
    std::sort(ea.begin(), ea.end());
    std::vector<int> sums;
    for (auto& [v, e] : bs) sums.push_back(std::accumulate(v.begin(), v.end(), 0));
    int prev = -1;
    for (double h : h_values) {
        // two lowest plaquette-sector energies at this h
        double b0 = INFINITY, b1 = INFINITY;
        int arg = -1;
        for (std::size_t i = 0; i < bs.size(); ++i) {
            double e = bs[i].second + h * sums[i];
            if (e < b0) {
                b1 = b0;
                b0 = e;
                arg = int(i);
            } else if (e < b1) {
                b1 = e;
            }
        }
        SweepPoint p;
        p.h = h;
        p.ground_energy = b0 + ea[0];
        double second = std::min(b1 + ea[0], ea.size() > 1 ? b0 + ea[1] : INFINITY);
        p.gap = second - p.ground_energy;
        p.ground_all_minus = sums[arg] == -s.plaquettes;
        p.ground_all_plus = sums[arg] == s.plaquettes;
        if (prev >= 0 && !res.crossing && sums[prev] == s.plaquettes && p.ground_all_minus) {
            // exact intersection of the two sector lines E = alpha + beta h
            double ap = bs[prev].second, am = bs[arg].second;
            res.crossing = (am - ap) / double(sums[prev] - sums[arg]);
        }
        prev = arg;
        res.points.push_back(p);
    }
    return res;
}

std::vector<double> all_sector_energies(const Model& model, double h) {
    SectorModel s = sector_model(model);
    if (s.plaquettes - 1 + s.stars - 1 > 20) throw ResourceError("too many sectors to enumerate", 1LL << (s.plaquettes + s.stars - 2));
    int mult = 1 << (model.qubit_count() - model.group.rank());
    std::vector<double> out;
    for (unsigned long long mb = 0; mb < (1ULL << (s.plaquettes - 1)); ++mb)
        for (unsigned long long ma = 0; ma < (1ULL << (s.stars - 1)); ++ma) {
            double e = sector_energy(s, from_mask(mb, s.plaquettes), from_mask(ma, s.stars), h);
            for (int k = 0; k < mult; ++k) out.push_back(e);
        }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace tqo
