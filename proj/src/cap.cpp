#include "gaplab/cap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "gaplab/error.hpp"
#include "gaplab/interp.hpp"
#include "gaplab/ivp.hpp"
#include "gaplab/riccati.hpp"
#include "gaplab/roots.hpp"

namespace gaplab {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kSeriesStart = 1e-6;

// second series coefficient of the regular solution f = r^l (1 + a r^2 + ...)
double frobenius_coeff(int n, int l, double lambda) {
    return (l * (l + 2.0 * n - 3.0) / 3.0 - lambda) / (2.0 * (2.0 * l + n));
}

struct StartState {
    double f = 0.0;
    double df = 0.0;
};

StartState series_start(int n, int l, double lambda) {
    double a = frobenius_coeff(n, l, lambda);
    double r0 = kSeriesStart;
    StartState s;
    if (l == 0) {
        s.f = 1.0 + a * r0 * r0;
        s.df = 2.0 * a * r0;
    } else {
        s.f = std::pow(r0, l) * (1.0 + a * r0 * r0);
        s.df = std::pow(r0, l - 1) * (l + (l + 2.0) * a * r0 * r0);
    }
    return s;
}

OdeRhs radial_rhs(int n, int l, double lambda) {
    double coupling = static_cast<double>(l) * (l + n - 2.0);
    return [n, lambda, coupling](double r, std::span<const double> y, std::span<double> dy) {
        double s = std::sin(r);
        double cot = std::cos(r) / s;
        dy[0] = y[1];
        dy[1] = -(n - 1.0) * cot * y[1] - (lambda - coupling / (s * s)) * y[0];
    };
}

IvpConfig shooting_config() {
    IvpConfig cfg;
    cfg.rel_tol = 1e-11;
    cfg.abs_tol = 1e-14;
    return cfg;
}

double boundary_value(const CapProblem& prob, int l, double lambda) {
    StartState s = series_start(prob.n, l, lambda);
    double y0[2] = {s.f, s.df};
    auto sol = integrate_ivp(radial_rhs(prob.n, l, lambda), kSeriesStart, prob.radius, y0,
                             shooting_config());
    return sol.final_state()[0];
}

std::size_t interior_sign_changes(const std::vector<double>& f) {
    double sup = 0.0;
    for (double v : f) sup = std::max(sup, std::abs(v));
    double floor_value = 1e-10 * sup;
    std::size_t count = 0;
    double prev = 0.0;
    bool have_prev = false;
    // the last node sits on the Dirichlet zero; exclude it
    for (std::size_t i = 0; i + 1 < f.size(); ++i) {
        if (std::abs(f[i]) <= floor_value) continue;
        if (have_prev && prev * f[i] < 0.0) ++count;
        prev = f[i];
        have_prev = true;
    }
    return count;
}

double weight(int n, double r) { return std::pow(std::sin(r), n - 1); }

// Sturm count for the symmetric tridiagonal pencil (A - lambda B): number of
// eigenvalues strictly below lambda.
std::size_t pencil_count_below(const std::vector<double>& a, const std::vector<double>& b,
                               const std::vector<double>& off, double lambda) {
    constexpr double pivmin = 1e-290;
    std::size_t count = 0;
    double d = a[0] - lambda * b[0];
    if (std::abs(d) < pivmin) d = -pivmin;
    if (d < 0.0) ++count;
    for (std::size_t i = 1; i < a.size(); ++i) {
        d = (a[i] - lambda * b[i]) - off[i - 1] * off[i - 1] / d;
        if (std::abs(d) < pivmin) d = -pivmin;
        if (d < 0.0) ++count;
    }
    return count;
}

struct RadiusQuery {
    double cos_r = 1.0;
    double r = 0.0;
};

RadiusQuery polar_radius(std::span<const double> x) {
    RadiusQuery q;
    q.cos_r = std::clamp(x.back(), -1.0, 1.0);
    q.r = std::acos(q.cos_r);
    return q;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// gradient of log f0 at x: the radial log-slope times the unit tangent that
// points away from the pole; identically zero at the pole itself
std::vector<double> log_gradient(std::span<const double> x, const RadialLogSlope& rho) {
    RadiusQuery q = polar_radius(x);
    std::vector<double> g(x.size(), 0.0);
    if (q.r < 1e-9) return g;
    double coef = rho.eval(q.r) / std::sin(q.r);
    for (std::size_t i = 0; i < x.size(); ++i) g[i] = coef * q.cos_r * x[i];
    g.back() -= coef;
    return g;
}

RadialLogSlope integrate_log_slope(const OdeRhs& rhs, double z_start, double w_start,
                                   double slope_start, double z_end) {
    std::size_t count = 4001;
    std::vector<double> checkpoints(count);
    double h = (z_end - z_start) / static_cast<double>(count);
    for (std::size_t i = 0; i < count; ++i)
        checkpoints[i] = z_start + h * static_cast<double>(i + 1);
    checkpoints.back() = z_end;

    IvpConfig cfg;
    cfg.rel_tol = 1e-11;
    cfg.abs_tol = 1e-13;
    double y0[1] = {w_start};
    auto sol = integrate_ivp(rhs, z_start, z_end, y0, cfg, checkpoints);
    if (sol.blowup.has_value()) fail("bound violation", "log-slope escaped inside the certified range");

    RadialLogSlope out;
    out.r.reserve(count + 1);
    out.value.reserve(count + 1);
    out.slope.reserve(count + 1);
    out.r.push_back(z_start);
    out.value.push_back(w_start);
    out.slope.push_back(slope_start);
    std::vector<double> dy(1);
    for (std::size_t i = 0; i < sol.z.size(); ++i) {
        double w = sol.states[i][0];
        rhs(sol.z[i], std::span<const double>(&w, 1), dy);
        out.r.push_back(sol.z[i]);
        out.value.push_back(w);
        out.slope.push_back(dy[0]);
    }
    return out;
}

}  // namespace

CapProblem CapProblem::make(int n, double radius) {
    if (n < 2) fail("invalid system", "ball dimension must be at least 2");
    if (!(radius > 0.0) || radius > 0.5 * kPi + 1e-12)
        fail("invalid system", "ball radius must lie in (0, pi/2]");
    return CapProblem{n, radius};
}

RadialEigen cap_eigenvalue(const CapProblem& prob, int l) {
    if (l != 0 && l != 1) fail("invalid system", "angular mode must be 0 or 1");
    double R = prob.radius;
    auto g = [&](double lambda) { return boundary_value(prob, l, lambda); };

    double step = 0.5 * kPi * kPi / (R * R);
    for (int attempt = 0; attempt < 4; ++attempt, step *= 0.25) {
        double prev_lambda = 0.0;
        double prev_value = g(prev_lambda);
        double lo = 0.0, hi = 0.0;
        bool bracketed = false;
        for (std::size_t j = 1; j <= 4096; ++j) {
            double lambda = step * static_cast<double>(j);
            double value = g(lambda);
            if (prev_value * value <= 0.0) {
                lo = prev_lambda;
                hi = lambda;
                bracketed = true;
                break;
            }
            prev_lambda = lambda;
            prev_value = value;
        }
        if (!bracketed) fail("bracket failure", "no eigenvalue crossing within the scan range");

        RootConfig rc;
        rc.x_tol = 1e-12 * std::max(1.0, hi);
        double lambda = find_root(g, lo, hi, rc);

        // sample the converged mode and confirm it is the fundamental of its
        // angular mode; a capture of an excited mode rescans at a finer step
        std::size_t count = 2001;
        double h = R / static_cast<double>(count - 1);
        std::vector<double> checkpoints(count - 1);
        for (std::size_t i = 0; i + 1 < count; ++i)
            checkpoints[i] = h * static_cast<double>(i + 1);
        checkpoints.back() = R;
        StartState s = series_start(prob.n, l, lambda);
        double y0[2] = {s.f, s.df};
        auto sol = integrate_ivp(radial_rhs(prob.n, l, lambda), kSeriesStart, R, y0,
                                 shooting_config(), checkpoints);

        RadialEigen mode;
        mode.l = l;
        mode.lambda = lambda;
        mode.r.resize(count);
        mode.samples.resize(count);
        mode.dsamples.resize(count);
        mode.r[0] = 0.0;
        mode.samples[0] = l == 0 ? 1.0 : 0.0;
        mode.dsamples[0] = l == 0 ? 0.0 : 1.0;
        for (std::size_t i = 0; i + 1 < count; ++i) {
            mode.r[i + 1] = checkpoints[i];
            mode.samples[i + 1] = sol.states[i][0];
            mode.dsamples[i + 1] = sol.states[i][1];
        }
        if (interior_sign_changes(mode.samples) != 0) continue;

        double sup = 0.0;
        double orient = 0.0;
        for (double v : mode.samples) {
            sup = std::max(sup, std::abs(v));
            if (orient == 0.0 && std::abs(v) > 1e-10 * sup) orient = v;
        }
        double scale = (orient < 0.0 ? -1.0 : 1.0) / sup;
        for (std::size_t i = 0; i < count; ++i) {
            mode.samples[i] *= scale;
            mode.dsamples[i] *= scale;
        }
        return mode;
    }
    fail("bracket failure", "scan kept capturing excited modes");
}

double dense_cap_eigenvalue(const CapProblem& prob, int l, int index, std::size_t nodes) {
    if (l < 0) fail("invalid system", "angular mode must be nonnegative");
    if (index < 0) fail("invalid system", "radial index must be nonnegative");
    if (nodes < 32) fail("invalid grid", "dense oracle needs at least 32 nodes");
    double R = prob.radius;
    std::size_t M = nodes;
    double h = R / static_cast<double>(M - 1);
    double coupling = static_cast<double>(l) * (l + prob.n - 2.0);

    // unknowns: nodes 0..M-2 for l = 0 (free center), 1..M-2 otherwise
    std::size_t first = l == 0 ? 0 : 1;
    std::size_t size = M - 1 - first;
    std::vector<double> a(size), b(size), off(size > 0 ? size - 1 : 0);
    for (std::size_t u = 0; u < size; ++u) {
        std::size_t i = u + first;
        double r = h * static_cast<double>(i);
        if (i == 0) {
            // finite-volume cell [0, h/2]: flux through h/2, Simpson mass
            double wr = weight(prob.n, 0.5 * h);
            a[u] = wr / h;
            b[u] = (h / 12.0) * (weight(prob.n, 0.0) + 4.0 * weight(prob.n, 0.25 * h) + wr);
        } else {
            double wl = weight(prob.n, r - 0.5 * h);
            double wr = weight(prob.n, r + 0.5 * h);
            double potential = coupling == 0.0
                                   ? 0.0
                                   : coupling * std::pow(std::sin(r), prob.n - 3);
            a[u] = (wl + wr) / h + h * potential;
            b[u] = h * weight(prob.n, r);
        }
        if (u + 1 < size) off[u] = -weight(prob.n, r + 0.5 * h) / h;
    }

    double hi = 0.0;
    for (std::size_t u = 0; u < size; ++u) {
        double row = a[u];
        if (u > 0) row += std::abs(off[u - 1]);
        if (u + 1 < size) row += std::abs(off[u]);
        hi = std::max(hi, row / b[u]);
    }
    double lo = 0.0;
    std::size_t want = static_cast<std::size_t>(index) + 1;
    for (int iter = 0; iter < 200 && hi - lo > 1e-13 * hi; ++iter) {
        double mid = 0.5 * (lo + hi);
        if (pencil_count_below(a, b, off, mid) >= want)
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

double RadialLogSlope::eval(double rq) const {
    if (rq < r.front() || rq > r.back())
        fail("invalid evaluation", "log-slope query outside the certified range");
    return hermite_eval(r, value, slope, rq);
}

RadialLogSlope cap_log_slope(const CapProblem& prob, double lambda0) {
    if (!(lambda0 > 0.0)) fail("invalid system", "ground eigenvalue must be positive");
    int n = prob.n;
    auto rhs = [n, lambda0](double r, std::span<const double> y, std::span<double> dy) {
        double cot = std::cos(r) / std::sin(r);
        dy[0] = -y[0] * y[0] - (n - 1.0) * cot * y[0] - lambda0;
    };
    double r0 = kSeriesStart;
    double w0 = -lambda0 * r0 / n;
    RadialLogSlope out =
        integrate_log_slope(rhs, r0, w0, -lambda0 / n, 0.97 * prob.radius);
    // pull the start back to the regular center point
    out.r.front() = 0.0;
    out.value.front() = 0.0;
    out.lambda = lambda0;
    return out;
}

RadialLogSlope model_log_slope(const PruferProblem& model) {
    model.validate();
    if (!(model.mu0 > 0.0)) fail("invalid system", "model ground eigenvalue must be positive");
    auto rhs = [model](double z, std::span<const double> y, std::span<double> dy) {
        dy[0] = stationary_rate(model, z, y[0], 0.0);
    };
    RadialLogSlope out = integrate_log_slope(rhs, 0.0, 0.0, -model.mu0, 0.97 * model.half());
    out.lambda = model.mu0;
    return out;
}

std::vector<double> GreatCircle::point(double s) const {
    double t = s + 0.5 * d;
    std::vector<double> p(first.size());
    for (std::size_t i = 0; i < p.size(); ++i)
        p[i] = std::cos(t) * first[i] + std::sin(t) * conjugate[i];
    return p;
}

std::vector<double> GreatCircle::tangent(double s) const {
    double t = s + 0.5 * d;
    std::vector<double> v(first.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = -std::sin(t) * first[i] + std::cos(t) * conjugate[i];
    return v;
}

GreatCircle great_circle(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 3)
        fail("invalid system", "points must share an embedding of dimension at least 3");
    if (std::abs(dot(x, x) - 1.0) > 1e-9 || std::abs(dot(y, y) - 1.0) > 1e-9)
        fail("invalid system", "points must lie on the unit sphere");
    double c = std::clamp(dot(x, y), -1.0, 1.0);
    double d = std::acos(c);
    if (d < 1e-12 || d > kPi - 1e-9)
        fail("invalid system", "pair is degenerate or antipodal");

    GreatCircle gc;
    gc.d = d;
    gc.first.assign(x.begin(), x.end());
    gc.conjugate.resize(x.size());
    double norm = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        gc.conjugate[i] = y[i] - c * x[i];
        norm += gc.conjugate[i] * gc.conjugate[i];
    }
    norm = std::sqrt(norm);
    for (double& v : gc.conjugate) v /= norm;
    return gc;
}

GapChainReport verify_gap_chain(const CapProblem& prob, const ModelProblem& model_prob,
                                const ModelGap& model) {
    if (std::abs(model_prob.D - prob.diameter()) > 1e-12)
        fail("invalid system", "comparison operator diameter must match the ball diameter");
    if (!(prob.diameter() < kPi))
        fail("invalid system", "gap chain requires diameter strictly below pi");

    GapChainReport rep;
    rep.n = prob.n;
    rep.radius = prob.radius;
    rep.diameter = prob.diameter();
    rep.scope_note =
        "margins verified for geodesic balls only; other convex domains are outside "
        "this artifact's scope";

    auto certify = [&](int l, const RadialEigen& mode) {
        double d1 = dense_cap_eigenvalue(prob, l, 0, 2001);
        double d2 = dense_cap_eigenvalue(prob, l, 0, 4001);
        double rich = (4.0 * d2 - d1) / 3.0;
        return std::abs(mode.lambda - rich) + std::abs(d2 - d1) / 3.0;
    };
    RadialEigen e0 = cap_eigenvalue(prob, 0);
    RadialEigen e1 = cap_eigenvalue(prob, 1);
    rep.lambda0 = e0.lambda;
    rep.lambda1 = e1.lambda;
    rep.lambda0_tol = certify(0, e0);
    rep.lambda1_tol = certify(1, e1);
    rep.second_radial = dense_cap_eigenvalue(prob, 0, 1, 4001);

    rep.mu0 = model.mu0;
    rep.mu1 = model.mu1;
    rep.mu_tol = model.certified_tol;
    rep.margin_chain = (rep.lambda1 - rep.lambda0) - model.gap;
    rep.margin_ground = rep.lambda0 - rep.mu0;
    if (prob.n >= 3) rep.margin_model = model.margin;

    rep.ordering_ok = rep.lambda0 < rep.lambda1 && rep.lambda1 < rep.second_radial;
    double chain_tol = 2.0 * rep.mu_tol + rep.lambda0_tol + rep.lambda1_tol + 1e-9;
    double ground_tol = rep.mu_tol + rep.lambda0_tol + 1e-9;
    rep.ok = rep.ordering_ok && rep.margin_chain >= -chain_tol &&
             rep.margin_ground >= -ground_tol &&
             (!rep.margin_model.has_value() ||
              *rep.margin_model >= -(2.0 * rep.mu_tol + 1e-9));
    return rep;
}

std::vector<TwoPointSample> make_pair_seeds(const CapProblem& prob, std::size_t count,
                                            std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto unit = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    std::size_t dim = static_cast<std::size_t>(prob.n) + 1;
    double R = prob.radius;

    std::vector<TwoPointSample> seeds;
    seeds.reserve(count);
    while (seeds.size() < count) {
        double rx = (0.02 + 0.93 * unit()) * R;
        double ry = (0.02 + 0.93 * unit()) * R;
        double theta = (0.002 + 0.998 * unit()) * kPi;
        TwoPointSample s;
        s.x.assign(dim, 0.0);
        s.y.assign(dim, 0.0);
        s.x[0] = std::sin(rx);
        s.x[dim - 1] = std::cos(rx);
        s.y[0] = std::sin(ry) * std::cos(theta);
        s.y[1] = std::sin(ry) * std::sin(theta);
        s.y[dim - 1] = std::cos(ry);
        s.d = std::acos(std::clamp(dot(s.x, s.y), -1.0, 1.0));
        if (s.d < 1e-5) continue;
        seeds.push_back(std::move(s));
    }
    return seeds;
}

std::vector<TwoPointSample> sample_logconcavity(const CapProblem& prob,
                                                std::vector<TwoPointSample> seeds,
                                                const RadialEigen& ground,
                                                const PruferProblem& model) {
    if (ground.l != 0) fail("invalid system", "log-concavity needs the l = 0 radial profile");
    if (std::abs(model.D - prob.diameter()) > 1e-12)
        fail("invalid system", "comparison operator diameter must match the ball diameter");

    RadialLogSlope rho = cap_log_slope(prob, ground.lambda);
    RadialLogSlope w = model_log_slope(model);

    for (TwoPointSample& s : seeds) {
        GreatCircle gc = great_circle(s.x, s.y);
        s.d = gc.d;
        // frame self-test: the curve must pass through the pair exactly
        std::vector<double> back = gc.point(-0.5 * gc.d);
        double defect = 0.0;
        for (std::size_t i = 0; i < back.size(); ++i)
            defect = std::max(defect, std::abs(back[i] - s.x[i]));
        if (defect > 1e-10) fail("invalid evaluation", "geodesic frame self-test failed");

        std::vector<double> tx = gc.tangent(-0.5 * gc.d);
        std::vector<double> ty = gc.tangent(0.5 * gc.d);
        std::vector<double> gx = log_gradient(s.x, rho);
        std::vector<double> gy = log_gradient(s.y, rho);
        s.lhs = dot(gy, ty) - dot(gx, tx);
        s.rhs = 2.0 * w.eval(0.5 * s.d);
        s.margin = s.rhs - s.lhs;
    }
    return seeds;
}

}  // namespace gaplab
