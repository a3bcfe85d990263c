#include "gaplab/parabolic.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

#include "gaplab/error.hpp"
#include "gaplab/grid.hpp"
#include "gaplab/interp.hpp"

namespace gaplab {
namespace {

PruferProblem problem_of(const CoefficientSet& ctx) {
    return PruferProblem{ctx.n, ctx.D, ctx.mu0};
}

// second derivative of a stationary profile with coupling c, from the exact
// first-order equation
double stationary_curvature(const PruferProblem& prob, double z, double psi, double c) {
    double t = std::tan(z);
    double s2 = 1.0 + t * t;
    double rate = stationary_rate(prob, z, psi, c);
    double fz = (prob.n - 1) * s2 * psi + 2.0 * c * t * s2;
    double fpsi = -2.0 * psi + (prob.n - 1) * t;
    return fz + fpsi * rate;
}

// Solves (I - r*D2) x = b on the interior of a homogeneous-Dirichlet field.
// The matrix is constant tridiagonal with diagonal 1+2r and off-diagonals -r,
// strictly diagonally dominant, so plain elimination is stable.
void diffusion_solve(double r, std::span<const double> b, std::span<double> x,
                     std::vector<double>& scratch) {
    std::size_t m = b.size();
    scratch.resize(m);
    double diag = 1.0 + 2.0 * r;
    double piv = diag;
    x[0] = b[0] / piv;
    for (std::size_t i = 1; i < m; ++i) {
        scratch[i] = -r / piv;
        piv = diag - (-r) * scratch[i];
        x[i] = (b[i] + r * x[i - 1]) / piv;
    }
    for (std::size_t i = m - 1; i-- > 0;) x[i] += (-scratch[i + 1]) * x[i + 1];
}

double sup_abs(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s = std::max(s, std::abs(x));
    return s;
}

double erf_profile(double x) {
    return 2.0 / std::sqrt(std::numbers::pi) * std::exp(-0.25 * x * x) + x * std::erf(0.5 * x);
}

std::vector<double> explicit_terms(const CoefficientSet& ctx, std::span<const double> u) {
    std::size_t count = ctx.nodes();
    std::vector<double> out(count, 0.0);
    double inv2h = 0.5 / ctx.h;
    for (std::size_t i = 1; i + 1 < count; ++i) {
        double du = (u[i + 1] - u[i - 1]) * inv2h;
        out[i] = (2.0 * u[i] + ctx.a1[i]) * du - 2.0 * ctx.tan_z[i] * u[i] * u[i] + ctx.a2[i] * u[i];
    }
    return out;
}

double advection_cap(const CoefficientSet& ctx, std::span<const double> u) {
    double v = 0.0;
    for (std::size_t i = 1; i + 1 < ctx.nodes(); ++i)
        v = std::max(v, std::abs(2.0 * u[i] + ctx.a1[i]));
    return 0.5 * ctx.h / (1.0 + v);
}

struct StepWorkspace {
    std::vector<double> expl, b, x, scratch;
};

double advance(const CoefficientSet& ctx, EvolutionState& st, double dt_request,
               StepWorkspace& ws) {
    std::size_t count = ctx.nodes();
    std::size_t m = count - 2;
    ws.expl = explicit_terms(ctx, st.u);
    ws.b.resize(m);
    ws.x.resize(m);
    double guard = 2.0 * sup_abs(st.u) + 10.0;
    double dt = dt_request;
    for (int rejected = 0;; ++rejected) {
        double r = dt / (ctx.h * ctx.h);
        for (std::size_t i = 0; i < m; ++i) ws.b[i] = st.u[i + 1] + dt * ws.expl[i + 1];
        diffusion_solve(r, ws.b, ws.x, ws.scratch);
        bool ok = true;
        for (std::size_t i = 0; i < m; ++i)
            if (!std::isfinite(ws.x[i]) || std::abs(ws.x[i]) > guard) {
                ok = false;
                break;
            }
        if (ok) {
            for (std::size_t i = 0; i < m; ++i) st.u[i + 1] = ws.x[i];
            st.u[0] = 0.0;
            st.u[count - 1] = 0.0;
            st.t += dt;
            ++st.step_count;
            return dt;
        }
        if (rejected >= 20) {
            std::ostringstream os;
            os << "flow step rejected 20 times at t=" << st.t << ", dt=" << dt;
            fail("stiffness failure", os.str());
        }
        dt *= 0.5;
    }
}

// least-squares slope of log(errors) against time over the active decay window
double fit_decay(const std::vector<double>& times, const std::vector<double>& errors,
                 double floor_value) {
    std::vector<double> ts, ls;
    double top = errors.empty() ? 0.0 : 0.5 * errors.front();
    for (std::size_t i = 0; i < times.size(); ++i)
        if (errors[i] > floor_value && errors[i] < top) {
            ts.push_back(times[i]);
            ls.push_back(std::log(errors[i]));
        }
    if (ts.size() < 3) return 0.0;
    double n = static_cast<double>(ts.size());
    double st = 0.0, sl = 0.0, stt = 0.0, stl = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        st += ts[i];
        sl += ls[i];
        stt += ts[i] * ts[i];
        stl += ts[i] * ls[i];
    }
    double denom = n * stt - st * st;
    if (std::abs(denom) < 1e-30) return 0.0;
    return -(n * stl - st * sl) / denom;
}

}  // namespace

CoefficientSet make_coefficients(const PruferProblem& prob, double k, std::size_t nodes) {
    prob.validate();
    if (k <= 0.0) fail("invalid system", "boundary slope k must be positive");
    if (nodes < 16) fail("invalid grid", "flow grid needs at least 16 nodes");
    CoefficientSet ctx;
    ctx.n = prob.n;
    ctx.D = prob.D;
    ctx.mu0 = prob.mu0;
    ctx.k = k;
    ctx.c = solve_robin_coupling(prob, 1.0 / k);
    auto grid = Grid1D::uniform(0.0, prob.half(), nodes);
    ctx.z = grid.nodes;
    ctx.h = ctx.z[1] - ctx.z[0];
    StationaryModulus chart(prob, ctx.c, nodes);
    ctx.tan_z.resize(nodes);
    ctx.psi_tilde.resize(nodes);
    ctx.dpsi_tilde.resize(nodes);
    ctx.a1.resize(nodes);
    ctx.a2.resize(nodes);
    for (std::size_t i = 0; i < nodes; ++i) {
        double z = ctx.z[i];
        double t = std::tan(z);
        ctx.tan_z[i] = t;
        ctx.psi_tilde[i] = chart.psi(z);
        ctx.dpsi_tilde[i] = chart.dpsi(z);
        ctx.a1[i] = 2.0 * ctx.psi_tilde[i] - (prob.n + 1) * t;
        ctx.a2[i] = 2.0 * ctx.dpsi_tilde[i] - 4.0 * t * ctx.psi_tilde[i] -
                    (prob.n - 1) * (1.0 - t * t);
    }
    return ctx;
}

std::vector<double> rhs_psi(const CoefficientSet& ctx, std::span<const double> psi) {
    std::size_t count = ctx.nodes();
    if (psi.size() != count) fail("invalid system", "field length does not match the grid");
    std::vector<double> out(count, 0.0);
    double inv2h = 0.5 / ctx.h;
    double invh2 = 1.0 / (ctx.h * ctx.h);
    for (std::size_t i = 1; i + 1 < count; ++i) {
        double t = ctx.tan_z[i];
        double d1 = (psi[i + 1] - psi[i - 1]) * inv2h;
        double d2 = (psi[i + 1] - 2.0 * psi[i] + psi[i - 1]) * invh2;
        out[i] = d2 + 2.0 * d1 * psi[i] - (ctx.n + 1) * t * d1 - 2.0 * t * psi[i] * psi[i] -
                 (ctx.n - 1) * (1.0 - t * t) * psi[i] - 2.0 * ctx.mu0 * t;
    }
    return out;
}

std::vector<double> rhs_u(const CoefficientSet& ctx, std::span<const double> u) {
    std::size_t count = ctx.nodes();
    if (u.size() != count) fail("invalid system", "field length does not match the grid");
    std::vector<double> out = explicit_terms(ctx, u);
    double invh2 = 1.0 / (ctx.h * ctx.h);
    for (std::size_t i = 1; i + 1 < count; ++i)
        out[i] += (u[i + 1] - 2.0 * u[i] + u[i - 1]) * invh2;
    return out;
}

double flow_step(const CoefficientSet& ctx, EvolutionState& st, double dt_request) {
    if (st.u.size() != ctx.nodes()) fail("invalid system", "state length does not match the grid");
    if (!(dt_request > 0.0)) fail("invalid system", "step size must be positive");
    StepWorkspace ws;
    st.u[0] = 0.0;
    st.u[ctx.nodes() - 1] = 0.0;
    return advance(ctx, st, dt_request, ws);
}

ConvergenceReport evolve_u(const CoefficientSet& ctx, std::vector<double> u0,
                           std::span<const double> cap, const FlowOptions& opt) {
    std::size_t count = ctx.nodes();
    if (u0.size() != count) fail("invalid system", "field length does not match the grid");
    if (!cap.empty() && cap.size() != count)
        fail("invalid system", "cap length does not match the grid");
    u0[0] = 0.0;
    u0[count - 1] = 0.0;
    std::vector<double> upper(cap.begin(), cap.end());
    if (upper.empty()) upper = u0;

    ConvergenceReport rep;
    rep.k = ctx.k;
    rep.field_tol = 10.0 * sup_abs(rhs_psi(ctx, ctx.psi_tilde));

    auto lipschitz = [&](std::span<const double> u) {
        double worst = 0.0;
        for (std::size_t i = 0; i + 1 < count; ++i) {
            double slope = (u[i + 1] + ctx.psi_tilde[i + 1] - u[i] - ctx.psi_tilde[i]) / ctx.h;
            worst = std::max(worst, std::abs(slope));
        }
        return worst;
    };

    EvolutionState st;
    st.u = std::move(u0);
    rep.lipschitz_initial = lipschitz(st.u);
    rep.lipschitz_max = rep.lipschitz_initial;
    rep.times.push_back(0.0);
    rep.sup_errors.push_back(sup_abs(st.u));

    StepWorkspace ws;
    std::vector<double> prev;
    double sup_rate = -std::numeric_limits<double>::infinity();
    bool rate_sampled = false;
    std::size_t consecutive = 0;
    double sup = rep.sup_errors.front();
    while (st.t < opt.t_end - 1e-15) {
        double dt = opt.fixed_dt > 0.0 ? opt.fixed_dt : advection_cap(ctx, st.u);
        dt = std::min(dt, opt.t_end - st.t);
        prev = st.u;
        double taken = advance(ctx, st, dt, ws);

        sup = 0.0;
        for (std::size_t i = 1; i + 1 < count; ++i) {
            double inc = st.u[i] - prev[i];
            if (inc > rep.field_tol) ++rep.monotonicity_violations;
            rep.worst_monotonicity = std::max(rep.worst_monotonicity, inc);
            double low = -st.u[i];
            double high = st.u[i] - upper[i];
            if (low > rep.field_tol || high > rep.field_tol) ++rep.sandwich_violations;
            rep.worst_sandwich = std::max({rep.worst_sandwich, low, high});
            sup = std::max(sup, std::abs(st.u[i]));
        }
        if (st.t >= 0.01 && sup > std::max(opt.tol, 2.0 * rep.field_tol)) {
            double rate = -std::numeric_limits<double>::infinity();
            for (std::size_t i = 1; i + 1 < count; ++i)
                rate = std::max(rate, (st.u[i] - prev[i]) / taken);
            sup_rate = std::max(sup_rate, rate);
            rate_sampled = true;
        }
        rep.lipschitz_max = std::max(rep.lipschitz_max, lipschitz(st.u));
        if (st.step_count % opt.record_every == 0) {
            rep.times.push_back(st.t);
            rep.sup_errors.push_back(sup);
        }
        if (sup < opt.tol) {
            if (++consecutive >= 50) {
                rep.converged = true;
                break;
            }
        } else {
            consecutive = 0;
        }
    }
    if (rep.times.back() != st.t) {
        rep.times.push_back(st.t);
        rep.sup_errors.push_back(sup);
    }
    rep.t_final = st.t;
    rep.sup_error_final = sup;
    rep.strict_delta = rate_sampled ? -sup_rate : 0.0;
    rep.decay_rate = fit_decay(rep.times, rep.sup_errors, std::max(opt.tol, 2.0 * rep.field_tol));

    PruferProblem prob = problem_of(ctx);
    double residual = 0.0;
    for (std::size_t i = 2; i + 2 < count; ++i) {
        double psi_i = st.u[i] + ctx.psi_tilde[i];
        double d1 = (-(st.u[i + 2] + ctx.psi_tilde[i + 2]) + 8.0 * (st.u[i + 1] + ctx.psi_tilde[i + 1]) -
                     8.0 * (st.u[i - 1] + ctx.psi_tilde[i - 1]) + (st.u[i - 2] + ctx.psi_tilde[i - 2])) /
                    (12.0 * ctx.h);
        residual = std::max(residual, std::abs(d1 - stationary_rate(prob, ctx.z[i], psi_i, ctx.c)));
    }
    rep.stationary_residual_final = residual;
    rep.u_final = std::move(st.u);
    return rep;
}

ConvergenceReport evolve_modulus(const PruferProblem& prob, const ModulusProfile& initial,
                                 const FlowOptions& opt) {
    CoefficientSet ctx = make_coefficients(prob, initial.k, initial.z.size());
    for (std::size_t i = 0; i < ctx.nodes(); ++i)
        if (std::abs(ctx.z[i] - initial.z[i]) > 1e-12)
            fail("invalid grid", "initial profile grid is not the uniform flow grid");
    std::vector<double> u0(ctx.nodes());
    for (std::size_t i = 0; i < ctx.nodes(); ++i) u0[i] = initial.psi[i] - ctx.psi_tilde[i];
    return evolve_u(ctx, std::move(u0), {}, opt);
}

ComparisonVerdict comparison_flow(const CoefficientSet& ctx, std::vector<double> u0,
                                  std::vector<double> v0, double t_end) {
    std::size_t count = ctx.nodes();
    if (u0.size() != count || v0.size() != count)
        fail("invalid system", "field length does not match the grid");
    u0[0] = v0[0] = 0.0;
    u0[count - 1] = v0[count - 1] = 0.0;
    for (std::size_t i = 0; i < count; ++i)
        if (u0[i] > v0[i] + 1e-15) fail("invalid system", "comparison requires u <= v initially");

    ComparisonVerdict verdict;
    verdict.field_tol = 10.0 * sup_abs(rhs_psi(ctx, ctx.psi_tilde));
    verdict.worst_margin = -std::numeric_limits<double>::infinity();
    EvolutionState a, b;
    a.u = std::move(u0);
    b.u = std::move(v0);
    StepWorkspace wa, wb;
    while (a.t < t_end - 1e-15) {
        double dt = std::min({advection_cap(ctx, a.u), advection_cap(ctx, b.u), t_end - a.t});
        double taken = advance(ctx, a, dt, wa);
        // drive the second field by the same accepted step
        advance(ctx, b, taken, wb);
        if (b.t != a.t) fail("stiffness failure", "co-evolved fields lost step lock");
        for (std::size_t i = 1; i + 1 < count; ++i) {
            double margin = a.u[i] - b.u[i];
            if (margin > verdict.worst_margin) {
                verdict.worst_margin = margin;
                verdict.z_at = ctx.z[i];
                verdict.t_at = a.t;
            }
        }
    }
    verdict.ok = verdict.worst_margin <= verdict.field_tol;
    return verdict;
}

BarrierVerdict heat_barrier_check(const CoefficientSet& ctx, std::span<const double> u0,
                                  double z0, double tau) {
    std::size_t count = ctx.nodes();
    if (u0.size() != count) fail("invalid system", "field length does not match the grid");
    if (!(tau > 0.0)) fail("invalid system", "barrier offset must be positive");
    std::size_t i0 = 0;
    for (std::size_t i = 1; i < count; ++i)
        if (std::abs(ctx.z[i] - z0) < std::abs(ctx.z[i0] - z0)) i0 = i;

    double l0 = 0.0;
    for (std::size_t i = 0; i + 1 < count; ++i)
        l0 = std::max(l0, std::abs(u0[i + 1] - u0[i]) / ctx.h);
    double c1 = sup_abs(u0);
    double a1 = sup_abs(ctx.a1);
    double a2 = sup_abs(ctx.a2);
    // sqrt(t)*phi(d/sqrt(t)) increases in t, so its sup over [0,1] sits at t=1
    double a0 = erf_profile(std::max(z0, ctx.z.back() - z0));
    BarrierVerdict verdict;
    verdict.mu_tau = 1.000001 * (2.0 * l0 * a1 + (a2 + 4.0 * l0) * (c1 + tau + 1.0 + 2.0 * l0 * a0));
    double t_max = 1.0 / verdict.mu_tau;
    double anchor = u0[i0];

    verdict.worst_margin = std::numeric_limits<double>::infinity();
    auto check = [&](double t, std::span<const double> u) {
        for (std::size_t i = 0; i < count; ++i) {
            double hump = t > 0.0 ? 2.0 * l0 * std::sqrt(t) * erf_profile(std::abs(ctx.z[i] - z0) / std::sqrt(t))
                                  : 2.0 * l0 * std::abs(ctx.z[i] - z0);
            double upper = anchor + tau + verdict.mu_tau * t + hump;
            double lower = anchor - tau - verdict.mu_tau * t - hump;
            double margin = std::min(upper - u[i], u[i] - lower);
            ++verdict.checks;
            if (margin < verdict.worst_margin) {
                verdict.worst_margin = margin;
                verdict.z_at = ctx.z[i];
                verdict.t_at = t;
            }
        }
    };
    check(0.0, u0);

    EvolutionState st;
    st.u.assign(u0.begin(), u0.end());
    st.u[0] = 0.0;
    st.u[count - 1] = 0.0;
    StepWorkspace ws;
    while (st.t < t_max - 1e-15) {
        double dt = std::min({advection_cap(ctx, st.u), t_max / 16.0, t_max - st.t});
        advance(ctx, st, dt, ws);
        check(st.t, st.u);
    }
    verdict.ok = verdict.worst_margin >= -1e-9;
    return verdict;
}

BarrierVerdict boundary_barrier_check(const CoefficientSet& ctx, const ModulusProfile& initial) {
    std::size_t count = ctx.nodes();
    if (initial.z.size() != count) fail("invalid system", "initial profile grid mismatch");
    PruferProblem prob = problem_of(ctx);
    double half = ctx.z.back();

    std::vector<double> u0(count);
    for (std::size_t i = 0; i < count; ++i) u0[i] = initial.psi[i] - ctx.psi_tilde[i];
    u0[0] = 0.0;
    u0[count - 1] = 0.0;

    double kappa = 0.5 * half;
    for (const auto& kn : initial.kinks)
        kappa = std::min({kappa, kn.z, half - kn.z});
    kappa = std::max(kappa, 4.0 * ctx.h);

    double c1 = sup_abs(u0);
    double l_full = 0.0;
    for (std::size_t i = 0; i + 1 < count; ++i)
        l_full = std::max(l_full, std::abs(u0[i + 1] - u0[i]) / ctx.h);
    double m_const = 2.0 * c1;
    double alpha1 = 2.0 * c1 + sup_abs(ctx.a1);
    double alpha2 = 2.0 * c1 * c1 * std::tan(half) + c1 * sup_abs(ctx.a2);
    double c0 = std::min(0.25, 1.0 / (2.0 * std::max(l_full, 1e-12)));

    // per-side curvature bound of the initial data over its smooth end piece
    auto side_beta0 = [&](bool left) {
        double worst = 0.0;
        for (std::size_t i = 0; i < count; ++i) {
            double dist = left ? ctx.z[i] : half - ctx.z[i];
            if (dist > kappa) continue;
            double own = stationary_curvature(prob, ctx.z[i], initial.psi[i], initial.piece_c[i]);
            double chart = stationary_curvature(prob, ctx.z[i], ctx.psi_tilde[i], ctx.c);
            worst = std::max(worst, std::abs(own - chart));
        }
        return 4.0 * std::max(alpha1, alpha2) + worst;
    };
    double beta_left = side_beta0(true);
    double beta_right = side_beta0(false);

    // f(x) = log(1 + beta0 x / k1)/beta0 with k1 = c0 exp(-M beta0), evaluated
    // through logarithms so huge M beta0 cannot overflow
    auto barrier_f = [&](double x, double beta0) {
        if (x <= 0.0) return 0.0;
        double t = std::log(beta0 * x / c0) + m_const * beta0;
        double lg = t > 35.0 ? t : std::log1p(std::exp(t));
        return lg / beta0;
    };
    auto sigma_of = [&](double beta0) {
        double k1 = c0 * std::exp(-m_const * beta0);
        return std::min({(c0 - k1) / beta0, half, kappa});
    };
    double sigma_left = sigma_of(beta_left);
    double sigma_right = sigma_of(beta_right);

    BarrierVerdict verdict;
    verdict.sigma = sigma_left;
    verdict.worst_margin = std::numeric_limits<double>::infinity();
    auto check = [&](double t, std::span<const double> u) {
        for (std::size_t i = 1; i + 1 < count; ++i) {
            double f = -1.0;
            if (ctx.z[i] <= sigma_left) f = barrier_f(ctx.z[i], beta_left);
            else if (half - ctx.z[i] <= sigma_right) f = barrier_f(half - ctx.z[i], beta_right);
            if (f < 0.0) continue;
            double margin = std::min(u0[i] + f - u[i], u[i] - (u0[i] - f));
            ++verdict.checks;
            if (margin < verdict.worst_margin) {
                verdict.worst_margin = margin;
                verdict.z_at = ctx.z[i];
                verdict.t_at = t;
            }
        }
    };

    EvolutionState st;
    st.u = u0;
    StepWorkspace ws;
    for (int s = 0; s < 100; ++s) {
        advance(ctx, st, advection_cap(ctx, st.u), ws);
        check(st.t, st.u);
    }
    verdict.ok = verdict.worst_margin >= -1e-9;
    return verdict;
}

std::vector<double> mollify_initial(const CoefficientSet& ctx, const ModulusProfile& initial,
                                    double eps) {
    std::size_t count = ctx.nodes();
    if (initial.z.size() != count) fail("invalid system", "initial profile grid mismatch");
    if (!(eps > 0.0)) fail("invalid system", "mollification width must be positive");
    double half = ctx.z.back();

    std::vector<double> u(count);
    for (std::size_t i = 0; i < count; ++i) u[i] = initial.psi[i] - ctx.psi_tilde[i];
    u[0] = 0.0;
    u[count - 1] = 0.0;

    for (std::size_t ki = 0; ki < initial.kinks.size(); ++ki) {
        const auto& kn = initial.kinks[ki];
        double room = std::min(kn.z, half - kn.z);
        if (ki > 0) room = std::min(room, kn.z - initial.kinks[ki - 1].z);
        if (ki + 1 < initial.kinks.size()) room = std::min(room, initial.kinks[ki + 1].z - kn.z);
        double delta = std::min(4.0 * eps / std::max(std::abs(kn.jump), 1e-12), 0.45 * room);
        delta = std::max(delta, 2.0 * ctx.h);

        std::size_t ia = 1, ib = count - 2;
        for (std::size_t i = 0; i < count; ++i) {
            if (ctx.z[i] <= kn.z - delta) ia = i;
            if (ctx.z[i] >= kn.z + delta) {
                ib = i;
                break;
            }
        }
        if (ib <= ia + 1) continue;
        double za = ctx.z[ia], zb = ctx.z[ib];
        double ua = u[ia], ub = u[ib];
        double sa = initial.dpsi[ia] - ctx.dpsi_tilde[ia];
        double sb = initial.dpsi[ib] - ctx.dpsi_tilde[ib];
        double w = zb - za;
        for (std::size_t i = ia + 1; i < ib; ++i) {
            double s = (ctx.z[i] - za) / w;
            double h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
            double h10 = s * (1.0 - s) * (1.0 - s);
            double h01 = s * s * (3.0 - 2.0 * s);
            double h11 = s * s * (s - 1.0);
            double blend = h00 * ua + h10 * w * sa + h01 * ub + h11 * w * sb;
            // the rounded corner must stay below the kinked profile
            u[i] = std::min(blend, u[i]);
        }
    }
    return u;
}

}  // namespace gaplab
