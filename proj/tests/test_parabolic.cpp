#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "gaplab/error.hpp"
#include "gaplab/model.hpp"
#include "gaplab/parabolic.hpp"
#include "gaplab/riccati.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

using namespace gaplab;

namespace {

constexpr double kPi = 3.14159265358979323846;

// doctest::Approx adds a unit scale term, so for values far below one the
// comparison must be written out explicitly
bool rel_close(double value, double target, double tol) {
    return std::abs(value - target) <= tol * std::abs(target);
}

PruferProblem reference_problem(int n) {
    return PruferProblem{n, 2.0, model_gap(ModelProblem::make(n, 2.0, 2001)).mu0};
}

std::vector<double> shifted_field(const CoefficientSet& ctx, const ModulusProfile& mp) {
    std::vector<double> u(ctx.nodes());
    for (std::size_t i = 0; i < ctx.nodes(); ++i) u[i] = mp.psi[i] - ctx.psi_tilde[i];
    u.front() = 0.0;
    u.back() = 0.0;
    return u;
}

}  // namespace

TEST_CASE("coefficient set validates its inputs and samples the chart") {
    PruferProblem pp = reference_problem(2);
    CHECK_THROWS_WITH_AS(make_coefficients(pp, 0.0, 101), doctest::Contains("invalid system"),
                         NumericsError);
    CHECK_THROWS_WITH_AS(make_coefficients(pp, 2.0, 8), doctest::Contains("invalid grid"),
                         NumericsError);

    auto ctx = make_coefficients(pp, 2.0, 101);
    CHECK(ctx.nodes() == 101);
    CHECK(ctx.z.front() == 0.0);
    CHECK(ctx.z.back() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(ctx.psi_tilde.back() == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(ctx.a1.size() == 101);
    CHECK(ctx.a2.size() == 101);
    for (std::size_t i = 0; i < ctx.nodes(); ++i) {
        CHECK(std::isfinite(ctx.a1[i]));
        CHECK(std::isfinite(ctx.a2[i]));
    }
}

TEST_CASE("field equation matches the closed form on a linear profile") {
    PruferProblem pp = reference_problem(2);
    auto ctx = make_coefficients(pp, 2.0, 101);
    double k = 2.0, d = 2.0;
    std::vector<double> psi(ctx.nodes());
    for (std::size_t i = 0; i < ctx.nodes(); ++i) psi[i] = -2.0 * k * ctx.z[i] / d;
    auto rhs = rhs_psi(ctx, psi);
    // psi'' = 0 and central differences are exact on linear data, so the
    // discrete operator must agree with the pointwise expression
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < ctx.nodes(); ++i) {
        double z = ctx.z[i], t = std::tan(z);
        double sym = 8.0 * k * k * z / (d * d) + (2.0 * k / d) * (pp.n + 1) * t -
                     (8.0 * k * k * z * z / (d * d)) * t +
                     (2.0 * k * z / d) * (pp.n - 1) * (1.0 - t * t) - 2.0 * pp.mu0 * t;
        worst = std::max(worst, std::abs(rhs[i] - sym));
    }
    CHECK(worst < 1e-10);
    CHECK(rhs.front() == 0.0);
    CHECK(rhs.back() == 0.0);
}

TEST_CASE("one dimensional zero profile reduces the field equation to its forcing") {
    double mu0 = kPi * kPi / 4.0;
    PruferProblem pp{1, 2.0, mu0};
    auto ctx = make_coefficients(pp, 1.0, 101);
    std::vector<double> zero(ctx.nodes(), 0.0);
    auto rhs = rhs_psi(ctx, zero);
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < ctx.nodes(); ++i)
        worst = std::max(worst, std::abs(rhs[i] + 2.0 * mu0 * ctx.tan_z[i]));
    CHECK(worst <= 1e-15);
}

TEST_CASE("chart residual shrinks at second order under grid refinement") {
    PruferProblem pp = reference_problem(2);
    auto coarse = make_coefficients(pp, 2.0, 101);
    auto fine = make_coefficients(pp, 2.0, 1001);
    double rc = 0.0, rf = 0.0;
    for (double v : rhs_psi(coarse, coarse.psi_tilde)) rc = std::max(rc, std::abs(v));
    for (double v : rhs_psi(fine, fine.psi_tilde)) rf = std::max(rf, std::abs(v));
    CHECK(rel_close(rc, 1.209451e-2, 1e-3));
    CHECK(rel_close(rf, 1.362770e-4, 1e-3));
    double ratio = rc / rf;
    CHECK(ratio > 50.0);
    CHECK(ratio < 130.0);
}

TEST_CASE("zero shift is an exact fixed point of the discrete step") {
    PruferProblem pp = reference_problem(2);
    auto ctx = make_coefficients(pp, 2.0, 201);
    EvolutionState st;
    st.u.assign(ctx.nodes(), 0.0);
    double taken = flow_step(ctx, st, 1e-3);
    CHECK(taken == 1e-3);
    double sup = 0.0;
    for (double v : st.u) sup = std::max(sup, std::abs(v));
    CHECK(sup == 0.0);
    CHECK(st.step_count == 1);
}

TEST_CASE("step halving contracts the update at first order") {
    PruferProblem pp = reference_problem(2);
    auto ctx = make_coefficients(pp, 2.0, 201);
    auto run = [&](double dt) {
        EvolutionState st;
        st.u.resize(ctx.nodes());
        for (std::size_t i = 0; i < ctx.nodes(); ++i)
            st.u[i] = 0.3 * std::sin(kPi * ctx.z[i] / ctx.z.back());
        while (st.t < 0.02 - 1e-12) flow_step(ctx, st, dt);
        return st.u;
    };
    std::vector<double> diffs;
    for (double dt : {2e-4, 1e-4, 5e-5}) {
        auto a = run(dt);
        auto b = run(dt * 0.5);
        double sup = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) sup = std::max(sup, std::abs(a[i] - b[i]));
        diffs.push_back(sup);
    }
    CHECK(diffs[0] / diffs[1] > 1.8);
    CHECK(diffs[0] / diffs[1] < 2.5);
    CHECK(diffs[1] / diffs[2] > 1.8);
    CHECK(diffs[1] / diffs[2] < 2.5);
}

TEST_CASE("shifted two dimensional flow settles on the chart") {
    PruferProblem pp = reference_problem(2);
    auto mp = initial_modulus(pp, 2, std::vector<double>{0.15, 0.30}, 1001);
    FlowOptions opt;
    opt.tol = 1e-6;
    opt.t_end = 12.0;
    auto rep = evolve_modulus(pp, mp, opt);

    CHECK(rep.converged);
    CHECK(rep.t_final == doctest::Approx(1.098697).epsilon(1e-3));
    CHECK(rel_close(rep.sup_error_final, 9.720942e-7, 1e-2));
    CHECK(rel_close(rep.stationary_residual_final, 9.280777e-6, 1e-2));
    CHECK(rel_close(rep.field_tol, 1.362770e-3, 1e-3));
    CHECK(rep.monotonicity_violations == 0);
    CHECK(rep.sandwich_violations == 0);
    CHECK(rep.worst_monotonicity < 1e-7);
    CHECK(rep.worst_sandwich < 1e-6);
    CHECK(rep.strict_delta > 4e-5);
    CHECK(rep.strict_delta < 8e-5);
    CHECK(rep.lipschitz_initial == doctest::Approx(7.082268).epsilon(1e-4));
    CHECK(rep.lipschitz_max <= rep.lipschitz_initial * 1.001);
    CHECK(rep.decay_rate > 8.0);
    CHECK(rep.sup_errors.front() == doctest::Approx(0.167339).epsilon(1e-3));
    REQUIRE(rep.times.size() == rep.sup_errors.size());
    CHECK(rep.times.size() > 100);
    std::size_t increases = 0;
    for (std::size_t i = 1; i < rep.sup_errors.size(); ++i)
        if (rep.sup_errors[i] > rep.sup_errors[i - 1] + rep.field_tol) ++increases;
    CHECK(increases == 0);
    double sup_final = 0.0;
    for (double v : rep.u_final) sup_final = std::max(sup_final, std::abs(v));
    CHECK(sup_final == rep.sup_error_final);
}

TEST_CASE("shifted three dimensional flow settles on the chart") {
    PruferProblem pp = reference_problem(3);
    auto mp = initial_modulus(pp, 2, std::vector<double>{0.15, 0.30}, 1001);
    FlowOptions opt;
    opt.tol = 1e-6;
    opt.t_end = 12.0;
    auto rep = evolve_modulus(pp, mp, opt);

    CHECK(rep.converged);
    CHECK(rep.t_final == doctest::Approx(1.039436).epsilon(1e-3));
    CHECK(rel_close(rep.sup_error_final, 9.746191e-7, 1e-2));
    CHECK(rel_close(rep.stationary_residual_final, 1.019265e-5, 1e-2));
    CHECK(rel_close(rep.field_tol, 3.925425e-3, 1e-3));
    CHECK(rep.monotonicity_violations == 0);
    CHECK(rep.sandwich_violations == 0);
    CHECK(rep.strict_delta > 8e-5);
    CHECK(rep.strict_delta < 1.2e-4);
    CHECK(rep.lipschitz_initial == doctest::Approx(10.167775).epsilon(1e-4));
    CHECK(rep.lipschitz_max <= rep.lipschitz_initial * 1.001);
    CHECK(rep.decay_rate > 8.0);
    CHECK(rep.sup_errors.front() == doctest::Approx(0.155735).epsilon(1e-3));
}

TEST_CASE("flow refuses a profile sampled on a foreign grid") {
    PruferProblem build = reference_problem(2);
    auto mp = initial_modulus(build, 2, std::vector<double>{0.15, 0.30}, 301);
    PruferProblem other{2, 2.2, build.mu0};
    FlowOptions opt;
    CHECK_THROWS_WITH_AS(evolve_modulus(other, mp, opt), doctest::Contains("invalid grid"),
                         NumericsError);
}

TEST_CASE("flow reports a stiffness failure instead of emitting garbage") {
    PruferProblem pp = reference_problem(2);
    auto ctx = make_coefficients(pp, 2.0, 101);
    EvolutionState st;
    st.u.assign(ctx.nodes(), 0.0);
    for (std::size_t i = 1; i + 1 < ctx.nodes(); ++i) st.u[i] = 1e300;
    CHECK_THROWS_WITH_AS(flow_step(ctx, st, 1e-3), doctest::Contains("stiffness failure"),
                         NumericsError);
}

TEST_CASE("ordered fields stay ordered under the coupled flow") {
    PruferProblem pp = reference_problem(2);
    auto ctx = make_coefficients(pp, 2.0, 501);
    auto mp = initial_modulus(pp, 2, std::vector<double>{0.15, 0.30}, 501);
    auto u0 = shifted_field(ctx, mp);
    std::vector<double> zero(ctx.nodes(), 0.0);

    auto below = comparison_flow(ctx, zero, u0, 1.0);
    CHECK(below.ok);
    CHECK(below.worst_margin < below.field_tol);
    CHECK(below.worst_margin < 1e-6);

    auto equal = comparison_flow(ctx, u0, u0, 0.3);
    CHECK(equal.worst_margin == 0.0);

    std::vector<double> bumped = u0;
    for (std::size_t i = 0; i < ctx.nodes(); ++i)
        bumped[i] += 0.05 * std::sin(kPi * ctx.z[i] / ctx.z.back());
    auto bump = comparison_flow(ctx, u0, bumped, 1.0);
    CHECK(bump.ok);

    CHECK_THROWS_WITH_AS(comparison_flow(ctx, u0, zero, 0.1), doctest::Contains("invalid system"),
                         NumericsError);
}

TEST_CASE("travelling hump barrier dominates the shifted flow") {
    PruferProblem pp = reference_problem(2);
    auto ctx = make_coefficients(pp, 2.0, 501);
    auto mp = initial_modulus(pp, 2, std::vector<double>{0.15, 0.30}, 501);
    auto u0 = shifted_field(ctx, mp);
    double tau = 0.1;
    auto hb = heat_barrier_check(ctx, u0, 0.5, tau);
    CHECK(hb.ok);
    // the slack is exactly tau at the anchor point at time zero
    CHECK(hb.worst_margin == doctest::Approx(tau).epsilon(1e-6));
    CHECK(hb.mu_tau == doctest::Approx(44.35370248).epsilon(1e-6));
    CHECK(hb.checks > 10000);
}

TEST_CASE("logarithmic boundary barrier pins the field near the ends") {
    PruferProblem pp = reference_problem(2);
    auto ctx = make_coefficients(pp, 2.0, 501);
    auto mp = initial_modulus(pp, 2, std::vector<double>{0.15, 0.30}, 501);
    auto bb = boundary_barrier_check(ctx, mp);
    CHECK(bb.ok);
    CHECK(bb.worst_margin == doctest::Approx(0.30283391).epsilon(1e-4));
    CHECK(rel_close(bb.sigma, 0.00663558, 1e-3));
    CHECK(bb.checks >= 100);
}

TEST_CASE("corner rounding stays below the profile within the requested width") {
    PruferProblem pp = reference_problem(2);
    auto ctx = make_coefficients(pp, 2.0, 501);
    auto mp = initial_modulus(pp, 2, std::vector<double>{0.15, 0.30}, 501);
    auto u0 = shifted_field(ctx, mp);
    double lip0 = 0.0;
    for (std::size_t i = 0; i + 1 < ctx.nodes(); ++i)
        lip0 = std::max(lip0, std::abs(u0[i + 1] - u0[i]) / ctx.h);

    for (double eps : {1e-2, 1e-3}) {
        CAPTURE(eps);
        auto um = mollify_initial(ctx, mp, eps);
        REQUIRE(um.size() == ctx.nodes());
        double dev = 0.0, slope = 0.0;
        for (std::size_t i = 0; i + 1 < ctx.nodes(); ++i)
            slope = std::max(slope, std::abs(um[i + 1] - um[i]) / ctx.h);
        for (std::size_t i = 0; i < ctx.nodes(); ++i) {
            dev = std::max(dev, u0[i] - um[i]);
            CHECK(um[i] >= 0.0);
            CHECK(um[i] <= u0[i] + 1e-15);
        }
        CHECK(dev <= eps);
        CHECK(dev >= 0.5 * eps);
        CHECK(slope <= 2.0 * lip0);
    }
    CHECK_THROWS_WITH_AS(mollify_initial(ctx, mp, 0.0), doctest::Contains("invalid system"),
                         NumericsError);
}
