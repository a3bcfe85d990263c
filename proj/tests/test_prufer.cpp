#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "gaplab/error.hpp"
#include "gaplab/model.hpp"
#include "gaplab/prufer.hpp"

using namespace gaplab;

namespace {

constexpr double kPi = std::numbers::pi;

// Robin couplings frozen from an independent fixed-step RK4 shoot on the
// original second-order equation (40000 steps, 80 bisections on
// phi(D/2) + eps phi'(D/2); agreement with the chart solver was ~1e-12).
// The n=2 row conditions on mu0 from model_gap at 3001 half-nodes.
struct FrozenCoupling {
    double eps;
    double c;
};
const std::vector<FrozenCoupling> kCoupling_n1_D1 = {
    {1.0, 7.555836348118}, {0.25, 4.926929894707}, {0.0625, 1.968362745533}};
const std::vector<FrozenCoupling> kCoupling_n2_D2 = {
    {1.0, 1.060339666773}, {0.25, 0.627347983263}, {0.0625, 0.230819421298}};
const std::vector<FrozenCoupling> kCoupling_n3_D2 = {
    {1.0, 0.877487149965}, {0.25, 0.550892766939}, {0.0625, 0.216529215722}};

PruferProblem make_n2_D2() {
    return {2, 2.0, model_gap(ModelProblem::make(2, 2.0, 3001)).mu0};
}

}  // namespace

TEST_CASE("prufer: Dirichlet chart reaches -pi/2 at the right endpoint") {
    const PruferProblem probs[] = {{1, 1.0, kPi * kPi},
                                   make_n2_D2(),
                                   {3, 2.0, kPi * kPi / 4.0 - 1.0}};
    for (const auto& pp : probs) {
        double q = prufer_angle(pp, 0.0, 0.0, 0.0, pp.half());
        CHECK(std::abs(q + kPi / 2.0) < 1e-10);
    }
}

TEST_CASE("prufer: endpoint angle is monotone in coupling and in initial angle") {
    PruferProblem pp{3, 2.0, kPi * kPi / 4.0 - 1.0};
    double prev = prufer_angle(pp, 0.0, 0.0, 0.0, 1.0);
    for (double c : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0}) {
        double q = prufer_angle(pp, c, 0.0, 0.0, 1.0);
        CHECK(q > prev);
        prev = q;
    }
    prev = prufer_angle(pp, 1.0, -0.4, 0.0, 1.0);
    for (double q0 : {-0.2, 0.0, 0.2, 0.4}) {
        double q = prufer_angle(pp, 1.0, q0, 0.0, 1.0);
        CHECK(q > prev);
        prev = q;
    }
}

TEST_CASE("prufer: coupling matches the independent shooting oracle") {
    PruferProblem p1{1, 1.0, kPi * kPi};
    for (auto fc : kCoupling_n1_D1)
        CHECK(solve_robin_coupling(p1, fc.eps) == doctest::Approx(fc.c).epsilon(1e-9));
    PruferProblem p2 = make_n2_D2();
    for (auto fc : kCoupling_n2_D2)
        CHECK(solve_robin_coupling(p2, fc.eps) == doctest::Approx(fc.c).epsilon(1e-9));
    PruferProblem p3{3, 2.0, kPi * kPi / 4.0 - 1.0};
    for (auto fc : kCoupling_n3_D2)
        CHECK(solve_robin_coupling(p3, fc.eps) == doctest::Approx(fc.c).epsilon(1e-9));
}

TEST_CASE("prufer: coupling is positive, increasing in eps, Dirichlet-small") {
    PruferProblem pp{3, 2.0, kPi * kPi / 4.0 - 1.0};
    double c16 = solve_robin_coupling(pp, 1.0 / 16.0);
    double c4 = solve_robin_coupling(pp, 0.25);
    double c1 = solve_robin_coupling(pp, 1.0);
    CHECK(c16 > 0.0);
    CHECK(c4 > c16);
    CHECK(c1 > c4);
    CHECK(solve_robin_coupling(pp, 1e-3) < 0.02);
}

TEST_CASE("prufer: coupling search respects the cap") {
    PruferProblem pp{1, 1.0, kPi * kPi};  // c(1) ~ 7.6, cap below it
    try {
        solve_robin_coupling(pp, 1.0, 2.0);
        FAIL("expected throw");
    } catch (const NumericsError& e) {
        CHECK(e.kind() == "c search cap exceeded; raise cap");
    }
}

TEST_CASE("prufer: Robin member boundary data and equation residual") {
    PruferProblem pp{3, 2.0, kPi * kPi / 4.0 - 1.0};
    auto grid = Grid1D::uniform(0.0, 1.0, 201);
    for (double eps : {1.0, 0.25, 0.0625}) {
        auto rs = reconstruct_robin(pp, grid, eps);
        CHECK(rs.phi.back() == doctest::Approx(eps).epsilon(1e-12));
        CHECK(rs.dphi.back() == doctest::Approx(-1.0).epsilon(1e-9));
        double target = std::atan(rs.sigma) - kPi / 2.0;
        CHECK(std::abs(rs.q.back() - target) < 1e-10);

        // interior residual of the second-order equation, 5-point stencil
        double h = grid.nodes[1] - grid.nodes[0];
        double worst = 0.0;
        for (std::size_t i = 2; i + 2 < rs.z.size(); ++i) {
            double d2 = (-rs.phi[i - 2] + 16.0 * rs.phi[i - 1] - 30.0 * rs.phi[i] +
                         16.0 * rs.phi[i + 1] - rs.phi[i + 2]) /
                        (12.0 * h * h);
            double cz = std::cos(rs.z[i]);
            double res = d2 - 2.0 * std::tan(rs.z[i]) * rs.dphi[i] +
                         (pp.mu0 - rs.c / (cz * cz)) * rs.phi[i];
            worst = std::max(worst, std::abs(res));
        }
        CHECK(worst < 2e-7);
    }
}

TEST_CASE("prufer: log-derivative profile hits 0 and -k at the ends") {
    PruferProblem pp = make_n2_D2();
    for (double k : {1.0, 2.0, 4.0}) {
        auto sm = make_robin_log_derivative(pp, k, 2001);
        CHECK(sm.psi(0.0) == 0.0);
        CHECK(sm.psi(pp.half()) == doctest::Approx(-k).epsilon(1e-9));
    }
}

TEST_CASE("prufer: profile interpolation agrees with direct chart integration") {
    PruferProblem pp{3, 2.0, kPi * kPi / 4.0 - 1.0};
    auto sm = make_robin_log_derivative(pp, 2.0, 2001);
    for (int j = 1; j < 20; ++j) {
        double z = j / 20.0 + 0.0001234;  // off the node lattice
        if (z >= 1.0) break;
        double direct = prufer_angle(pp, sm.coupling(), 0.0, 0.0, z);
        CHECK(std::abs(sm.angle(z) - direct) < 1e-10);
        double fd = (sm.psi(z + 5e-6) - sm.psi(z - 5e-6)) / 1e-5;
        CHECK(std::abs(fd - sm.dpsi(z)) < 1e-7 * std::max(1.0, std::abs(sm.dpsi(z))));
    }
}

TEST_CASE("prufer: profile matches the reconstructed member's log-derivative") {
    PruferProblem pp{3, 2.0, kPi * kPi / 4.0 - 1.0};
    auto grid = Grid1D::uniform(0.0, 1.0, 101);
    auto rs = reconstruct_robin(pp, grid, 0.25);
    StationaryModulus sm(pp, rs.c, 2001);
    for (std::size_t i = 0; i < rs.z.size(); ++i)
        CHECK(std::abs(rs.dphi[i] / rs.phi[i] - sm.psi(rs.z[i])) < 1e-9 * (1.0 + std::abs(sm.psi(rs.z[i]))));
}

TEST_CASE("prufer: graded chart for wide intervals stays accurate") {
    auto mp = ModelProblem::make(2, 3.0, 2001);
    PruferProblem pp{2, 3.0, model_gap(mp).mu0};
    StationaryModulus sm(pp, 0.0, 2001);
    CHECK(std::abs(sm.right_angle() + kPi / 2.0) < 1e-9);
    double z = 1.3761;
    double direct = prufer_angle(pp, 0.0, 0.0, 0.0, z);
    CHECK(std::abs(sm.angle(z) - direct) < 1e-10);
}

TEST_CASE("prufer: argument validation") {
    PruferProblem pp{2, 2.0, 2.0};
    CHECK_THROWS_AS(robin_sigma(pp, 0.0), NumericsError);
    CHECK_THROWS_AS(make_robin_log_derivative(pp, 0.0), NumericsError);
    CHECK_THROWS_AS(StationaryModulus(pp, -1.0), NumericsError);
    PruferProblem bad{2, 4.0, 2.0};
    CHECK_THROWS_AS(prufer_angle(bad, 0.0, 0.0, 0.0, 2.0), NumericsError);
    auto off_grid = Grid1D::uniform(0.0, 0.9, 51);
    CHECK_THROWS_AS(reconstruct_robin(pp, off_grid, 1.0), NumericsError);
}
