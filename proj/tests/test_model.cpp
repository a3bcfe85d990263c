#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gaplab/error.hpp"
#include "gaplab/model.hpp"

using namespace gaplab;

namespace {

constexpr double kPi = std::numbers::pi;

// Reference value for n=2, D=pi/2, frozen from a three-resolution dense
// Richardson fit (N in {2001, 4001, 8001}, observed order 1.99):
//   3.47673319574667 (N=2001/4001), 3.47673319590273 (N=4001/8001)
constexpr double kMu0_n2_HalfPi = 3.4767331959;
constexpr double kMu1_n2_HalfPi = 15.4476227880;

}  // namespace

TEST_CASE("model: n=1 closed form reproduced to 1e-8 relative") {
    for (double D : {0.5, 1.0, 2.0, 3.0}) {
        auto g = model_gap(ModelProblem::make(1, D, 4097));
        double mu0_exact = kPi * kPi / (D * D);
        CHECK(std::abs(g.mu0 / mu0_exact - 1.0) <= 1e-8);
        CHECK(std::abs(g.mu1 / (4.0 * mu0_exact) - 1.0) <= 1e-8);
        CHECK(g.certified_tol < 1e-4 * g.mu0);
    }
}

TEST_CASE("model: n=3 closed form mu_i = ((i+1)pi/D)^2 - 1") {
    // the n=3 weight makes the symmetrized operator constant-coefficient,
    // so the gap equals 3 pi^2 / D^2 exactly and the margin vanishes
    for (double D : {0.5, 2.0, 3.0}) {
        auto g = model_gap(ModelProblem::make(3, D, 2001));
        CHECK(g.mu0 == doctest::Approx(kPi * kPi / (D * D) - 1.0).epsilon(1e-9));
        CHECK(g.mu1 == doctest::Approx(4.0 * kPi * kPi / (D * D) - 1.0).epsilon(1e-9));
        CHECK(std::abs(g.margin) <= g.certified_tol);
    }
}

TEST_CASE("model: frozen dense-oracle value for n=2, D=pi/2") {
    auto g = model_gap(ModelProblem::make(2, kPi / 2, 2001));
    CHECK(g.mu0 == doctest::Approx(kMu0_n2_HalfPi).epsilon(1e-8));
    CHECK(g.mu1 == doctest::Approx(kMu1_n2_HalfPi).epsilon(1e-8));
}

TEST_CASE("model: dense Richardson order sits near 2") {
    auto p1 = ModelProblem::make(2, 1.0, 501);
    auto p2 = ModelProblem::make(2, 1.0, 1001);
    auto p3 = ModelProblem::make(2, 1.0, 2001);
    double m1 = solve_spectrum_dense(p1, 1)[0].value;
    double m2 = solve_spectrum_dense(p2, 1)[0].value;
    double m3 = solve_spectrum_dense(p3, 1)[0].value;
    double order = std::log2(std::abs(m2 - m1) / std::abs(m3 - m2));
    CHECK(order > 1.9);
    CHECK(order < 2.1);
}

TEST_CASE("model: dense and shooting agree on a graded high-dimension case") {
    auto prob = ModelProblem::make(5, 3.0, 1501);
    CHECK(prob.grid.spacing == Spacing::GradedRight);
    auto g = model_gap(prob);  // internal cross-check enforces 1e-6 agreement
    // raw single-resolution values differ from the refined ones by the
    // discretization error the certified tolerance accounts for
    auto dense = solve_spectrum_dense(prob, 2);
    CHECK(std::abs(dense[0].value - g.mu0) < 2.0 * g.certified_tol);
    CHECK(std::abs(dense[1].value - g.mu1) < 2.0 * g.certified_tol);
}

TEST_CASE("model: eigenfunction shape, parity, and normalization") {
    auto g = model_gap(ModelProblem::make(2, 2.0, 801));
    CHECK(g.ground.parity == Parity::Even);
    CHECK(g.excited.parity == Parity::Odd);

    // derivative normalization is exact on the shooting samples
    CHECK(g.ground.dphi.back() == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(g.excited.dphi.back() == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(g.ground.phi.back() == 0.0);

    // ground state positive on the open half-interval, even: phi'(0) = 0
    for (std::size_t i = 0; i + 1 < g.ground.phi.size(); ++i) CHECK(g.ground.phi[i] > 0.0);
    CHECK(std::abs(g.ground.dphi.front()) < 1e-10);
    // excited vanishes at the center, positive inside
    CHECK(g.excited.phi.front() == doctest::Approx(0.0));
    for (std::size_t i = 1; i + 1 < g.excited.phi.size(); ++i) CHECK(g.excited.phi[i] > 0.0);

    auto sup = solve_spectrum_dense(ModelProblem::make(2, 2.0, 801), 1, Normalization::SupNorm);
    double mx = 0.0;
    for (double v : sup[0].phi) mx = std::max(mx, std::abs(v));
    CHECK(mx == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("model: plain Laplacian shooting matches pencil at 2000 nodes") {
    auto prob = ModelProblem::make(1, 2.0, 2000);
    double exact = kPi * kPi / 4.0;
    auto dense = solve_spectrum_dense(prob, 1);
    auto shot = solve_spectrum_shooting(prob, 0, exact - 0.5, exact + 0.5);
    CHECK(std::abs(dense[0].value - shot.value) < 1e-6 * exact);
}

TEST_CASE("model: domain validation errors") {
    CHECK_THROWS_AS(ModelProblem::make(1, kPi, 101), NumericsError);
    CHECK_THROWS_AS(ModelProblem::make(1, -1.0, 101), NumericsError);
    CHECK_THROWS_AS(ModelProblem::make(0, 1.0, 101), NumericsError);
    try {
        ModelProblem::make(2, 3.5, 101);
        FAIL("expected throw");
    } catch (const NumericsError& e) {
        CHECK(e.kind() == "diameter out of range");
    }
}

TEST_CASE("model: shooting without a sign change reports bracket failure") {
    auto prob = ModelProblem::make(2, 1.0, 201);
    try {
        solve_spectrum_shooting(prob, 0, 1.0, 2.0);  // mu0 ~ 9.1, far outside
        FAIL("expected throw");
    } catch (const NumericsError& e) {
        CHECK(e.kind() == "bracket failure");
    }
}
