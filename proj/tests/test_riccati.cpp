#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "gaplab/error.hpp"
#include "gaplab/model.hpp"
#include "gaplab/prufer.hpp"
#include "gaplab/riccati.hpp"

using namespace gaplab;

namespace {

constexpr double kPi = std::numbers::pi;

PruferProblem make_n3_D2() { return {3, 2.0, kPi * kPi / 4.0 - 1.0}; }

// supersolution crossing for n=2, D=2, k=2, s=1, frozen from the first
// certified run of the branch-intersection search
constexpr double kCrossing_n2_k2_s1 = 0.467863267;

// shifts found for the synthetic lift predicate below (bisection width 1e-3)
constexpr double kSyntheticS[3] = {0.147705, 0.293579, 0.439453};

// predicate demanding the profile sit 0.05*k above the coupling-c(1/k)
// profile at z = 0.3; monotone in s because the profile is
double lift_target(const PruferProblem& prob, int k) {
    StationaryModulus sm(prob, solve_robin_coupling(prob, 1.0 / k), 2001);
    return sm.psi(0.3) + 0.05 * k;
}

ModulusPredicate lift_predicate(double target) {
    return [target](const SupersolutionProfile& sp) {
        double best = 1e9, val = 0.0;
        for (std::size_t i = 0; i < sp.z.size(); ++i)
            if (std::abs(sp.z[i] - 0.3) < best) {
                best = std::abs(sp.z[i] - 0.3);
                val = sp.psi[i];
            }
        return val >= target;
    };
}

}  // namespace

TEST_CASE("riccati: V potential endpoint formulas") {
    PruferProblem pp = make_n3_D2();
    for (double c : {0.0, 0.3, 2.0}) {
        // (n-1)(n-3) = 0 at n=3, so the potential rises with z whenever c > 0
        CHECK(v_potential(pp, c, 0.0) == doctest::Approx(c - 0.5 * (pp.n - 1) - pp.mu0));
        CHECK(inf_v(pp, c) == doctest::Approx(v_potential(pp, c, 0.0)));
        CHECK(sup_v(pp, c) == doctest::Approx(v_potential(pp, c, pp.half())));
    }
    // negative leading coefficient flips the endpoints
    PruferProblem p2{2, 2.0, 1.0};  // (n-1)(n-3) = -1
    CHECK(inf_v(p2, 0.0) == doctest::Approx(v_potential(p2, 0.0, p2.half())));
    CHECK(sup_v(p2, 0.0) == doctest::Approx(v_potential(p2, 0.0, 0.0)));
}

TEST_CASE("riccati: n=1 constant potential makes the tanh form exact") {
    PruferProblem pp{1, 2.0, -1.0};  // V = -mu0 = 1 at c = 0
    CHECK(sup_v(pp, 0.0) == doctest::Approx(1.0));
    CHECK(inf_v(pp, 0.0) == doctest::Approx(1.0));
    auto grid = Grid1D::uniform(0.0, 1.0, 101);
    auto L = solve_branch_left(pp, 0.0, grid.nodes);
    for (std::size_t i = 0; i < L.z.size(); ++i)
        CHECK(std::abs(L.psi[i] - std::tanh(L.z[i])) < 1e-12);
}

TEST_CASE("riccati: both branches at c(1/k) reproduce the chart profile") {
    PruferProblem pp = make_n3_D2();
    auto grid = modulus_grid(pp, 4001);
    for (double k : {1.0, 2.0, 4.0}) {
        double c = solve_robin_coupling(pp, 1.0 / k);
        auto L = solve_branch_left(pp, c, grid.nodes);
        auto R = solve_branch_right(pp, k, c, grid.nodes);
        StationaryModulus sm(pp, c, 4001);
        REQUIRE(L.complete());
        REQUIRE(R.complete());
        REQUIRE(L.z.size() == grid.nodes.size());
        REQUIRE(R.z.size() == grid.nodes.size());
        CHECK(L.psi.front() == 0.0);
        CHECK(R.psi.back() == -k);
        double worst_lr = 0.0, worst_chart = 0.0;
        for (std::size_t i = 0; i < grid.nodes.size(); ++i) {
            worst_lr = std::max(worst_lr, std::abs(L.psi[i] - R.psi[i]));
            worst_chart = std::max(worst_chart, std::abs(L.psi[i] - sm.psi(grid.nodes[i])));
        }
        CHECK(worst_lr < 1e-6);
        CHECK(worst_chart < 1e-6);
    }
}

TEST_CASE("riccati: branch ordering in the coupling at 50 interior samples") {
    PruferProblem pp = make_n3_D2();
    std::vector<double> zs;
    for (int i = 1; i <= 50; ++i) zs.push_back(i / 51.0);
    const double cs[] = {0.2, 0.5, 0.9, 1.5};
    std::vector<RiccatiBranch> Ls, Rs;
    for (double c : cs) {
        Ls.push_back(solve_branch_left(pp, c, zs));
        Rs.push_back(solve_branch_right(pp, 2.0, c, zs));
    }
    for (std::size_t j = 0; j + 1 < Ls.size(); ++j) {
        for (std::size_t i = 0; i < zs.size(); ++i) {
            CHECK(Ls[j].psi[i] < Ls[j + 1].psi[i]);       // increasing in c
            double lo = Rs[j + 1].eval(zs[i]);
            double hi = Rs[j].eval(zs[i]);
            CHECK(hi > lo);                                // decreasing in c
        }
    }
}

TEST_CASE("riccati: p-substitution satisfies its first-order equation") {
    PruferProblem pp = make_n3_D2();
    auto grid = modulus_grid(pp, 4001);
    double c = solve_robin_coupling(pp, 0.5);
    auto ps = p_substitute(solve_branch_left(pp, c, grid.nodes));
    CHECK(ps.k_tilde == doctest::Approx(0.0 + k_tilde(pp, 0.0)));
    double h = ps.z[1] - ps.z[0];
    double worst = 0.0;
    for (std::size_t i = 2; i + 2 < ps.z.size(); ++i) {
        double dp = (-ps.p[i + 2] + 8.0 * ps.p[i + 1] - 8.0 * ps.p[i - 1] + ps.p[i - 2]) / (12.0 * h);
        worst = std::max(worst, std::abs(dp + ps.p[i] * ps.p[i] - ps.v[i]));
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("riccati: deep coupling deficit escapes inside the analytic window") {
    PruferProblem pp = make_n3_D2();
    auto grid = modulus_grid(pp, 4001);
    double c = solve_robin_coupling(pp, 0.5);  // k = 2
    double s = 3.0 + std::max(-inf_v(pp, c), sup_v(pp, c));
    auto R = solve_branch_right(pp, 2.0, c - s, grid.nodes);
    auto env = explicit_bounds(pp, 2.0, c, s);
    REQUIRE(R.blowup_z.has_value());
    CHECK(*R.blowup_z >= env.lower_right.z_min - 1e-9);
    CHECK(*R.blowup_z <= env.upper_right.z_min + 1e-9);
    // samples rise toward the escape: +infinity side, not a blow-down
    CHECK(R.psi.front() > 1.0);
}

TEST_CASE("riccati: integrated branches stay inside their envelopes") {
    PruferProblem pp = make_n3_D2();
    auto grid = modulus_grid(pp, 4001);
    double c = solve_robin_coupling(pp, 0.5);
    double s = 3.0 + std::max(-inf_v(pp, c), sup_v(pp, c));
    auto L = solve_branch_left(pp, c + s, grid.nodes);
    auto R = solve_branch_right(pp, 2.0, c - s, grid.nodes);
    auto env = explicit_bounds(pp, 2.0, c, s);
    for (int i = 1; i <= 50; ++i) {
        double z = i / 51.0;
        CHECK(env.upper_left.psi(z) - L.eval(z) >= -1e-6);
        CHECK(L.eval(z) - env.lower_left.psi(z) >= -1e-6);
        double zr = std::max(env.upper_right.z_min, R.blowup_z.value_or(0.0));
        double zq = zr + (pp.half() - zr) * i / 51.0;
        if (zq > R.z.front()) {
            CHECK(env.upper_right.psi(zq) - R.eval(zq) >= -1e-6);
            if (zq > env.lower_right.z_min + 1e-3)
                CHECK(R.eval(zq) - env.lower_right.psi(zq) >= -1e-6);
        }
    }
    // the right-side formula rises without bound at its validity endpoint
    CHECK(env.upper_right.psi(env.upper_right.z_min + 1e-7) > 1e3);
}

TEST_CASE("riccati: lower envelopes refuse an insufficient shift") {
    PruferProblem pp = make_n3_D2();
    double c = 0.8;
    double gate = std::max(-inf_v(pp, c), sup_v(pp, c));
    try {
        explicit_bounds(pp, 2.0, c, 0.5 * gate);
        FAIL("expected throw");
    } catch (const NumericsError& e) {
        CHECK(e.kind() == "s too small for lambda bounds");
    }
}

TEST_CASE("riccati: supersolution endpoints, crossing, and s=0 collapse") {
    PruferProblem p2{2, 2.0, model_gap(ModelProblem::make(2, 2.0, 3001)).mu0};
    auto sp = supersolution(p2, 2.0, 1.0, 4001);
    CHECK(sp.psi.front() == 0.0);
    CHECK(sp.psi.back() == -2.0);
    REQUIRE(sp.crossing_z.has_value());
    CHECK(*sp.crossing_z == doctest::Approx(kCrossing_n2_k2_s1).epsilon(1e-6));
    CHECK(*sp.crossing_z > 0.0);
    CHECK(*sp.crossing_z < p2.half());

    auto sp0 = supersolution(p2, 2.0, 0.0, 4001);
    CHECK_FALSE(sp0.crossing_z.has_value());
    StationaryModulus sm(p2, sp0.c, 4001);
    for (std::size_t i = 0; i < sp0.z.size(); ++i)
        CHECK(std::abs(sp0.psi[i] - sm.psi(sp0.z[i])) < 1e-8);
}

TEST_CASE("riccati: shift search collapses for a trivial predicate and errors at the cap") {
    PruferProblem pp = make_n3_D2();
    auto always = [](const SupersolutionProfile&) { return true; };
    auto ms = find_s_of_k(pp, 2.0, always, 1.0, 1e-3, 1001);
    CHECK(ms.s == 0.0);
    CHECK(ms.monotone_ok);

    auto never = [](const SupersolutionProfile&) { return false; };
    try {
        find_s_of_k(pp, 2.0, never, 1.0, 1e-3, 1001);
        FAIL("expected throw");
    } catch (const NumericsError& e) {
        CHECK(e.kind() == "s cap exceeded; modulus premise unverified at this resolution");
    }
}

TEST_CASE("riccati: synthetic lift predicate reproduces frozen shifts") {
    PruferProblem pp = make_n3_D2();
    for (int k = 1; k <= 3; ++k) {
        auto ms = find_s_of_k(pp, k, lift_predicate(lift_target(pp, k)), 5.0, 1e-3, 2001);
        CHECK(ms.monotone_ok);
        CHECK(std::abs(ms.s - kSyntheticS[k - 1]) < 2e-3);
    }
}

TEST_CASE("riccati: synthetic modulus carries negative kink jumps") {
    PruferProblem pp = make_n3_D2();
    std::vector<double> s_of(kSyntheticS, kSyntheticS + 3);
    auto mp = initial_modulus(pp, 3, s_of, 2001);
    CHECK(mp.psi.front() == 0.0);
    CHECK(mp.psi.back() == -3.0);
    REQUIRE(mp.kinks.size() >= 1);
    CHECK(mp.lipschitz_const > 0.0);
    CHECK(mp.lipschitz_const < 100.0);
    double h = pp.half() / 2000.0;
    for (const auto& kn : mp.kinks) {
        CHECK(kn.jump <= 0.0);
        // jump agrees with slopes differenced on samples flanking the kink cell
        std::size_t i = 0;
        while (i + 1 < mp.z.size() && mp.z[i + 1] < kn.z) ++i;
        REQUIRE(i >= 2);
        REQUIRE(i + 3 < mp.z.size());
        double left = (mp.psi[i] - mp.psi[i - 2]) / (mp.z[i] - mp.z[i - 2]);
        double right = (mp.psi[i + 3] - mp.psi[i + 1]) / (mp.z[i + 3] - mp.z[i + 1]);
        CHECK(std::abs((right - left) - kn.jump) < 0.1 * std::abs(kn.jump) + 0.02);
    }

    // stationary consistency away from kinks
    double worst = 0.0;
    for (std::size_t i = 2; i + 2 < mp.z.size(); ++i) {
        bool near_kink = false;
        for (const auto& kn : mp.kinks)
            if (std::abs(mp.z[i] - kn.z) < 5.0 * h) near_kink = true;
        if (near_kink) continue;
        double fd = (-mp.psi[i + 2] + 8.0 * mp.psi[i + 1] - 8.0 * mp.psi[i - 1] + mp.psi[i - 2]) / (12.0 * h);
        double rhs = stationary_rate(pp, mp.z[i], mp.psi[i], mp.piece_c[i]);
        worst = std::max(worst, std::abs(fd - rhs));
    }
    CHECK(worst < 1e-6);

    // strict dichotomy: the lifted profile sits strictly above the chart one
    StationaryModulus sm(pp, solve_robin_coupling(pp, 1.0 / 3.0), 2001);
    double min_gap = 1e9;
    for (std::size_t i = 1; i + 1 < mp.z.size(); ++i)
        min_gap = std::min(min_gap, mp.psi[i] - sm.psi(mp.z[i]));
    CHECK(min_gap > 0.0);
}

TEST_CASE("riccati: modulus is pointwise non-increasing in k") {
    PruferProblem pp = make_n3_D2();
    std::vector<double> s2(kSyntheticS, kSyntheticS + 2);
    std::vector<double> s3(kSyntheticS, kSyntheticS + 3);
    auto m2 = initial_modulus(pp, 2, s2, 2001);
    auto m3 = initial_modulus(pp, 3, s3, 2001);
    for (int i = 0; i < 100; ++i) {
        std::size_t idx = 1 + i * (m2.z.size() - 2) / 99;
        CHECK(m3.psi[idx] <= m2.psi[idx] + 1e-12);
    }
    // k=1 is the single-profile case
    std::vector<double> s1(kSyntheticS, kSyntheticS + 1);
    auto m1 = initial_modulus(pp, 1, s1, 2001);
    auto sp = supersolution(pp, 1.0, kSyntheticS[0], 2001);
    double worst = 0.0;
    for (std::size_t i = 0; i < m1.z.size(); ++i)
        worst = std::max(worst, std::abs(m1.psi[i] - sp.psi[i]));
    CHECK(worst < 1e-10);
}

TEST_CASE("riccati: ball shifts vanish, so the modulus equals the chart profile") {
    // dichotomy case (a): with every shift zero the min over j is the last
    // chart profile, since couplings fall and left branches rise in c
    PruferProblem pp = make_n3_D2();
    std::vector<double> zero(3, 0.0);
    auto mp = initial_modulus(pp, 3, zero, 2001);
    StationaryModulus sm(pp, solve_robin_coupling(pp, 1.0 / 3.0), 2001);
    double worst = 0.0;
    for (std::size_t i = 0; i < mp.z.size(); ++i)
        worst = std::max(worst, std::abs(mp.psi[i] - sm.psi(mp.z[i])));
    CHECK(worst < 1e-8);
    CHECK(mp.kinks.empty());
}

TEST_CASE("riccati: left branch reports an interior escape as a bound violation") {
    PruferProblem pp = make_n3_D2();
    auto grid = Grid1D::uniform(0.0, 1.0, 101);
    try {
        solve_branch_left(pp, -50.0, grid.nodes);
        FAIL("expected throw");
    } catch (const NumericsError& e) {
        CHECK(e.kind() == "bound violation");
    }
}
