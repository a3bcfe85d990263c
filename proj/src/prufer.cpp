#include "gaplab/prufer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gaplab/error.hpp"
#include "gaplab/interp.hpp"
#include "gaplab/ivp.hpp"
#include "gaplab/roots.hpp"

namespace gaplab {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;

IvpConfig chart_config(double span) {
    IvpConfig cfg;
    cfg.rel_tol = 1e-12;
    cfg.abs_tol = 1e-14;
    cfg.max_step = span / 64.0;
    return cfg;
}

}  // namespace

Grid1D modulus_grid(const PruferProblem& prob, std::size_t nodes) {
    if (prob.D > 2.8) return Grid1D::graded_right(0.0, prob.half(), nodes);
    return Grid1D::uniform(0.0, prob.half(), nodes);
}

double PruferProblem::v_tilde(double z) const {
    double cz = std::cos(z);
    double nm1 = static_cast<double>(n - 1);
    return 0.25 * (nm1 * (n - 3) / (cz * cz) - nm1 * nm1 - 4.0 * mu0);
}

double PruferProblem::angle_rate(double z, double q, double c) const {
    double cz = std::cos(z);
    double cq = std::cos(q);
    double sq = std::sin(q);
    return (v_tilde(z) + c / (cz * cz)) * cq * cq - sq * sq;
}

void PruferProblem::validate() const {
    if (n < 1) fail("diameter out of range", "dimension must be at least 1");
    if (!(D > 0.0) || !(D < std::numbers::pi))
        fail("diameter out of range", "D must lie in (0, pi)");
}

double prufer_angle(const PruferProblem& prob, double c, double q0, double z0, double z1) {
    prob.validate();
    if (z0 == z1) return q0;
    OdeRhs rhs = [&prob, c](double z, std::span<const double> y, std::span<double> dy) {
        dy[0] = prob.angle_rate(z, y[0], c);
    };
    double y0[1] = {q0};
    auto sol = integrate_ivp(rhs, z0, z1, y0, chart_config(std::abs(z1 - z0)));
    return sol.final_state()[0];
}

double robin_sigma(const PruferProblem& prob, double eps) {
    if (!(eps > 0.0)) fail("invalid evaluation", "eps must be positive");
    return eps / (1.0 + eps * prob.m() * std::tan(prob.half()));
}

double solve_robin_coupling(const PruferProblem& prob, double eps, double c_cap) {
    prob.validate();
    double target = std::atan(robin_sigma(prob, eps)) - kHalfPi;
    auto defect = [&](double c) { return prufer_angle(prob, c, 0.0, 0.0, prob.half()) - target; };
    auto [lo, hi] = bracket_rightward(defect, 0.0, 1.0, c_cap, "c search cap exceeded; raise cap");
    RootConfig rc;
    rc.x_tol = 1e-12 * std::max(1.0, hi);
    return find_root(defect, lo, hi, rc);
}

RobinSolution reconstruct_robin(const PruferProblem& prob, const Grid1D& grid, double eps) {
    prob.validate();
    grid.validate();
    if (std::abs(grid.a) > 1e-12 || std::abs(grid.b - prob.half()) > 1e-12)
        fail("invalid grid", "grid must span [0, D/2]");

    RobinSolution out;
    out.eps = eps;
    out.sigma = robin_sigma(prob, eps);
    out.c = solve_robin_coupling(prob, eps);

    // augmented chart: I(z) = int_0^z tan q, so int_z^{D/2} tan q = I(D/2) - I(z)
    OdeRhs rhs = [&prob, c = out.c](double z, std::span<const double> y, std::span<double> dy) {
        dy[0] = prob.angle_rate(z, y[0], c);
        dy[1] = std::tan(y[0]);
    };
    double y0[2] = {0.0, 0.0};
    auto sol = integrate_ivp(rhs, 0.0, prob.half(), y0, chart_config(prob.half()), grid.nodes);

    std::size_t count = grid.nodes.size();
    out.z = grid.nodes;
    out.q.resize(count);
    out.phi.resize(count);
    out.dphi.resize(count);
    double i_right = sol.states.back()[1];
    double cos_right = std::cos(prob.half());
    double m = prob.m();
    for (std::size_t i = 0; i < count; ++i) {
        double z = grid.nodes[i];
        double q = sol.states[i][0];
        out.q[i] = q;
        out.phi[i] = eps * std::pow(cos_right / std::cos(z), m) * std::exp(sol.states[i][1] - i_right);
        out.dphi[i] = (m * std::tan(z) + std::tan(q)) * out.phi[i];
    }
    return out;
}

StationaryModulus::StationaryModulus(const PruferProblem& prob, double c, std::size_t nodes)
    : prob_(prob), c_(c), grid_(modulus_grid(prob, nodes)) {
    prob_.validate();
    if (c < 0.0) fail("invalid evaluation", "coupling must be nonnegative");
    OdeRhs rhs = [this](double z, std::span<const double> y, std::span<double> dy) {
        dy[0] = prob_.angle_rate(z, y[0], c_);
    };
    double y0[1] = {0.0};
    auto sol = integrate_ivp(rhs, 0.0, prob_.half(), y0, chart_config(prob_.half()), grid_.nodes);
    std::size_t count = grid_.nodes.size();
    q_.resize(count);
    dq_.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        q_[i] = sol.states[i][0];
        dq_[i] = prob_.angle_rate(grid_.nodes[i], q_[i], c_);
    }
}

double StationaryModulus::angle(double z) const {
    if (z < grid_.a - 1e-12 || z > grid_.b + 1e-12)
        fail("invalid evaluation", "angle query outside [0, D/2]");
    z = std::clamp(z, grid_.a, grid_.b);
    return hermite_eval(grid_.nodes, q_, dq_, z);
}

double StationaryModulus::psi(double z) const {
    return prob_.m() * std::tan(z) + std::tan(angle(z));
}

double StationaryModulus::dpsi(double z) const {
    double p = psi(z);
    double cz = std::cos(z);
    return -p * p + (prob_.n - 1) * std::tan(z) * p - prob_.mu0 + c_ / (cz * cz);
}

StationaryModulus make_robin_log_derivative(const PruferProblem& prob, double k,
                                            std::size_t nodes) {
    if (!(k > 0.0)) fail("invalid evaluation", "k must be positive");
    return StationaryModulus(prob, solve_robin_coupling(prob, 1.0 / k), nodes);
}

}  // namespace gaplab
