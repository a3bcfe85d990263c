#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "gaplab/prufer.hpp"
#include "gaplab/riccati.hpp"

namespace gaplab {

// Frozen coefficient fields for the flow in the shifted variable
// u = psi - psi_chart on a uniform grid over [0, D/2]. The chart profile and
// its derivative are exact at the nodes, so u == 0 is an exact fixed point of
// the discrete scheme.
struct CoefficientSet {
    int n = 0;
    double D = 0.0;
    double mu0 = 0.0;
    double k = 0.0;
    double c = 0.0;  // coupling of the chart profile, c(1/k)
    double h = 0.0;
    std::vector<double> z;
    std::vector<double> tan_z;
    std::vector<double> psi_tilde;   // chart profile at nodes
    std::vector<double> dpsi_tilde;  // exact first derivative at nodes
    std::vector<double> a1;          // 2*psi_tilde - (n+1)tan
    std::vector<double> a2;          // 2*dpsi_tilde - 4tan*psi_tilde - (n-1)(1-tan^2)

    std::size_t nodes() const { return z.size(); }
};

CoefficientSet make_coefficients(const PruferProblem& prob, double k, std::size_t nodes);

// Full right-hand side of the evolution equation at interior nodes, second
// order central differences; entries 0 and nodes-1 of the result are zero.
std::vector<double> rhs_psi(const CoefficientSet& ctx, std::span<const double> psi);
std::vector<double> rhs_u(const CoefficientSet& ctx, std::span<const double> u);

struct EvolutionState {
    double t = 0.0;
    std::size_t step_count = 0;
    std::vector<double> u;  // u[0] == u[N-1] == 0 always
};

// One semi-implicit step: diffusion implicit (tridiagonal solve), transport
// and reaction explicit. Rejects and halves dt when the update leaves the
// finite range, up to 20 times, then throws "stiffness failure". Returns the
// dt actually taken.
double flow_step(const CoefficientSet& ctx, EvolutionState& st, double dt_request);

struct FlowOptions {
    double t_end = 8.0;
    double tol = 1e-4;       // convergence target on sup|u|
    double fixed_dt = 0.0;   // > 0 forces a constant step (order studies)
    std::size_t record_every = 25;
};

struct ConvergenceReport {
    double k = 0.0;
    bool converged = false;
    double t_final = 0.0;
    double sup_error_final = 0.0;
    double stationary_residual_final = 0.0;
    std::vector<double> times;
    std::vector<double> sup_errors;
    std::size_t monotonicity_violations = 0;  // node-step increases above field_tol
    double worst_monotonicity = 0.0;          // largest per-step increase seen
    std::size_t sandwich_violations = 0;      // node-steps outside [0 - tol, cap + tol]
    double worst_sandwich = 0.0;
    double field_tol = 0.0;      // 10x spatial truncation of the chart profile
    double strict_delta = 0.0;   // decay floor: -max interior du/dt after t >= 0.01
    double lipschitz_initial = 0.0;
    double lipschitz_max = 0.0;  // over the whole run, in the unshifted field
    double decay_rate = 0.0;     // exponential fit of the sup_errors tail
    std::vector<double> u_final;
};

// Low-level driver: evolves raw samples; `cap` is the sandwich upper field
// (defaults to the initial data when empty).
ConvergenceReport evolve_u(const CoefficientSet& ctx, std::vector<double> u0,
                           std::span<const double> cap, const FlowOptions& opt = {});

// High-level driver: takes the piecewise initial profile on its own grid.
ConvergenceReport evolve_modulus(const PruferProblem& prob, const ModulusProfile& initial,
                                 const FlowOptions& opt = {});

struct ComparisonVerdict {
    bool ok = true;
    double worst_margin = 0.0;  // max over run of (u - v); ok while <= field_tol
    double z_at = 0.0;
    double t_at = 0.0;
    double field_tol = 0.0;
};

// Co-evolves two fields with a shared step sequence and checks that the
// initial ordering u <= v is preserved.
ComparisonVerdict comparison_flow(const CoefficientSet& ctx, std::vector<double> u0,
                                  std::vector<double> v0, double t_end);

struct BarrierVerdict {
    bool ok = true;
    double worst_margin = 0.0;  // most negative (barrier - field) gap seen
    double z_at = 0.0;
    double t_at = 0.0;
    double mu_tau = 0.0;   // translating-barrier speed (heat barrier only)
    double sigma = 0.0;    // barrier interval width (boundary barrier only)
    std::size_t checks = 0;
};

// Short-time diagnostic: the field stays between the two translating heat
// barriers centred at z0 for t up to 1/mu_tau.
BarrierVerdict heat_barrier_check(const CoefficientSet& ctx, std::span<const double> u0,
                                  double z0, double tau);

// Boundary diagnostic over the first 100 accepted steps: near each endpoint
// the field stays within a logarithmic barrier of its initial data.
BarrierVerdict boundary_barrier_check(const CoefficientSet& ctx, const ModulusProfile& initial);

// C1 corner rounding of the kinked initial data on the flow grid: agrees with
// the original outside kink neighbourhoods, never exceeds it, deviates at most
// eps, and keeps the slope within twice the original Lipschitz constant.
std::vector<double> mollify_initial(const CoefficientSet& ctx, const ModulusProfile& initial,
                                    double eps);

}  // namespace gaplab
