#pragma once

#include <cstddef>
#include <vector>

#include "gaplab/grid.hpp"
#include "gaplab/model.hpp"

namespace gaplab {

// Angle chart for the half-interval operator at its ground level mu0.
// With m = (n-1)/2 the substitution phibar = phi cos^m(z) turns
//     phi'' - (n-1) tan(z) phi' + (mu0 - c/cos^2 z) phi = 0
// into phibar'' = (Vt(z) + c/cos^2 z) phibar,
//     Vt(z) = [ (n-1)(n-3)/cos^2 z - (n-1)^2 - 4 mu0 ] / 4,
// and the angle q = arctan(phibar'/phibar) obeys
//     q' = (Vt + c/cos^2 z) cos^2 q - sin^2 q.
// q' = -1 on q = +-pi/2, so a trajectory started inside (-pi/2, pi/2) cannot
// leave upward, and it touches -pi/2 exactly where phi vanishes. At c = 0,
// q(D/2; q(0)=0) = -pi/2: the chart of the Dirichlet ground state.
struct PruferProblem {
    int n = 1;
    double D = 1.0;
    double mu0 = 0.0;

    double m() const { return 0.5 * (n - 1); }
    double half() const { return 0.5 * D; }
    double v_tilde(double z) const;
    double angle_rate(double z, double q, double c) const;
    void validate() const;  // throws "diameter out of range"
};

// Integrates the angle chart from q(z0) = q0 to z1 at coupling c.
double prufer_angle(const PruferProblem& prob, double c, double q0, double z0, double z1);

// Half-interval sampling grid shared by the profile machinery: uniform, or
// graded toward D/2 when the interval is wide and tan steepens.
Grid1D modulus_grid(const PruferProblem& prob, std::size_t nodes);

// Boundary slope parameter of the Robin member at softness eps:
//     sigma(eps) = eps / (1 + eps m tan(D/2)),
// so the chart target at D/2 is arctan(sigma) - pi/2.
double robin_sigma(const PruferProblem& prob, double eps);

// Unique coupling c(eps) > 0 with q(D/2; 0, c) = arctan(sigma) - pi/2. The
// angle at D/2 is strictly increasing in c, which pins the root; c(eps) is
// increasing in eps and vanishes in the Dirichlet limit eps -> 0. The
// rightward bracket search stops at c_cap and throws
// "c search cap exceeded; raise cap" beyond it.
double solve_robin_coupling(const PruferProblem& prob, double eps, double c_cap = 1e6);

// Robin member reconstructed on grid nodes (grid must span [0, D/2]):
//     phi(z) = eps (cos(D/2)/cos z)^m exp( -I(z) ),  I(z) = int_z^{D/2} tan q,
//     phi'(z) = (m tan z + tan q(z)) phi(z),
// giving phi(D/2) = eps exactly and phi'(D/2) = -1 up to the coupling root
// tolerance. phi solves the mu0-equation with the c(eps)/cos^2 z term.
struct RobinSolution {
    double eps = 0.0;
    double c = 0.0;
    double sigma = 0.0;
    std::vector<double> z;
    std::vector<double> phi;
    std::vector<double> dphi;
    std::vector<double> q;  // angle samples at the same nodes
};

RobinSolution reconstruct_robin(const PruferProblem& prob, const Grid1D& grid, double eps);

// Log-derivative profile psi = (log phi)' = m tan z + tan q(z) of the family
// member at coupling c, tabulated once through the angle chart and evaluated
// by cubic Hermite pieces (angle slopes come from the chart equation, not
// from differencing). The derivative of the profile uses the stationary
// first-order equation
//     psi' = -psi^2 + (n-1) tan(z) psi - mu0 + c / cos^2 z,
// exact in psi. At c = 0 the angle reaches -pi/2 at D/2 and psi blows down
// there; psi/dpsi are then meaningful on [0, D/2) only.
class StationaryModulus {
  public:
    StationaryModulus(const PruferProblem& prob, double c, std::size_t nodes = 4001);

    const PruferProblem& problem() const { return prob_; }
    double coupling() const { return c_; }
    double angle(double z) const;
    double right_angle() const { return q_.back(); }
    double psi(double z) const;
    double dpsi(double z) const;

  private:
    PruferProblem prob_;
    double c_ = 0.0;
    Grid1D grid_;
    std::vector<double> q_;   // angle at grid nodes
    std::vector<double> dq_;  // chart slope at grid nodes
};

// Profile with boundary data psi(0) = 0, psi(D/2) = -k: the Robin member at
// eps = 1/k. The right boundary value is exact in the sigma identity
//     m tan(D/2) + tan(arctan(sigma) - pi/2) = m tan(D/2) - 1/sigma = -k.
StationaryModulus make_robin_log_derivative(const PruferProblem& prob, double k,
                                            std::size_t nodes = 4001);

}  // namespace gaplab
