#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gaplab/model.hpp"
#include "gaplab/prufer.hpp"

namespace gaplab {

// Geodesic ball of radius R around the pole e_{n+1} of the unit n-sphere.
// Diameter 2R; R = pi/2 is the hemisphere, admitted for limit studies only.
struct CapProblem {
    int n = 2;
    double radius = 1.0;

    static CapProblem make(int n, double radius);  // throws "invalid system"
    double diameter() const { return 2.0 * radius; }
};

// Radial factor of a Dirichlet eigenfunction with angular mode l:
//     f'' + (n-1) cot(r) f' + [lambda - l(l+n-2)/sin^2 r] f = 0,
// regular at r = 0, f(R) = 0. Samples are normalized to unit sup norm;
// l = 0 keeps f > 0 on [0, R), l = 1 starts at f(0) = 0.
struct RadialEigen {
    int l = 0;
    double lambda = 0.0;
    std::vector<double> r;         // [0, R], uniform
    std::vector<double> samples;   // f
    std::vector<double> dsamples;  // f'
};

// Shooting solve: two-term series start at r = 1e-6, adaptive integration,
// boundary-value bracket in lambda, Brent refinement. The converged mode is
// validated to have no interior zero (the fundamental of its angular mode);
// a capture of an excited mode rescans with a finer bracket step.
RadialEigen cap_eigenvalue(const CapProblem& prob, int l);

// Dense oracle: symmetric finite-volume pencil A f = lambda B f on a uniform
// grid with weight sin^{n-1}(r), eigenvalue extracted by Sturm-count
// bisection. `index` counts radial modes within the angular mode l.
double dense_cap_eigenvalue(const CapProblem& prob, int l, int index, std::size_t nodes);

// Logarithmic slope profile w = f'/f of a positive radial ground state,
// integrated from its own first-order equation and queried by cubic Hermite
// pieces. Queries past r_max (0.97 of the domain) throw: the slope leaves
// the certified range as f approaches its boundary zero.
struct RadialLogSlope {
    double lambda = 0.0;
    std::vector<double> r;
    std::vector<double> value;
    std::vector<double> slope;  // equation rhs at the samples

    double r_max() const { return r.back(); }
    double eval(double rq) const;
};

// Ball side: w' = -w^2 - (n-1) cot(r) w - lambda0, w ~ -lambda0 r / n at 0.
RadialLogSlope cap_log_slope(const CapProblem& prob, double lambda0);

// Comparison side on [0, D/2): the coupling-zero stationary branch
// w' = -w^2 + (n-1) tan(z) w - mu0, w(0) = 0, the log-derivative of the
// even ground eigenfunction of the one-dimensional comparison operator.
RadialLogSlope model_log_slope(const PruferProblem& model);

// Great circle through two non-antipodal points, parameterized by arc length
// with the midpoint of the pair at s = 0: point(-d/2) = x, point(d/2) = y.
struct GreatCircle {
    double d = 0.0;                // arccos(x . y)
    std::vector<double> first;     // = x
    std::vector<double> conjugate; // unit, tangent to the circle at x

    std::vector<double> point(double s) const;
    std::vector<double> tangent(double s) const;
};

GreatCircle great_circle(std::span<const double> x, std::span<const double> y);

// Margins of the gap chain on one ball, against the one-dimensional
// comparison spectrum. All eigenvalue pairs carry certified bands; `ok`
// requires every asserted margin to clear the combined band.
struct GapChainReport {
    int n = 0;
    double radius = 0.0;
    double diameter = 0.0;
    double lambda0 = 0.0;
    double lambda1 = 0.0;
    double lambda0_tol = 0.0;  // shooting vs dense-Richardson disagreement
    double lambda1_tol = 0.0;
    double mu0 = 0.0;
    double mu1 = 0.0;
    double mu_tol = 0.0;
    double margin_chain = 0.0;   // (lambda1-lambda0) - (mu1-mu0)
    double margin_ground = 0.0;  // lambda0 - mu0
    std::optional<double> margin_model;  // (mu1-mu0) - 3 pi^2/D^2, n >= 3 only
    double second_radial = 0.0;  // l=0 second mode, must exceed lambda1
    bool ordering_ok = false;    // lambda0 < lambda1 < second_radial
    bool ok = false;
    std::string scope_note;
};

GapChainReport verify_gap_chain(const CapProblem& prob, const ModelProblem& model_prob,
                                const ModelGap& model);

// One two-point evaluation of the log-concavity comparison: points on the
// sphere, their geodesic distance, the two sides of the inequality, and the
// slack rhs - lhs (nonnegative when the comparison holds).
struct TwoPointSample {
    std::vector<double> x;
    std::vector<double> y;
    double d = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
    double margin = 0.0;
};

// Seeded pair generator: uniform in (r_x, r_y, relative angle) with radii in
// [0.02 R, 0.95 R], so both points and the pair midpoint distance stay inside
// the certified range of the log-slope profiles. Draws with degenerate
// separation (d < 1e-5) are redrawn.
std::vector<TwoPointSample> make_pair_seeds(const CapProblem& prob, std::size_t count,
                                            std::uint64_t seed);

// Fills lhs, rhs, margin for every seed:
//     lhs = <grad log f0 (y), t_y> - <grad log f0 (x), t_x>,
// with t the great-circle tangents at the pair, gradients from the radial
// profile (zero vector at the center), and rhs twice the comparison log-slope
// at half the pair distance.
std::vector<TwoPointSample> sample_logconcavity(const CapProblem& prob,
                                                std::vector<TwoPointSample> seeds,
                                                const RadialEigen& ground,
                                                const PruferProblem& model);

}  // namespace gaplab
