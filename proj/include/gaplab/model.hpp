#pragma once

#include <cstddef>
#include <vector>

#include "gaplab/grid.hpp"

namespace gaplab {

// One-dimensional comparison operator
//     phi'' - (n-1) tan(z) phi'  =  -mu phi
// on [-D/2, D/2] with Dirichlet ends, reduced by parity to [0, D/2]. The
// self-adjoint form carries the weight cos^{n-1}(z). Grid lives on [0, D/2];
// grids for D > 2.8 are graded toward the right endpoint where tan steepens.
struct ModelProblem {
    int n = 1;
    double D = 1.0;
    Grid1D grid;

    static ModelProblem make(int n, double D, std::size_t half_nodes);
    void validate() const;  // throws "diameter out of range" / "invalid grid"
    double half() const { return 0.5 * D; }
    double weight(double z) const;  // cos^{n-1}(z)
};

enum class Parity { Even, Odd };
enum class Normalization { DerivativeAtRight, SupNorm };

struct EigenPair {
    int index = 0;       // 0 = ground, 1 = first excited
    double value = 0.0;  // mu
    Parity parity = Parity::Even;
    std::vector<double> phi;   // samples on problem.grid ([0, D/2])
    std::vector<double> dphi;  // derivative samples on the same nodes
};

// Dense path: symmetric weighted finite-difference pencil on the mirrored
// full interval; eigenfunction parity is checked against the mode index and
// samples are folded back to [0, D/2].
std::vector<EigenPair> solve_spectrum_dense(const ModelProblem& prob, std::size_t count,
                                            Normalization norm = Normalization::DerivativeAtRight);

// Shooting path: parity initial data at z=0, Dirichlet mismatch at D/2,
// bracketed root in mu. Samples come from the converged integration.
EigenPair solve_spectrum_shooting(const ModelProblem& prob, int index, double mu_lo, double mu_hi,
                                  Normalization norm = Normalization::DerivativeAtRight);

struct ModelGap {
    double mu0 = 0.0;
    double mu1 = 0.0;
    double gap = 0.0;            // mu1 - mu0
    double bound = 0.0;          // 3 pi^2 / D^2
    double margin = 0.0;         // gap - bound
    double certified_tol = 0.0;  // Richardson band covering both eigenvalues
    EigenPair ground;            // shooting-refined
    EigenPair excited;
};

// Two-resolution dense solve with Richardson extrapolation, then shooting
// refinement inside the certified band. Dense and shooting must agree to 1e-6
// relative or the call fails ("eigensolver failure").
ModelGap model_gap(const ModelProblem& prob);

}  // namespace gaplab
