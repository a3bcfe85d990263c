#pragma once

#include <span>

namespace gaplab {

// Index of the interpolation cell [x[i], x[i+1]] containing xq; clamps to the
// end cells. x must be strictly increasing with at least two entries.
std::size_t locate_cell(std::span<const double> x, double xq);

// Piecewise cubic Hermite evaluation through (x, y) with nodal slopes dy.
double hermite_eval(std::span<const double> x, std::span<const double> y,
                    std::span<const double> dy, double xq);

}  // namespace gaplab
