#include "gaplab/interp.hpp"

#include <algorithm>

#include "gaplab/error.hpp"

namespace gaplab {

std::size_t locate_cell(std::span<const double> x, double xq) {
    if (x.size() < 2) fail("invalid grid", "interpolation needs at least two nodes");
    auto it = std::upper_bound(x.begin(), x.end(), xq);
    if (it == x.begin()) return 0;
    std::size_t i = static_cast<std::size_t>(it - x.begin()) - 1;
    return std::min(i, x.size() - 2);
}

double hermite_eval(std::span<const double> x, std::span<const double> y,
                    std::span<const double> dy, double xq) {
    std::size_t i = locate_cell(x, xq);
    double h = x[i + 1] - x[i];
    double t = (xq - x[i]) / h;
    double t2 = t * t;
    double t3 = t2 * t;
    double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    double h10 = t3 - 2.0 * t2 + t;
    double h01 = -2.0 * t3 + 3.0 * t2;
    double h11 = t3 - t2;
    return h00 * y[i] + h * h10 * dy[i] + h01 * y[i + 1] + h * h11 * dy[i + 1];
}

}  // namespace gaplab
