#pragma once

#include <functional>
#include <utility>

namespace gaplab {

struct RootConfig {
    double x_tol = 1e-13;      // absolute bracket width target
    double f_tol = 0.0;        // early exit when |f| falls below this
    std::size_t max_iter = 200;
};

// Brent's method on [lo, hi]. Requires f(lo) and f(hi) of opposite sign,
// otherwise throws NumericsError("bracket failure"). Returns the root.
double find_root(const std::function<double(double)>& f, double lo, double hi,
                 const RootConfig& cfg = {});

// Expands [lo, hi] geometrically to the right until f changes sign or hi
// exceeds cap; throws NumericsError(cap_error_kind) past the cap.
std::pair<double, double> bracket_rightward(const std::function<double(double)>& f,
                                            double lo, double hi, double cap,
                                            const char* cap_error_kind);

}  // namespace gaplab
