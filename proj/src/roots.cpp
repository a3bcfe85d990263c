#include "gaplab/roots.hpp"

#include <cmath>
#include <string>

#include "gaplab/error.hpp"

namespace gaplab {

double find_root(const std::function<double(double)>& f, double lo, double hi,
                 const RootConfig& cfg) {
    double a = lo, b = hi;
    double fa = f(a), fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if ((fa > 0.0) == (fb > 0.0))
        fail("bracket failure", "no sign change on [" + std::to_string(lo) + ", " +
                                    std::to_string(hi) + "]");

    double c = a, fc = fa;
    double d = b - a, e = d;
    for (std::size_t it = 0; it < cfg.max_iter; ++it) {
        if ((fb > 0.0) == (fc > 0.0)) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if (std::abs(fc) < std::abs(fb)) {
            a = b; b = c; c = a;
            fa = fb; fb = fc; fc = fa;
        }
        double tol = 2.0 * 1e-16 * std::abs(b) + 0.5 * cfg.x_tol;
        double m = 0.5 * (c - b);
        if (std::abs(m) <= tol || fb == 0.0 ||
            (cfg.f_tol > 0.0 && std::abs(fb) <= cfg.f_tol))
            return b;
        if (std::abs(e) >= tol && std::abs(fa) > std::abs(fb)) {
            double s = fb / fa, p, q;
            if (a == c) {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                double t = fa / fc, r = fb / fc;
                p = s * (2.0 * m * t * (t - r) - (b - a) * (r - 1.0));
                q = (t - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) q = -q;
            p = std::abs(p);
            if (2.0 * p < std::min(3.0 * m * q - std::abs(tol * q), std::abs(e * q))) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += (std::abs(d) > tol) ? d : (m > 0.0 ? tol : -tol);
        fb = f(b);
    }
    return b;
}

std::pair<double, double> bracket_rightward(const std::function<double(double)>& f, double lo,
                                            double hi, double cap, const char* cap_error_kind) {
    double flo = f(lo);
    double a = lo, b = hi;
    while (b <= cap) {
        double fb = f(b);
        if ((flo > 0.0) != (fb > 0.0) || fb == 0.0) return {a, b};
        a = b;
        flo = fb;
        b = lo + 2.0 * (b - lo);
    }
    fail(cap_error_kind, "no sign change up to cap " + std::to_string(cap));
}

}  // namespace gaplab
