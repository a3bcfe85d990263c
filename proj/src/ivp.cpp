#include "gaplab/ivp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "gaplab/error.hpp"

namespace gaplab {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
// embedded 4th-order weights
constexpr double e1 = 5179.0 / 57600, e3 = 7571.0 / 16695, e4 = 393.0 / 640,
                 e5 = -92097.0 / 339200, e6 = 187.0 / 2100, e7 = 1.0 / 40;

double inf_norm(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

bool has_nan(std::span<const double> v) {
    for (double x : v)
        if (!std::isfinite(x)) return true;
    return false;
}

}  // namespace

IvpSolution integrate_ivp(const OdeRhs& rhs, double z0, double z1, std::span<const double> y0,
                          const IvpConfig& cfg, std::span<const double> checkpoints) {
    const std::size_t dim = y0.size();
    const double dir = (z1 >= z0) ? 1.0 : -1.0;
    const double span_len = std::abs(z1 - z0);
    if (span_len <= 0.0) fail("invalid evaluation", "empty integration interval");

    const double hmax = (cfg.max_step > 0.0) ? cfg.max_step : span_len / 16.0;
    const bool use_checkpoints = !checkpoints.empty();

    IvpSolution sol;
    std::vector<double> y(y0.begin(), y0.end());
    double z = z0;

    auto record = [&](double zz, const std::vector<double>& state) {
        sol.z.push_back(zz);
        sol.states.push_back(state);
    };

    // validate checkpoint ordering
    if (use_checkpoints) {
        double prev = z0 - dir;
        for (double cp : checkpoints) {
            if (dir * (cp - prev) < 0.0) fail("invalid evaluation", "checkpoints not sorted");
            if (dir * (cp - z0) < 0.0 || dir * (cp - z1) > 1e-12 * span_len)
                fail("invalid evaluation", "checkpoint outside interval");
            prev = cp;
        }
    } else {
        record(z, y);
    }

    std::vector<double> k1(dim), k2(dim), k3(dim), k4(dim), k5(dim), k6(dim), k7(dim);
    std::vector<double> ytmp(dim), y5(dim);
    std::size_t next_cp = 0;
    if (use_checkpoints) {
        // checkpoints equal to the start are recorded immediately
        while (next_cp < checkpoints.size() &&
               std::abs(checkpoints[next_cp] - z0) <= 1e-14 * std::max(1.0, span_len)) {
            record(checkpoints[next_cp], y);
            ++next_cp;
        }
    }

    rhs(z, y, k1);
    if (has_nan(k1)) fail("invalid evaluation", "rhs NaN at start");

    double h = std::min(hmax, span_len / 100.0);
    const double hmin_floor = span_len * 1e-15;

    auto finish_blowup = [&](double last_z, const std::vector<double>& last_y) {
        double dom = 0.0;
        for (double x : last_y)
            if (std::abs(x) > std::abs(dom)) dom = x;
        sol.blowup = BlowupEvent{last_z, dom};
    };

    while (dir * (z1 - z) > 1e-14 * span_len) {
        if (sol.n_steps + sol.n_rejected > cfg.max_steps)
            fail("stiffness failure", "step budget exhausted at z=" + std::to_string(z));

        double target = z1;
        if (use_checkpoints && next_cp < checkpoints.size()) target = checkpoints[next_cp];
        double remaining = dir * (target - z);
        if (remaining <= 1e-14 * span_len) {
            // landed on a checkpoint
            record(target, y);
            ++next_cp;
            continue;
        }
        double hstep = std::min({h, hmax, remaining});

        // FSAL stages
        for (std::size_t i = 0; i < dim; ++i) ytmp[i] = y[i] + dir * hstep * a21 * k1[i];
        rhs(z + dir * hstep * c2, ytmp, k2);
        for (std::size_t i = 0; i < dim; ++i)
            ytmp[i] = y[i] + dir * hstep * (a31 * k1[i] + a32 * k2[i]);
        rhs(z + dir * hstep * c3, ytmp, k3);
        for (std::size_t i = 0; i < dim; ++i)
            ytmp[i] = y[i] + dir * hstep * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        rhs(z + dir * hstep * c4, ytmp, k4);
        for (std::size_t i = 0; i < dim; ++i)
            ytmp[i] = y[i] + dir * hstep * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        rhs(z + dir * hstep * c5, ytmp, k5);
        for (std::size_t i = 0; i < dim; ++i)
            ytmp[i] = y[i] + dir * hstep *
                                 (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] +
                                  a65 * k5[i]);
        rhs(z + dir * hstep, ytmp, k6);
        for (std::size_t i = 0; i < dim; ++i)
            y5[i] = y[i] + dir * hstep *
                               (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        rhs(z + dir * hstep, y5, k7);

        bool bad = has_nan(y5) || has_nan(k7);
        double err = 0.0;
        if (!bad) {
            for (std::size_t i = 0; i < dim; ++i) {
                double y4 = y[i] + dir * hstep *
                                       (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                                        e6 * k6[i] + e7 * k7[i]);
                double sc = cfg.abs_tol +
                            cfg.rel_tol * std::max(std::abs(y[i]), std::abs(y5[i]));
                err = std::max(err, std::abs(y5[i] - y4) / sc);
            }
        }

        if (bad || err > 1.0) {
            ++sol.n_rejected;
            double shrink = bad ? 0.25 : std::max(0.2, 0.9 * std::pow(err, -0.2));
            h = hstep * shrink;
            if (h < hmin_floor) {
                // underflow: either a genuine magnitude escape or stiffness
                if (inf_norm(y) > 0.01 * cfg.blowup_threshold) {
                    finish_blowup(z, y);
                    return sol;
                }
                if (bad) fail("invalid evaluation", "rhs NaN at z=" + std::to_string(z));
                fail("stiffness failure", "step underflow at z=" + std::to_string(z));
            }
            continue;
        }

        if (inf_norm(y5) > cfg.blowup_threshold) {
            // last accepted point below threshold is the step start
            finish_blowup(z, y);
            return sol;
        }

        // accepted
        z += dir * hstep;
        y = y5;
        k1 = k7;
        ++sol.n_steps;
        if (use_checkpoints) {
            while (next_cp < checkpoints.size() &&
                   std::abs(checkpoints[next_cp] - z) <= 1e-12 * std::max(1.0, span_len)) {
                record(checkpoints[next_cp], y);
                ++next_cp;
            }
        } else {
            record(z, y);
        }
        h = hstep * std::min(5.0, 0.9 * std::pow(std::max(err, 1e-10), -0.2));
    }

    if (use_checkpoints) {
        while (next_cp < checkpoints.size()) {
            record(checkpoints[next_cp], y);  // checkpoints at z1 within tolerance
            ++next_cp;
        }
        if (sol.z.empty()) record(z1, y);
    }
    return sol;
}

}  // namespace gaplab
