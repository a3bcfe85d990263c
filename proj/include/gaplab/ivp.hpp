#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace gaplab {

// Right-hand side of y' = f(z, y); writes derivatives into dydz.
using OdeRhs = std::function<void(double z, std::span<const double> y, std::span<double> dydz)>;

struct IvpConfig {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double max_step = 0.0;            // 0 => |z1 - z0| / 16
    double blowup_threshold = 1e8;    // |y|_inf above this ends the run as a blow-up
    std::size_t max_steps = 2'000'000;
};

struct BlowupEvent {
    double z;      // last accepted point with |y|_inf below threshold
    double value;  // dominant component there, carries the sign of the escape
};

// Solution samples. If checkpoints were supplied, z == those checkpoints
// (truncated at the blow-up location when one occurs); otherwise z holds the
// accepted step endpoints. states[i] is the state vector at z[i].
struct IvpSolution {
    std::vector<double> z;
    std::vector<std::vector<double>> states;
    std::optional<BlowupEvent> blowup;
    std::size_t n_steps = 0;
    std::size_t n_rejected = 0;

    const std::vector<double>& final_state() const { return states.back(); }
};

// Adaptive embedded Runge-Kutta (Dormand-Prince 5(4)) from z0 to z1, either
// direction. Checkpoints, when given, must be sorted in integration direction
// and lie inside [min(z0,z1), max(z0,z1)]; the integrator lands on each one
// exactly (no interpolation). Throws NumericsError("stiffness failure") if the
// step underflows while the state is still moderate, and
// NumericsError("invalid evaluation") if the rhs produces NaN at a moderate
// state. A magnitude escape is not an error: the solution is returned with
// `blowup` set and samples truncated to the survived range.
IvpSolution integrate_ivp(const OdeRhs& rhs, double z0, double z1,
                          std::span<const double> y0, const IvpConfig& cfg = {},
                          std::span<const double> checkpoints = {});

}  // namespace gaplab
