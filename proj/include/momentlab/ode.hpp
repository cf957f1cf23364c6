#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace momentlab::ode {

template <class State>
State axpy(const State& y, double a, const State& k) {
    State out = y;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += a * k[i];
    return out;
}

/// One classical RK4 step. `rhs(t, y, piece_ref)` returns dy/dt; `piece_ref`
/// is the step midpoint and selects the piece of a piecewise coefficient.
template <class State, class Rhs>
State rk4_step(const State& y, double t, double h, Rhs&& rhs) {
    const double ref = t + 0.5 * h;
    const State k1 = rhs(t, y, ref);
    const State k2 = rhs(t + 0.5 * h, axpy(y, 0.5 * h, k1), ref);
    const State k3 = rhs(t + 0.5 * h, axpy(y, 0.5 * h, k2), ref);
    const State k4 = rhs(t + h, axpy(y, h, k3), ref);
    State out = y;
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
}

/// Fixed-step RK4 on the uniform grid tᵢ = t0 + i·dt, i = 0..steps.
///
/// A step containing a discontinuity of the right-hand side is split into
/// sub-steps at that point so the scheme keeps its fourth order across jumps.
/// `observe(i, tᵢ, yᵢ)` is called for every grid node, including i = 0.
template <class State, class Rhs, class Observer>
void integrate_uniform(State y, double t0, double dt, std::size_t steps,
                       std::span<const double> jumps, Rhs&& rhs, Observer&& observe) {
    observe(std::size_t{0}, t0, y);
    const double snap = 1e-9 * dt;
    for (std::size_t i = 0; i < steps; ++i) {
        const double ta = t0 + static_cast<double>(i) * dt;
        const double tb = t0 + static_cast<double>(i + 1) * dt;
        double t = ta;
        for (double j : jumps) {
            if (j > t + snap && j < tb - snap) {
                y = rk4_step(y, t, j - t, rhs);
                t = j;
            }
        }
        y = rk4_step(y, t, tb - t, rhs);
        observe(i + 1, tb, y);
    }
}

/// Number of steps of size dt covering [t0, t1]; t1 − t0 must be a multiple
/// of dt up to rounding.
inline std::size_t step_count(double t0, double t1, double dt) {
    return static_cast<std::size_t>(std::llround((t1 - t0) / dt));
}

} // namespace momentlab::ode
