#pragma once

#include "momentlab/frequency_profile.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace momentlab {

/// Mass and reduced Planck constant; both strictly positive.
struct SystemParams {
    double mass = 1.0;
    double hbar = 1.0;

    void validate() const;
};

/// Uniform time grid tᵢ = t0 + i·dt, i = 0..count-1.
struct TimeGrid {
    double t0 = 0.0;
    double dt = 0.0;
    std::size_t count = 0;

    double time(std::size_t i) const { return t0 + static_cast<double>(i) * dt; }
    double t_end() const { return time(count - 1); }
};

/// Values of the fundamental pair and their derivatives at one instant.
struct ClassicalState {
    double q1 = 0.0;
    double q2 = 0.0;
    double q1dot = 0.0;
    double q2dot = 0.0;

    double wronskian() const { return q1 * q2dot - q2 * q1dot; }
};

/// Fundamental solutions of ẍ + ω(t)²x = 0 with q₁(t₀)=1, q̇₁(t₀)=0,
/// q₂(t₀)=0, q̇₂(t₀)=1, sampled on a uniform grid. Between nodes the pair is
/// evaluated by quintic Hermite interpolation using q, q̇ and q̈ = −ω²q.
class TrajectoryPair {
public:
    TrajectoryPair(FrequencyProfile profile, TimeGrid grid, std::vector<double> q1,
                   std::vector<double> q2, std::vector<double> q1dot,
                   std::vector<double> q2dot);

    const TimeGrid& grid() const noexcept { return grid_; }
    const FrequencyProfile& profile() const noexcept { return profile_; }
    std::span<const double> q1() const noexcept { return q1_; }
    std::span<const double> q2() const noexcept { return q2_; }
    std::span<const double> q1dot() const noexcept { return q1dot_; }
    std::span<const double> q2dot() const noexcept { return q2dot_; }

    ClassicalState sample(std::size_t i) const;

    /// Dense output at any t in the grid range.
    ClassicalState at(double t) const;

    double max_wronskian_drift() const;

    /// Non-fatal diagnostics (e.g. coarse step size).
    const std::vector<std::string>& warnings() const noexcept { return warnings_; }
    void add_warning(std::string w) { warnings_.push_back(std::move(w)); }

private:
    FrequencyProfile profile_;
    TimeGrid grid_;
    std::vector<double> q1_, q2_, q1dot_, q2dot_;
    std::vector<std::string> warnings_;
};

/// Integrates the fundamental pair on [t0, t1] with fixed-step RK4.
/// Throws StepSizeError when the Wronskian drifts beyond 1e-8.
TrajectoryPair solve_classical(const FrequencyProfile& profile, const SystemParams& params,
                               double t0, double t1, double dt);

/// Solution of ẍ + ω²x = 0 with arbitrary initial data, for linearity checks.
std::vector<ClassicalState> solve_classical_ic(const FrequencyProfile& profile, double t0,
                                               double t1, double dt, double x0, double v0);

/// Estimated global error of the pair at step dt: Richardson difference
/// against a dt/2 solve, max over shared nodes of |Δq|·16/15.
double step_halving_error(const FrequencyProfile& profile, const SystemParams& params,
                          double t0, double t1, double dt);

/// Rebuilds q₂ on the grid nodes inside [window_start, window_end] as
/// q₁(t)·(∫_{ts}^{t} ds/q₁(s)² + q₂(ts)/q₁(ts)), ts = window_start, using
/// composite Simpson quadrature. Throws SingularityError if |q₁| < 1e-6 in
/// the window.
std::vector<double> q2_from_q1(const TrajectoryPair& pair, double window_start,
                               double window_end);

} // namespace momentlab
