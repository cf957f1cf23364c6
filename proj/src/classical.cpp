#include "momentlab/classical.hpp"

#include "momentlab/errors.hpp"
#include "momentlab/ode.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

namespace momentlab {

void SystemParams::validate() const {
    if (!(mass > 0.0) || !std::isfinite(mass)) throw ValidationError("system.m must be positive");
    if (!(hbar > 0.0) || !std::isfinite(hbar))
        throw ValidationError("system.hbar must be positive");
}

TrajectoryPair::TrajectoryPair(FrequencyProfile profile, TimeGrid grid, std::vector<double> q1,
                               std::vector<double> q2, std::vector<double> q1dot,
                               std::vector<double> q2dot)
    : profile_(std::move(profile)), grid_(grid), q1_(std::move(q1)), q2_(std::move(q2)),
      q1dot_(std::move(q1dot)), q2dot_(std::move(q2dot)) {
    if (q1_.size() != grid_.count || q2_.size() != grid_.count || q1dot_.size() != grid_.count ||
        q2dot_.size() != grid_.count)
        throw ValidationError("trajectory sample arrays must match the grid size");
}

ClassicalState TrajectoryPair::sample(std::size_t i) const {
    return {q1_[i], q2_[i], q1dot_[i], q2dot_[i]};
}

namespace {

// Quintic Hermite on [0, h] from (f, f', f'') at both ends; returns (f, f').
std::array<double, 2> hermite5(double s, double h, double f0, double d0, double a0, double f1,
                               double d1, double a1) {
    const double s2 = s * s, s3 = s2 * s, s4 = s3 * s, s5 = s4 * s;
    const double H0 = 1 - 10 * s3 + 15 * s4 - 6 * s5;
    const double H1 = s - 6 * s3 + 8 * s4 - 3 * s5;
    const double H2 = 0.5 * (s2 - 3 * s3 + 3 * s4 - s5);
    const double H3 = 0.5 * (s3 - 2 * s4 + s5);
    const double H4 = -4 * s3 + 7 * s4 - 3 * s5;
    const double H5 = 10 * s3 - 15 * s4 + 6 * s5;
    const double dH0 = -30 * s2 + 60 * s3 - 30 * s4;
    const double dH1 = 1 - 18 * s2 + 32 * s3 - 15 * s4;
    const double dH2 = 0.5 * (2 * s - 9 * s2 + 12 * s3 - 5 * s4);
    const double dH3 = 0.5 * (3 * s2 - 8 * s3 + 5 * s4);
    const double dH4 = -12 * s2 + 28 * s3 - 15 * s4;
    const double dH5 = 30 * s2 - 60 * s3 + 30 * s4;
    const double f = H0 * f0 + H1 * h * d0 + H2 * h * h * a0 + H5 * f1 + H4 * h * d1 +
                     H3 * h * h * a1;
    const double df = (dH0 * f0 + dH5 * f1) / h + dH1 * d0 + dH4 * d1 + (dH2 * a0 + dH3 * a1) * h;
    return {f, df};
}

} // namespace

ClassicalState TrajectoryPair::at(double t) const {
    const double span = grid_.t_end() - grid_.t0;
    const double tol = 1e-12 * std::max(1.0, std::abs(span));
    if (t < grid_.t0 - tol || t > grid_.t_end() + tol)
        throw DomainError("t = " + std::to_string(t) + " outside the trajectory grid");
    if (grid_.count == 1) return sample(0);
    const double u = (t - grid_.t0) / grid_.dt;
    auto k = static_cast<std::size_t>(std::clamp(std::floor(u), 0.0,
                                                 static_cast<double>(grid_.count - 2)));
    const double ta = grid_.time(k);
    const double s = std::clamp((t - ta) / grid_.dt, 0.0, 1.0);
    if (s == 0.0) return sample(k);
    if (s == 1.0) return sample(k + 1);
    const double ref = ta + 0.5 * grid_.dt;
    const double w0 = profile_.omega_sq(ta, ref);
    const double w1 = profile_.omega_sq(ta + grid_.dt, ref);
    const auto r1 = hermite5(s, grid_.dt, q1_[k], q1dot_[k], -w0 * q1_[k], q1_[k + 1],
                             q1dot_[k + 1], -w1 * q1_[k + 1]);
    const auto r2 = hermite5(s, grid_.dt, q2_[k], q2dot_[k], -w0 * q2_[k], q2_[k + 1],
                             q2dot_[k + 1], -w1 * q2_[k + 1]);
    return {r1[0], r2[0], r1[1], r2[1]};
}

double TrajectoryPair::max_wronskian_drift() const {
    double drift = 0.0;
    for (std::size_t i = 0; i < grid_.count; ++i)
        drift = std::max(drift, std::abs(sample(i).wronskian() - 1.0));
    return drift;
}

namespace {

TimeGrid make_grid(double t0, double t1, double dt) {
    if (!(dt > 0.0)) throw ValidationError("run.dt must be positive");
    if (!(t1 > t0)) throw ValidationError("run.t1 must exceed run.t0");
    const std::size_t steps = ode::step_count(t0, t1, dt);
    if (steps == 0 || std::abs(static_cast<double>(steps) * dt - (t1 - t0)) > 1e-9 * (t1 - t0))
        throw ValidationError("run.dt must divide the interval t1 - t0");
    return {t0, dt, steps + 1};
}

using Vec2 = std::array<double, 2>;

} // namespace

std::vector<ClassicalState> solve_classical_ic(const FrequencyProfile& profile, double t0,
                                               double t1, double dt, double x0, double v0) {
    profile.check_covers(t0, t1);
    const TimeGrid grid = make_grid(t0, t1, dt);
    const auto jumps = profile.discontinuities();
    std::vector<ClassicalState> out(grid.count);
    auto rhs = [&](double t, const Vec2& y, double ref) -> Vec2 {
        return {y[1], -profile.omega_sq(t, ref) * y[0]};
    };
    ode::integrate_uniform(Vec2{x0, v0}, t0, dt, grid.count - 1, jumps, rhs,
                           [&](std::size_t i, double, const Vec2& y) {
                               out[i].q1 = y[0];
                               out[i].q1dot = y[1];
                           });
    return out;
}

TrajectoryPair solve_classical(const FrequencyProfile& profile, const SystemParams& params,
                               double t0, double t1, double dt) {
    params.validate();
    profile.check_covers(t0, t1);
    const TimeGrid grid = make_grid(t0, t1, dt);
    const auto jumps = profile.discontinuities();

    using State = std::array<double, 4>; // q1, q1dot, q2, q2dot
    std::vector<double> q1(grid.count), q2(grid.count), q1d(grid.count), q2d(grid.count);
    auto rhs = [&](double t, const State& y, double ref) -> State {
        const double w2 = profile.omega_sq(t, ref);
        return {y[1], -w2 * y[0], y[3], -w2 * y[2]};
    };
    ode::integrate_uniform(State{1.0, 0.0, 0.0, 1.0}, t0, dt, grid.count - 1, jumps, rhs,
                           [&](std::size_t i, double, const State& y) {
                               q1[i] = y[0];
                               q1d[i] = y[1];
                               q2[i] = y[2];
                               q2d[i] = y[3];
                           });

    TrajectoryPair pair(profile, grid, std::move(q1), std::move(q2), std::move(q1d),
                        std::move(q2d));
    const double drift = pair.max_wronskian_drift();
    if (!(drift <= 1e-8)) {
        std::ostringstream msg;
        msg << "classical_core: Wronskian drift " << drift << " exceeds 1e-8; reduce dt";
        throw StepSizeError(msg.str());
    }
    const double resolution = dt * profile.max_abs_omega(t0, t1);
    if (resolution > 0.1) {
        std::ostringstream msg;
        msg << "dt*max|omega| = " << resolution << " exceeds the recommended 0.1";
        pair.add_warning(msg.str());
    }
    return pair;
}

double step_halving_error(const FrequencyProfile& profile, const SystemParams& params, double t0,
                          double t1, double dt) {
    const TrajectoryPair coarse = solve_classical(profile, params, t0, t1, dt);
    const TrajectoryPair fine = solve_classical(profile, params, t0, t1, 0.5 * dt);
    double err = 0.0;
    for (std::size_t i = 0; i < coarse.grid().count; ++i) {
        const auto c = coarse.sample(i);
        const auto f = fine.sample(2 * i);
        err = std::max({err, std::abs(c.q1 - f.q1), std::abs(c.q2 - f.q2),
                        std::abs(c.q1dot - f.q1dot), std::abs(c.q2dot - f.q2dot)});
    }
    return err * 16.0 / 15.0;
}

std::vector<double> q2_from_q1(const TrajectoryPair& pair, double window_start,
                               double window_end) {
    const TimeGrid& g = pair.grid();
    if (!(window_end > window_start)) throw ValidationError("window must have positive length");
    const double tol = 1e-9 * g.dt;
    const double first = std::ceil((window_start - g.t0 - tol) / g.dt);
    const double last = std::floor((window_end - g.t0 + tol) / g.dt);
    if (first < 0 || last > static_cast<double>(g.count - 1) || last <= first)
        throw DomainError("window must lie inside the trajectory grid and span a step");
    const auto i0 = static_cast<std::size_t>(first);
    const auto i1 = static_cast<std::size_t>(last);

    constexpr double guard = 1e-6;
    auto inv_sq = [&](double q) {
        if (std::abs(q) < guard)
            throw SingularityError("q2_from_q1: |q1| < 1e-6 inside the window");
        return 1.0 / (q * q);
    };

    std::vector<double> out;
    out.reserve(i1 - i0 + 1);
    const double offset = pair.q2()[i0] / pair.q1()[i0];
    double integral = 0.0;
    double fa = inv_sq(pair.q1()[i0]);
    out.push_back(pair.q1()[i0] * offset);
    for (std::size_t i = i0; i < i1; ++i) {
        const double fm = inv_sq(pair.at(g.time(i) + 0.5 * g.dt).q1);
        const double fb = inv_sq(pair.q1()[i + 1]);
        if (std::signbit(pair.q1()[i]) != std::signbit(pair.q1()[i + 1]))
            throw SingularityError("q2_from_q1: q1 changes sign inside the window");
        integral += g.dt / 6.0 * (fa + 4.0 * fm + fb);
        fa = fb;
        out.push_back(pair.q1()[i + 1] * (integral + offset));
    }
    return out;
}

} // namespace momentlab
