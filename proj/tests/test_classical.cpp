#include "momentlab/classical.hpp"
#include "momentlab/errors.hpp"
#include "momentlab/frequency_profile.hpp"

#include <boost/numeric/odeint.hpp>
#include <doctest.h>

#include <array>
#include <cmath>
#include <numbers>

using namespace momentlab;
using std::numbers::pi;

TEST_CASE("eval_omega_sq on each profile variant") {
    CHECK(eval_omega_sq(FrequencyProfile::constant(1.0), 3.7) == 1.0);
    CHECK(eval_omega_sq(FrequencyProfile::sinusoidal(1.0, 0.5, 2.0), 0.0) == 1.0);
    CHECK(eval_omega_sq(FrequencyProfile::piecewise({{0.0, 1.0}, {5.0, 2.0}}), 6.0) == 4.0);

    const auto sin_profile = FrequencyProfile::sinusoidal(2.0, 0.5, 3.0);
    CHECK(eval_omega_sq(sin_profile, 0.4) == doctest::Approx(4.0 * (1.0 + 0.5 * std::sin(1.2))));
}

TEST_CASE("piecewise profile is right-continuous and honours the piece reference") {
    const auto p = FrequencyProfile::piecewise({{0.0, 1.0}, {5.0, 2.0}});
    CHECK(p.omega_sq(5.0) == 4.0);
    CHECK(p.omega_sq(4.999) == 1.0);
    CHECK(p.omega_sq(5.0, 4.9995) == 1.0);
    CHECK(p.discontinuities() == std::vector<double>{5.0});
    CHECK_THROWS_AS(p.omega_sq(-1.0), DomainError);
}

TEST_CASE("tabulated profile interpolates omega with a natural cubic spline") {
    // Samples of a linear ω(t) = 1 + t/10 are reproduced exactly.
    std::vector<std::pair<double, double>> samples;
    for (int i = 0; i <= 10; ++i) samples.emplace_back(i, 1.0 + i / 10.0);
    const auto p = FrequencyProfile::tabulated(samples);
    CHECK(p.omega_sq(3.3) == doctest::Approx(1.33 * 1.33).epsilon(1e-14));
    CHECK_THROWS_AS(p.omega_sq(10.5), DomainError);
    CHECK_THROWS_AS(p.check_covers(0.0, 11.0), DomainError);

    // Smooth ω(t) = 1 + 0.2 sin t sampled at spacing 0.1.
    std::vector<std::pair<double, double>> smooth;
    for (int i = 0; i <= 100; ++i) smooth.emplace_back(0.1 * i, 1.0 + 0.2 * std::sin(0.1 * i));
    const auto q = FrequencyProfile::tabulated(smooth);
    const double w = 1.0 + 0.2 * std::sin(5.05);
    CHECK(q.omega_sq(5.05) == doctest::Approx(w * w).epsilon(1e-5));
}

TEST_CASE("profile validation guards the inverted regime") {
    CHECK_THROWS_AS(FrequencyProfile::constant(0.0), ValidationError);
    CHECK_NOTHROW(FrequencyProfile::constant(0.0, true));
    CHECK_THROWS_AS(FrequencyProfile::sinusoidal(1.0, 1.2, 1.0), ValidationError);
    const auto inverted = FrequencyProfile::sinusoidal(1.0, 1.5, 1.0, true);
    CHECK(inverted.omega_sq(pi / 2.0 * 3.0) < 0.0);
    CHECK_THROWS_AS(FrequencyProfile::piecewise({{0.0, 1.0}, {0.0, 2.0}}), ValidationError);
    CHECK_THROWS_AS(FrequencyProfile::tabulated({{0.0, 1.0}}), ValidationError);
}

TEST_CASE("solve_classical reproduces the constant-frequency basis") {
    const SystemParams params;
    SUBCASE("omega = 1 over one period") {
        const auto pair = solve_classical(FrequencyProfile::constant(1.0), params, 0.0, 2 * pi,
                                          2 * pi / 6000);
        double err = 0.0;
        for (std::size_t i = 0; i < pair.grid().count; ++i) {
            const double t = pair.grid().time(i);
            err = std::max({err, std::abs(pair.q1()[i] - std::cos(t)),
                            std::abs(pair.q2()[i] - std::sin(t))});
        }
        CHECK(err < 1e-8);
    }
    SUBCASE("omega = 2 at t = pi/4") {
        const auto pair =
            solve_classical(FrequencyProfile::constant(2.0), params, 0.0, pi / 4, pi / 4000);
        const auto s = pair.sample(pair.grid().count - 1);
        CHECK(std::abs(s.q1) < 1e-12);
        CHECK(s.q2 == doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("closed forms hold over ten periods") {
        const double w = 1.7;
        const double t1 = 10 * 2 * pi / w;
        const auto pair = solve_classical(FrequencyProfile::constant(w), params, 0.0, t1, t1 / 40000);
        double err = 0.0;
        for (std::size_t i = 0; i < pair.grid().count; ++i) {
            const double t = pair.grid().time(i);
            err = std::max({err, std::abs(pair.q1()[i] - std::cos(w * t)),
                            std::abs(pair.q2()[i] - std::sin(w * t) / w),
                            std::abs(pair.q1dot()[i] + w * std::sin(w * t)),
                            std::abs(pair.q2dot()[i] - std::cos(w * t))});
        }
        CHECK(err < 1e-8);
        CHECK(pair.max_wronskian_drift() < 1e-8);
    }
}

TEST_CASE("sinusoidal solve matches an independent adaptive integrator") {
    namespace odeint = boost::numeric::odeint;
    using State = std::array<double, 4>;
    auto rhs = [](const State& y, State& d, double t) {
        const double w2 = 1.0 + 0.3 * std::sin(2.0 * t);
        d = {y[1], -w2 * y[0], y[3], -w2 * y[2]};
    };
    State y{1.0, 0.0, 0.0, 1.0};
    odeint::integrate_adaptive(
        odeint::make_controlled(1e-14, 1e-14, odeint::runge_kutta_fehlberg78<State>()), rhs, y,
        0.0, 5.0, 1e-3);

    const auto pair =
        solve_classical(FrequencyProfile::sinusoidal(1.0, 0.3, 2.0), SystemParams{}, 0.0, 5.0, 1e-3);
    const auto s = pair.sample(pair.grid().count - 1);
    CHECK(std::abs(s.q1 - y[0]) < 1e-8);
    CHECK(std::abs(s.q1dot - y[1]) < 1e-8);
    CHECK(std::abs(s.q2 - y[2]) < 1e-8);
    CHECK(std::abs(s.q2dot - y[3]) < 1e-8);
    CHECK(pair.max_wronskian_drift() < 1e-8);

    // The halving estimate brackets the actual error.
    const double est = step_halving_error(FrequencyProfile::sinusoidal(1.0, 0.3, 2.0),
                                          SystemParams{}, 0.0, 5.0, 1e-2);
    const auto coarse = solve_classical(FrequencyProfile::sinusoidal(1.0, 0.3, 2.0),
                                        SystemParams{}, 0.0, 5.0, 1e-2);
    const double actual = std::abs(coarse.sample(coarse.grid().count - 1).q1 - y[0]);
    CHECK(actual < 2 * est);
    CHECK(est < 1e-6);
}

TEST_CASE("piecewise jump is integrated to full order") {
    // ω = 1 until t = 5, then ω = 2: match position and velocity at the jump.
    const auto pair = solve_classical(FrequencyProfile::piecewise({{0.0, 1.0}, {5.0, 2.0}}),
                                      SystemParams{}, 0.0, 8.0, 1e-3);
    auto exact_q1 = [](double t) {
        if (t < 5.0) return std::cos(t);
        return std::cos(5.0) * std::cos(2 * (t - 5)) - std::sin(5.0) * std::sin(2 * (t - 5)) / 2;
    };
    double err = 0.0;
    for (std::size_t i = 0; i < pair.grid().count; ++i)
        err = std::max(err, std::abs(pair.q1()[i] - exact_q1(pair.grid().time(i))));
    CHECK(err < 1e-9);

    // Same check with a step that does not land on the jump.
    const auto off = solve_classical(FrequencyProfile::piecewise({{0.0, 1.0}, {5.0005, 2.0}}),
                                     SystemParams{}, 0.0, 8.0, 1e-3);
    auto exact_off = [](double t) {
        const double tj = 5.0005;
        if (t < tj) return std::cos(t);
        return std::cos(tj) * std::cos(2 * (t - tj)) - std::sin(tj) * std::sin(2 * (t - tj)) / 2;
    };
    double err_off = 0.0;
    for (std::size_t i = 0; i < off.grid().count; ++i)
        err_off = std::max(err_off, std::abs(off.q1()[i] - exact_off(off.grid().time(i))));
    CHECK(err_off < 1e-9);
}

TEST_CASE("dense output interpolates between nodes") {
    const auto pair = solve_classical(FrequencyProfile::constant(1.0), SystemParams{}, 0.0, 3.0, 1e-2);
    for (double t : {0.0, 0.0037, 1.2345, 2.99999, 3.0}) {
        const auto s = pair.at(t);
        CHECK(s.q1 == doctest::Approx(std::cos(t)).epsilon(1e-9));
        CHECK(s.q2 == doctest::Approx(std::sin(t)).epsilon(1e-9));
        CHECK(s.q1dot == doctest::Approx(-std::sin(t)).epsilon(1e-8));
        CHECK(s.q2dot == doctest::Approx(std::cos(t)).epsilon(1e-8));
    }
    CHECK_THROWS_AS(pair.at(3.5), DomainError);
}

TEST_CASE("linearity of the classical flow") {
    const auto profile = FrequencyProfile::sinusoidal(1.0, 0.3, 2.0);
    const auto pair = solve_classical(profile, SystemParams{}, 0.0, 10.0, 1e-3);
    for (auto [a, b] : {std::pair{0.7, -1.3}, std::pair{2.0, 0.25}, std::pair{-0.4, 3.0}}) {
        const auto traj = solve_classical_ic(profile, 0.0, 10.0, 1e-3, a, b);
        double err = 0.0;
        for (std::size_t i = 0; i < traj.size(); ++i) {
            const auto s = pair.sample(i);
            err = std::max({err, std::abs(traj[i].q1 - (a * s.q1 + b * s.q2)),
                            std::abs(traj[i].q1dot - (a * s.q1dot + b * s.q2dot))});
        }
        CHECK(err < 1e-9);
    }
}

TEST_CASE("solve_classical validation and guards") {
    const auto c = FrequencyProfile::constant(1.0);
    CHECK_THROWS_WITH_AS(solve_classical(c, SystemParams{}, 0.0, 1.0, 0.0), "run.dt must be positive",
                         ValidationError);
    CHECK_THROWS_AS(solve_classical(c, SystemParams{}, 1.0, 0.0, 0.1), ValidationError);
    CHECK_THROWS_AS(solve_classical(c, SystemParams{-1.0, 1.0}, 0.0, 1.0, 0.1), ValidationError);
    CHECK_THROWS_AS(solve_classical(c, SystemParams{}, 0.0, 1.0, 0.3), ValidationError);
    // Coarse step: Wronskian drift trips the guard.
    CHECK_THROWS_AS(solve_classical(FrequencyProfile::constant(10.0), SystemParams{}, 0.0, 10.0, 0.05),
                    StepSizeError);
    // Step exceeds the recommended resolution of the peak frequency, but the
    // interval sits in the trough of the modulation: accepted with a warning.
    const auto warned = solve_classical(FrequencyProfile::sinusoidal(1.0, 0.9, 1.0), SystemParams{},
                                        4.0, 4.8, 0.08);
    CHECK(warned.warnings().size() == 1);
}

TEST_CASE("q2_from_q1 rebuilds the second solution") {
    SUBCASE("omega = 1, zero-free window starting at t0") {
        const auto pair = solve_classical(FrequencyProfile::constant(1.0), SystemParams{}, 0.0, 2.0, 1e-3);
        const auto q2 = q2_from_q1(pair, 0.0, pi / 4);
        double err = 0.0;
        for (std::size_t i = 0; i < q2.size(); ++i)
            err = std::max(err, std::abs(q2[i] - std::sin(pair.grid().time(i))));
        CHECK(err < 1e-10);
    }
    SUBCASE("omega = 1, window between the zeros of cos") {
        const auto pair = solve_classical(FrequencyProfile::constant(1.0), SystemParams{}, 0.0, 5.0, 1e-3);
        const auto q2 = q2_from_q1(pair, 2.0, 4.5);
        const std::size_t i0 = 2000;
        double err = 0.0;
        for (std::size_t i = 0; i < q2.size(); ++i) err = std::max(err, std::abs(q2[i] - pair.q2()[i0 + i]));
        CHECK(err < 1e-9);
        CHECK_THROWS_AS(q2_from_q1(pair, 1.0, 2.0), SingularityError);
    }
    SUBCASE("free particle") {
        const auto pair = solve_classical(FrequencyProfile::constant(0.0, true), SystemParams{}, 0.0, 3.0, 1e-2);
        const auto q2 = q2_from_q1(pair, 0.0, 3.0);
        for (std::size_t i = 0; i < q2.size(); ++i)
            CHECK(q2[i] == doctest::Approx(pair.grid().time(i)).epsilon(1e-12));
    }
    SUBCASE("sinusoidal profile") {
        const auto pair =
            solve_classical(FrequencyProfile::sinusoidal(1.0, 0.3, 2.0), SystemParams{}, 0.0, 6.0, 1e-3);
        // Find a zero-free window of q1 away from t0.
        std::size_t a = 0;
        while (std::abs(pair.q1()[a]) > 0.01 || a < 100) ++a; // first zero
        std::size_t b = a + 50;
        while (std::abs(pair.q1()[b]) > 0.01) ++b; // next zero
        const std::size_t i0 = a + 200, i1 = b - 200;
        const auto q2 = q2_from_q1(pair, pair.grid().time(i0), pair.grid().time(i1));
        double err = 0.0;
        for (std::size_t i = 0; i < q2.size(); ++i) err = std::max(err, std::abs(q2[i] - pair.q2()[i0 + i]));
        CHECK(err < 1e-6);
    }
}
