#include "momentlab/classical.hpp"
#include "momentlab/errors.hpp"
#include "momentlab/gaussian.hpp"
#include "momentlab/moments.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace momentlab;

namespace {

const SystemParams unit{};

double binom(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

MomentLayer random_layer(std::mt19937& rng, int n) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    MomentLayer layer = MomentLayer::zeros(n);
    for (auto& v : layer.values) v = u(rng);
    return layer;
}

MomentState random_state(std::mt19937& rng, int n_max) {
    MomentState s = MomentState::zeros(n_max);
    for (int n = 1; n <= n_max; ++n) s.set_layer(random_layer(rng, n));
    return s;
}

const GaussianState packet{1.0, 0.5, 0.5, 0.2, 0.0};

std::vector<FrequencyProfile> profiles() {
    return {FrequencyProfile::constant(1.0), FrequencyProfile::sinusoidal(1.0, 0.3, 2.0),
            FrequencyProfile::piecewise({{0.0, 1.0}, {5.0, 2.0}})};
}

} // namespace

TEST_CASE("layer_rhs examples") {
    const auto ehrenfest = layer_rhs(MomentLayer(1, {0.7, -0.3}), 1.0, 1.0);
    CHECK(ehrenfest[0] == doctest::Approx(-0.3));
    CHECK(ehrenfest[1] == doctest::Approx(-0.7));

    for (double v : layer_rhs(MomentLayer(2, {0.5, 0.0, 0.5}), 1.0, 1.0)) CHECK(v == 0.0);

    std::mt19937 rng(3);
    const auto layer = random_layer(rng, 4);
    const double w2 = 2.5, m = 1.3;
    const auto rhs = layer_rhs(layer, w2, m);
    const auto& v = layer.values;
    // Direct transcription of the five component equations.
    const double expected[5] = {4.0 / m * v[1], 3.0 / m * v[2] - m * w2 * v[0],
                                2.0 / m * v[3] - 2.0 * m * w2 * v[1],
                                1.0 / m * v[4] - 3.0 * m * w2 * v[2], -4.0 * m * w2 * v[3]};
    REQUIRE(rhs.size() == 5);
    for (int l = 0; l < 5; ++l) CHECK(rhs[l] == doctest::Approx(expected[l]).epsilon(1e-14));
}

TEST_CASE("MomentState keeps the normalisation layer") {
    const auto s = MomentState::zeros(4);
    CHECK(s.n_max() == 4);
    CHECK(s.at(0, 0) == 1.0);
    CHECK_THROWS_AS(MomentState({MomentLayer(0, {2.0})}), ValidationError);
    CHECK_THROWS_AS(MomentLayer(2, {1.0, 2.0}), ValidationError);
}

TEST_CASE("evolve_layers examples") {
    SUBCASE("coherent state is stationary") {
        const auto init = gaussian_moments({0.0, 0.0, std::sqrt(0.5), 0.0, 0.0}, unit, 6);
        const auto series =
            evolve_layers(init, FrequencyProfile::constant(1.0), unit, 0.0, 10.0, 1e-3, 100);
        for (const auto& st : series.states)
            for (int n = 0; n <= 6; ++n)
                for (int l = 0; l <= n; ++l) CHECK(std::abs(st.at(n, l) - init.at(n, l)) < 1e-8);
    }
    SUBCASE("layer 1 follows the classical flow") {
        MomentState init = MomentState::zeros(2);
        init.set_layer(MomentLayer(1, {0.8, -0.4}));
        const double w = 1.7;
        const auto series =
            evolve_layers(init, FrequencyProfile::constant(w), unit, 0.0, 10.0, 1e-3, 50);
        for (std::size_t i = 0; i < series.times.size(); ++i) {
            const double t = series.times[i];
            CHECK(std::abs(series.states[i].at(1, 0) - (0.8 * std::cos(w * t) - 0.4 / w * std::sin(w * t))) < 1e-8);
            CHECK(std::abs(series.states[i].at(1, 1) - (-0.8 * w * std::sin(w * t) - 0.4 * std::cos(w * t))) < 1e-8);
        }
    }
    SUBCASE("coarse step warning") {
        const auto series = evolve_layers(MomentState::zeros(6), FrequencyProfile::constant(1.0),
                                          unit, 0.0, 1.0, 0.1, 1);
        CHECK_FALSE(series.warnings.empty());
    }
}

TEST_CASE("evolve_layers agrees with the closed-form reconstruction") {
    std::mt19937 rng(17);
    const SystemParams params{1.4, 0.8};
    const auto profile = FrequencyProfile::sinusoidal(1.0, 0.3, 2.0);
    const auto init = random_state(rng, 6);
    const auto series = evolve_layers(init, profile, params, 0.0, 10.0, 1e-3, 100);
    const auto pair = solve_classical(profile, params, 0.0, 10.0, 1e-3);
    double worst = 0.0;
    for (int n = 1; n <= 6; ++n) {
        const auto c = fit_basis(init.layer(n), pair, params.mass, 0.0);
        for (std::size_t i = 0; i < series.times.size(); ++i) {
            const auto rec = reconstruct_layer(c, pair.at(series.times[i]), params.mass);
            for (int l = 0; l <= n; ++l)
                worst = std::max(worst, std::abs(rec[l] - series.states[i].at(n, l)));
        }
    }
    CHECK(worst < 1e-7);
}

TEST_CASE("closed_form_moment examples") {
    const ClassicalState s{0.3, -1.1, 0.7, 0.4};
    const double m = 1.7;
    CHECK(closed_form_moment(1, 0, 1, s, m) == doctest::Approx(s.q1));
    CHECK(closed_form_moment(2, 1, 1, s, m) ==
          doctest::Approx(m / 2 * (s.q1dot * s.q2 + s.q1 * s.q2dot)));

    const auto pair = solve_classical(FrequencyProfile::constant(1.0), unit, 0.0, 3.0, 1e-3);
    for (double t : {0.4, 1.3, 2.9})
        CHECK(std::abs(closed_form_moment(2, 0, 1, pair, 1.0, t) - std::cos(t) * std::sin(t)) < 1e-9);

    CHECK_THROWS_AS(closed_form_moment(2, 3, 0, s, m), ValidationError);
    CHECK_THROWS_AS(closed_form_moment(2, 0, 3, s, m), ValidationError);
}

TEST_CASE("closed-form weights equal the binomial form") {
    for (int n = 0; n <= 20; ++n)
        for (int l = 0; l <= n; ++l)
            for (int r = 0; r <= n; ++r)
                for (int a = std::max(0, l - (n - r)); a <= std::min(l, r); ++a) {
                    const double expected = binom(n - l, r - a) * binom(l, a) / binom(n, r);
                    CHECK(closed_form_weight(n, l, r, a) ==
                          doctest::Approx(expected).epsilon(1e-15));
                }
}

TEST_CASE("verify_closed_form examples") {
    CHECK(verify_closed_form(2, FrequencyProfile::constant(1.0), unit, 0.0, 10.0).max_residual < 1e-7);
    CHECK(verify_closed_form(6, FrequencyProfile::sinusoidal(1.0, 0.3, 2.0), unit, 0.0, 10.0)
              .max_residual < 1e-6);
    const auto zero = verify_closed_form(0, FrequencyProfile::sinusoidal(1.0, 0.3, 2.0), unit, 0.0, 10.0);
    CHECK(zero.max_residual == 0.0);
    for (const auto& profile : profiles())
        for (int n = 0; n <= 6; ++n) {
            const auto r = verify_closed_form(n, profile, unit, 0.0, 10.0);
            CHECK(r.max_residual < 1e-6);
            CHECK(r.checked_points > 0);
        }
}

TEST_CASE("fit_basis examples") {
    const double m = 1.5;
    const auto pair = solve_classical(FrequencyProfile::constant(1.0), {m, 1.0}, 0.0, 5.0, 1e-3);

    SUBCASE("basis matrix at the initial time") {
        for (int n = 1; n <= 6; ++n) {
            const auto M = basis_matrix(n, pair.sample(0), m);
            for (int l = 0; l <= n; ++l)
                for (int r = 0; r <= n; ++r) {
                    const double expected = (r == n - l) ? std::pow(m, l) / binom(n, l) : 0.0;
                    CHECK(M(l, r) == doctest::Approx(expected).epsilon(1e-14));
                }
            for (int k = 0; k <= n; ++k) {
                MomentLayer e = MomentLayer::zeros(n);
                e[k] = 1.0;
                const auto c = fit_basis(e, pair, m, 0.0);
                for (int r = 0; r <= n; ++r) {
                    const double expected = (r == n - k) ? binom(n, k) / std::pow(m, k) : 0.0;
                    CHECK(c.c[r] == doctest::Approx(expected).epsilon(1e-14));
                }
            }
        }
    }
    SUBCASE("layer one recovers q0 q1 + (p0/m) q2") {
        const double q0 = 0.6, p0 = -0.9;
        const auto c = fit_basis(MomentLayer(1, {q0, p0}), pair, m, 0.0);
        CHECK(c.c[0] == doctest::Approx(p0 / m));
        CHECK(c.c[1] == doctest::Approx(q0));
        for (double t : {0.5, 2.0, 4.5}) {
            const auto s = pair.at(t);
            CHECK(reconstruct_layer(c, s, m)[0] == doctest::Approx(q0 * s.q1 + p0 / m * s.q2));
        }
    }
    SUBCASE("zero layer") {
        for (double v : fit_basis(MomentLayer::zeros(4), pair, m, 0.0).c) CHECK(v == 0.0);
    }
    SUBCASE("singular basis") {
        const ClassicalState degenerate{0.0, 0.0, 1.0, 1.0};
        CHECK(condition_number(basis_matrix(3, degenerate, 1.0)) > 1e12);
    }
}

TEST_CASE("solution space has dimension n+1") {
    for (const auto& profile : profiles()) {
        const auto pair = solve_classical(profile, unit, 0.0, 10.0, 1e-3);
        for (int n = 1; n <= 6; ++n) {
            double worst = 0.0;
            for (std::size_t i = 0; i < pair.grid().count; i += 250)
                worst = std::max(worst, condition_number(basis_matrix(n, pair.sample(i), 1.0)));
            CHECK(worst < 1e6);
        }
    }
}

TEST_CASE("invariants examples") {
    CHECK(ermakov_invariant(MomentLayer(2, {0.5, 0.0, 0.5})) == doctest::Approx(0.25));

    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(-2.0, 2.0), pos(0.2, 2.0), hb(0.3, 2.0), mass(0.5, 3.0);
    for (int k = 0; k < 100; ++k) {
        const double q = u(rng), p = u(rng), a = pos(rng), b = u(rng), h = hb(rng), m = mass(rng);
        const SystemParams params{m, h};
        // Second moments of a Gaussian packet written out directly.
        const MomentLayer l2(2, {q * q + a * a, q * p + a * b, p * p + b * b + h * h / (4 * a * a)});
        const double paper = (q * b - p * a) * (q * b - p * a) + h * h * q * q / (4 * a * a) + h * h / 4;
        const double scale = std::max(1.0, std::abs(paper));
        CHECK(std::abs(ermakov_invariant(l2) - paper) < 1e-12 * scale);
        CHECK(std::abs(ermakov_invariant(gaussian_moments({q, p, a, b, 0.0}, params, 2).layer(2)) - paper) <
              1e-12 * scale);
        const auto gm = gaussian_moments({q, p, a, b, 0.0}, params, 2);
        CHECK(uncertainty_product(gm) == doctest::Approx(h * h / 4).epsilon(1e-12));
    }

    for (int k = 0; k < 50; ++k) {
        const auto l2 = random_layer(rng, 2);
        CHECK(std::abs(higher_invariant(l2) - ermakov_invariant(l2)) < 1e-14);
        const auto l3 = random_layer(rng, 3);
        CHECK(std::abs(higher_invariant(l3)) < 1e-13);
        const auto l5 = random_layer(rng, 5);
        CHECK(std::abs(higher_invariant(l5)) < 1e-13 * 10);
    }

    const auto ground = gaussian_moments({0.0, 0.0, std::sqrt(0.5), 0.0, 0.0}, unit, 2);
    CHECK(uncertainty_product(ground) == doctest::Approx(0.25));
    CHECK(harmonic_energy(ground, 1.0, 1.0) == doctest::Approx(0.5));
}

TEST_CASE("invariants are conserved along the hierarchy flow") {
    const SystemParams params{1.0, 1.0};
    const auto init = gaussian_moments(packet, params, 6);
    for (const auto& profile : profiles()) {
        const auto series = evolve_layers(init, profile, params, 0.0, 10.0, 1e-3, 10);
        const double c0 = ermakov_invariant(init.layer(2));
        double c4_0 = higher_invariant(init.layer(4)), c6_0 = higher_invariant(init.layer(6));
        double d2 = 0.0, d4 = 0.0, d6 = 0.0, odd = 0.0;
        for (const auto& st : series.states) {
            d2 = std::max(d2, std::abs(ermakov_invariant(st.layer(2)) - c0) / std::abs(c0));
            d4 = std::max(d4, std::abs(higher_invariant(st.layer(4)) - c4_0) / std::abs(c4_0));
            d6 = std::max(d6, std::abs(higher_invariant(st.layer(6)) - c6_0) / std::abs(c6_0));
            for (int n : {1, 3, 5}) odd = std::max(odd, std::abs(higher_invariant(st.layer(n))));
        }
        CHECK(d2 < 1e-8);
        CHECK(d4 < 1e-7);
        CHECK(d6 < 1e-7);
        CHECK(odd < 1e-12);
    }
}

TEST_CASE("energy is not conserved under a modulated frequency") {
    const auto profile = FrequencyProfile::sinusoidal(1.0, 0.3, 2.0);
    const auto init = gaussian_moments(packet, unit, 2);
    const auto series = evolve_layers(init, profile, unit, 0.0, 10.0, 1e-3, 10);
    const double e0 = harmonic_energy(init, profile.omega_sq(0.0), 1.0);
    double change = 0.0;
    for (std::size_t i = 0; i < series.times.size(); ++i)
        change = std::max(change, std::abs(harmonic_energy(series.states[i],
                                                           profile.omega_sq(series.times[i]), 1.0) -
                                           e0) / e0);
    CHECK(change > 1e-3);

    const auto constant = evolve_layers(init, FrequencyProfile::constant(1.0), unit, 0.0, 10.0, 1e-3, 10);
    for (const auto& st : constant.states) CHECK(std::abs(harmonic_energy(st, 1.0, 1.0) - e0) < 1e-9);
}

TEST_CASE("layers evolve independently and linearly") {
    std::mt19937 rng(23);
    const auto profile = FrequencyProfile::sinusoidal(1.0, 0.3, 2.0);
    const auto u = random_state(rng, 5);
    auto perturbed = u;
    perturbed.set_layer(random_layer(rng, 3));
    const auto a = evolve_layers(u, profile, unit, 0.0, 5.0, 1e-3, 50);
    const auto b = evolve_layers(perturbed, profile, unit, 0.0, 5.0, 1e-3, 50);
    for (std::size_t i = 0; i < a.states.size(); ++i)
        for (int n : {1, 2, 4, 5}) CHECK(a.states[i].layer(n).values == b.states[i].layer(n).values);

    const auto v = random_state(rng, 5);
    const double ca = 0.7, cb = -1.9;
    MomentState combo = MomentState::zeros(5);
    for (int n = 1; n <= 5; ++n) {
        MomentLayer l = MomentLayer::zeros(n);
        for (int k = 0; k <= n; ++k) l[k] = ca * u.at(n, k) + cb * v.at(n, k);
        combo.set_layer(l);
    }
    const auto ev = evolve_layers(v, profile, unit, 0.0, 5.0, 1e-3, 50);
    const auto ec = evolve_layers(combo, profile, unit, 0.0, 5.0, 1e-3, 50);
    double worst = 0.0;
    for (std::size_t i = 0; i < ec.states.size(); ++i)
        for (int n = 1; n <= 5; ++n)
            for (int k = 0; k <= n; ++k)
                worst = std::max(worst, std::abs(ec.states[i].at(n, k) -
                                                 (ca * a.states[i].at(n, k) + cb * ev.states[i].at(n, k))));
    CHECK(worst < 1e-10);
}
