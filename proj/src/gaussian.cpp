#include "momentlab/gaussian.hpp"

#include "momentlab/errors.hpp"
#include "momentlab/ode.hpp"

#include <array>
#include <cmath>

namespace momentlab {

void GaussianState::validate() const {
    if (!std::isfinite(q) || !std::isfinite(p) || !std::isfinite(alpha) || !std::isfinite(beta) ||
        !std::isfinite(gamma))
        throw ValidationError("gaussian state entries must be finite");
    if (!(alpha > 0.0)) throw ValidationError("gaussian alpha must be positive");
}

namespace {

double binom(int n, int k) {
    double b = 1.0;
    for (int i = 0; i < k; ++i) b = b * (n - i) / (i + 1);
    return b;
}

} // namespace

MomentState gaussian_moments(const GaussianState& g, const SystemParams& params, int n_max) {
    g.validate();
    params.validate();
    if (n_max < 0 || n_max > 6) throw ValidationError("gaussian_moments supports n_max <= 6");

    const double hbar = params.hbar;
    const double sxx = g.alpha * g.alpha;
    const double sxp = g.alpha * g.beta;
    const double spp = g.beta * g.beta + hbar * hbar / (4.0 * g.alpha * g.alpha);

    // central[i][j] = E[ξⁱ ηʲ] for the centred Gaussian (Isserlis recursion).
    const int N = n_max;
    std::vector<std::vector<double>> central(N + 1, std::vector<double>(N + 1, 0.0));
    central[0][0] = 1.0;
    for (int total = 1; total <= N; ++total) {
        for (int i = 0; i <= total; ++i) {
            const int j = total - i;
            double v = 0.0;
            if (i > 0) {
                if (i >= 2) v += (i - 1) * sxx * central[i - 2][j];
                if (j >= 1) v += j * sxp * central[i - 1][j - 1];
            } else {
                if (j >= 2) v += (j - 1) * spp * central[0][j - 2];
            }
            central[i][j] = v;
        }
    }

    std::vector<MomentLayer> layers;
    for (int n = 0; n <= N; ++n) {
        MomentLayer layer = MomentLayer::zeros(n);
        for (int l = 0; l <= n; ++l) {
            const int a = n - l; // power of x
            const int b = l;     // power of p
            double sum = 0.0;
            for (int i = 0; i <= a; ++i)
                for (int j = 0; j <= b; ++j)
                    sum += binom(a, i) * binom(b, j) * std::pow(g.q, a - i) *
                           std::pow(g.p, b - j) * central[i][j];
            layer[l] = sum;
        }
        layers.push_back(std::move(layer));
    }
    layers[0].values[0] = 1.0;
    return MomentState(std::move(layers));
}

namespace {

GaussianRate rate_with(const GaussianState& g, double V2, double V4, const SystemParams& params) {
    const double m = params.mass;
    const double hbar = params.hbar;
    const double q = g.q, a = g.alpha;
    return {
        g.p / m,
        -(V2 * q + V4 / 6.0 * q * q * q + V4 / 2.0 * q * a * a),
        g.beta / m,
        hbar * hbar / (4.0 * m * a * a * a) - (V2 * a + V4 / 2.0 * a * a * a + V4 / 2.0 * q * q * a),
    };
}

} // namespace

GaussianRate effective_rhs(const GaussianState& g, const PotentialSpec& pot,
                           const SystemParams& params, double t) {
    if (!(g.alpha > 0.0)) throw SingularityError("gaussian_effective: alpha must stay positive");
    return rate_with(g, pot.V2(t, params.mass), pot.V4, params);
}

GaussianSeries evolve_gaussian(const GaussianState& g0, const PotentialSpec& pot,
                               const SystemParams& params, double t0, double t1, double dt,
                               std::size_t stride) {
    g0.validate();
    params.validate();
    if (stride == 0) throw ValidationError("run.sample_stride must be positive");
    if (!(dt > 0.0)) throw ValidationError("run.dt must be positive");
    if (!(t1 > t0)) throw ValidationError("run.t1 must exceed run.t0");
    pot.omega.check_covers(t0, t1);
    const std::size_t steps = ode::step_count(t0, t1, dt);
    const double floor = 1e-12 * g0.alpha;

    using State = std::array<double, 4>;
    auto rhs = [&](double t, const State& y, double ref) -> State {
        if (!(y[2] > floor))
            throw SingularityError("gaussian_effective: alpha collapsed below 1e-12 of its "
                                   "initial value");
        const GaussianRate r =
            rate_with({y[0], y[1], y[2], y[3], 0.0}, pot.V2(t, params.mass, ref), pot.V4, params);
        return {r.q, r.p, r.alpha, r.beta};
    };

    GaussianSeries out;
    const auto jumps = pot.omega.discontinuities();
    ode::integrate_uniform(State{g0.q, g0.p, g0.alpha, g0.beta}, t0, dt, steps, jumps, rhs,
                           [&](std::size_t i, double t, const State& y) {
                               if (!std::isfinite(y[2]) || !(y[2] > floor))
                                   throw SingularityError(
                                       "gaussian_effective: alpha collapsed below 1e-12 of its "
                                       "initial value");
                               if (i % stride != 0) return;
                               out.times.push_back(t);
                               out.states.push_back({y[0], y[1], y[2], y[3], g0.gamma});
                           });
    return out;
}

double kinetic_hamiltonian(const GaussianState& g, const SystemParams& params) {
    const double m = params.mass;
    return g.p * g.p / (2 * m) + g.beta * g.beta / (2 * m) +
           params.hbar * params.hbar / (8 * m * g.alpha * g.alpha);
}

double potential_hamiltonian(const GaussianState& g, const PotentialSpec& pot,
                             const SystemParams& params, double t) {
    const double V2 = pot.V2(t, params.mass);
    const double a2 = g.alpha * g.alpha;
    return pot.value(g.q, t, params.mass) + 0.5 * V2 * a2 + pot.V4 / 8.0 * a2 * a2 +
           pot.V4 / 4.0 * g.q * g.q * a2;
}

double effective_hamiltonian(const GaussianState& g, const PotentialSpec& pot,
                             const SystemParams& params, double t) {
    if (!(g.alpha > 0.0)) throw ValidationError("gaussian alpha must be positive");
    return kinetic_hamiltonian(g, params) + potential_hamiltonian(g, pot, params, t);
}

double ermakov_gaussian(const GaussianState& g, const SystemParams& params) {
    const double h2 = params.hbar * params.hbar;
    const double s = g.q * g.beta - g.p * g.alpha;
    return s * s + h2 * g.q * g.q / (4 * g.alpha * g.alpha) + h2 / 4;
}

} // namespace momentlab
