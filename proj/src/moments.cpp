#include "momentlab/moments.hpp"

#include "momentlab/errors.hpp"
#include "momentlab/ode.hpp"

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace momentlab {

MomentLayer::MomentLayer(int degree, std::vector<double> v) : n(degree), values(std::move(v)) {
    if (degree < 0) throw ValidationError("moment layer degree must be non-negative");
    if (values.size() != static_cast<std::size_t>(degree) + 1)
        throw ValidationError("moment layer " + std::to_string(degree) + " needs " +
                              std::to_string(degree + 1) + " values");
}

MomentState::MomentState(std::vector<MomentLayer> layers) : layers_(std::move(layers)) {
    if (layers_.empty()) throw ValidationError("moment state needs at least layer 0");
    for (std::size_t n = 0; n < layers_.size(); ++n)
        if (layers_[n].n != static_cast<int>(n) || layers_[n].values.size() != n + 1)
            throw ValidationError("moment state layers must be ordered n = 0..n_max");
    if (layers_[0].values[0] != 1.0) throw ValidationError("moment layer 0 must equal 1");
}

MomentState MomentState::zeros(int n_max) {
    std::vector<MomentLayer> layers;
    for (int n = 0; n <= n_max; ++n) layers.push_back(MomentLayer::zeros(n));
    layers[0].values[0] = 1.0;
    return MomentState(std::move(layers));
}

void MomentState::set_layer(const MomentLayer& layer) {
    if (layer.n < 0 || layer.n > n_max()) throw ValidationError("layer degree out of range");
    if (layer.n == 0 && layer.values[0] != 1.0)
        throw ValidationError("moment layer 0 must equal 1");
    layers_[static_cast<std::size_t>(layer.n)] = layer;
}

std::vector<double> layer_rhs(const MomentLayer& layer, double omega_sq, double mass) {
    const int n = layer.n;
    std::vector<double> out(layer.values.size(), 0.0);
    for (int l = 0; l <= n; ++l) {
        double d = 0.0;
        if (l < n) d += (n - l) / mass * layer[l + 1];
        if (l > 0) d -= mass * omega_sq * l * layer[l - 1];
        out[static_cast<std::size_t>(l)] = d;
    }
    return out;
}

std::vector<MomentLayer> evolve_layer(const MomentLayer& initial, const FrequencyProfile& profile,
                                      const SystemParams& params, double t0, double t1,
                                      double dt) {
    params.validate();
    if (!(dt > 0.0)) throw ValidationError("run.dt must be positive");
    profile.check_covers(t0, t1);
    const std::size_t steps = ode::step_count(t0, t1, dt);
    const auto jumps = profile.discontinuities();
    const int n = initial.n;
    std::vector<MomentLayer> out;
    out.reserve(steps + 1);
    auto rhs = [&](double t, const std::vector<double>& y, double ref) {
        std::vector<double> d(y.size(), 0.0);
        const double w2 = profile.omega_sq(t, ref);
        for (int l = 0; l <= n; ++l) {
            double v = 0.0;
            if (l < n) v += (n - l) / params.mass * y[static_cast<std::size_t>(l) + 1];
            if (l > 0) v -= params.mass * w2 * l * y[static_cast<std::size_t>(l) - 1];
            d[static_cast<std::size_t>(l)] = v;
        }
        return d;
    };
    ode::integrate_uniform(initial.values, t0, dt, steps, jumps, rhs,
                           [&](std::size_t, double, const std::vector<double>& y) {
                               out.emplace_back(n, y);
                           });
    return out;
}

MomentSeries evolve_layers(const MomentState& initial, const FrequencyProfile& profile,
                           const SystemParams& params, double t0, double t1, double dt,
                           std::size_t stride) {
    if (stride == 0) throw ValidationError("run.sample_stride must be positive");
    if (!(dt > 0.0)) throw ValidationError("run.dt must be positive");
    if (!(t1 > t0)) throw ValidationError("run.t1 must exceed run.t0");
    const std::size_t steps = ode::step_count(t0, t1, dt);
    if (steps == 0 || std::abs(static_cast<double>(steps) * dt - (t1 - t0)) > 1e-9 * (t1 - t0))
        throw ValidationError("run.dt must divide the interval t1 - t0");

    MomentSeries series;
    const double resolution = dt * initial.n_max() * profile.max_abs_omega(t0, t1);
    if (resolution > 0.5) {
        std::ostringstream msg;
        msg << "dt*n_max*max|omega| = " << resolution << " exceeds 0.5";
        series.warnings.push_back(msg.str());
    }

    for (std::size_t i = 0; i <= steps; i += stride) {
        series.times.push_back(t0 + static_cast<double>(i) * dt);
        series.states.push_back(initial);
    }
    // Layers never exchange data; each is integrated on its own.
    for (int n = 1; n <= initial.n_max(); ++n) {
        const auto traj = evolve_layer(initial.layer(n), profile, params, t0, t1, dt);
        for (std::size_t k = 0; k < series.times.size(); ++k)
            series.states[k].set_layer(traj[k * stride]);
    }
    return series;
}

namespace {

constexpr int kMaxClosedFormDegree = 20;

// weights[n][l][r][a]; b = l − a.
class WeightTable {
public:
    WeightTable() {
        std::vector<mpz_class> fact(kMaxClosedFormDegree + 1);
        fact[0] = 1;
        for (int i = 1; i <= kMaxClosedFormDegree; ++i) fact[i] = fact[i - 1] * i;
        table_.resize(kMaxClosedFormDegree + 1);
        for (int n = 0; n <= kMaxClosedFormDegree; ++n) {
            auto& byl = table_[n];
            byl.resize(n + 1);
            for (int l = 0; l <= n; ++l) {
                byl[l].resize(n + 1);
                for (int r = 0; r <= n; ++r) {
                    auto& bya = byl[l][r];
                    bya.assign(l + 1, 0.0);
                    for (int a = 0; a <= l; ++a) {
                        const int b = l - a;
                        if (a > r || b > n - r) continue;
                        mpq_class w(fact[n - l] * fact[r] * fact[n - r] * fact[l],
                                    fact[n] * fact[r - a] * fact[n - r - b] * fact[a] * fact[b]);
                        w.canonicalize();
                        bya[a] = w.get_d();
                    }
                }
            }
        }
    }

    double get(int n, int l, int r, int a) const { return table_[n][l][r][a]; }

private:
    std::vector<std::vector<std::vector<std::vector<double>>>> table_;
};

const WeightTable& weights() {
    static const WeightTable table;
    return table;
}

void check_indices(int n, int l, int r) {
    if (n < 0 || n > kMaxClosedFormDegree)
        throw ValidationError("closed-form degree must lie in [0, 20]");
    if (l < 0 || l > n) throw ValidationError("closed form requires 0 <= l <= n");
    if (r < 0 || r > n) throw ValidationError("closed form requires 0 <= r <= n");
}

double ipow(double x, int k) {
    double out = 1.0;
    for (int i = 0; i < k; ++i) out *= x;
    return out;
}

} // namespace

double closed_form_weight(int n, int l, int r, int a) {
    check_indices(n, l, r);
    if (a < 0 || a > l) return 0.0;
    return weights().get(n, l, r, a);
}

double closed_form_moment(int n, int l, int r, const ClassicalState& s, double mass) {
    check_indices(n, l, r);
    const WeightTable& w = weights();
    double sum = 0.0;
    for (int a = std::max(0, l - (n - r)); a <= std::min(l, r); ++a) {
        const int b = l - a;
        sum += w.get(n, l, r, a) * ipow(s.q1dot, a) * ipow(s.q2dot, b) * ipow(s.q1, r - a) *
               ipow(s.q2, n - r - b);
    }
    return ipow(mass, l) * sum;
}

double closed_form_moment(int n, int l, int r, const TrajectoryPair& pair, double mass,
                          double t) {
    return closed_form_moment(n, l, r, pair.at(t), mass);
}

Eigen::MatrixXd basis_matrix(int n, const ClassicalState& s, double mass) {
    Eigen::MatrixXd m(n + 1, n + 1);
    for (int l = 0; l <= n; ++l)
        for (int r = 0; r <= n; ++r) m(l, r) = closed_form_moment(n, l, r, s, mass);
    return m;
}

double condition_number(const Eigen::MatrixXd& m) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& sv = svd.singularValues();
    const double smin = sv(sv.size() - 1);
    if (smin == 0.0) return std::numeric_limits<double>::infinity();
    return sv(0) / smin;
}

BasisCoefficients fit_basis(const MomentLayer& initial, const TrajectoryPair& pair, double mass,
                            double t0) {
    const int n = initial.n;
    const Eigen::MatrixXd m = basis_matrix(n, pair.at(t0), mass);
    const double cond = condition_number(m);
    if (!(cond < 1e12)) {
        std::ostringstream msg;
        msg << "moment_dynamics: basis matrix for layer " << n << " is singular (condition "
            << cond << ")";
        throw SingularMatrixError(msg.str(), cond);
    }
    const Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(initial.values.data(), n + 1);
    const Eigen::VectorXd c = m.partialPivLu().solve(rhs);
    return {n, std::vector<double>(c.data(), c.data() + c.size())};
}

MomentLayer reconstruct_layer(const BasisCoefficients& coeffs, const ClassicalState& s,
                              double mass) {
    MomentLayer out = MomentLayer::zeros(coeffs.n);
    for (int l = 0; l <= coeffs.n; ++l) {
        double v = 0.0;
        for (int r = 0; r <= coeffs.n; ++r)
            v += coeffs.c[static_cast<std::size_t>(r)] * closed_form_moment(coeffs.n, l, r, s, mass);
        out[l] = v;
    }
    return out;
}

ClosedFormResidual verify_closed_form(int n, const FrequencyProfile& profile,
                                      const SystemParams& params, double t0, double t1,
                                      const ClosedFormCheckOptions& options) {
    check_indices(n, 0, 0);
    const TrajectoryPair pair = solve_classical(profile, params, t0, t1, options.dt);
    const double h = options.fd_step;
    const double m = params.mass;
    const auto jumps = profile.discontinuities();

    std::vector<double> times;
    const std::size_t count = std::max<std::size_t>(options.samples, 2);
    for (std::size_t i = 0; i < count; ++i) {
        const double t = t0 + 2 * h + (t1 - t0 - 4 * h) * static_cast<double>(i) /
                                          static_cast<double>(count - 1);
        const bool near_jump = std::any_of(jumps.begin(), jumps.end(),
                                           [&](double j) { return std::abs(t - j) < 2 * h; });
        if (!near_jump) times.push_back(t);
    }

    ClosedFormResidual result{n, 0.0, 0, 0, t0, 0};
    for (int r = 0; r <= n; ++r) {
        for (int l = 0; l <= n; ++l) {
            double scale = 0.0;
            std::vector<double> diffs;
            diffs.reserve(times.size());
            for (double t : times) {
                const double fd = (closed_form_moment(n, l, r, pair, m, t + h) -
                                   closed_form_moment(n, l, r, pair, m, t - h)) /
                                  (2 * h);
                const ClassicalState s = pair.at(t);
                double rhs = 0.0;
                if (l < n) rhs += (n - l) / m * closed_form_moment(n, l + 1, r, s, m);
                if (l > 0) rhs -= m * profile.omega_sq(t) * l * closed_form_moment(n, l - 1, r, s, m);
                scale = std::max({scale, std::abs(fd), std::abs(rhs)});
                diffs.push_back(std::abs(fd - rhs));
            }
            for (std::size_t k = 0; k < times.size(); ++k) {
                const double rel = scale > 0.0 ? diffs[k] / scale : diffs[k];
                if (rel > result.max_residual) {
                    result.max_residual = rel;
                    result.worst_l = l;
                    result.worst_r = r;
                    result.worst_t = times[k];
                }
                ++result.checked_points;
            }
        }
    }
    return result;
}

double ermakov_invariant(const MomentLayer& layer2) {
    if (layer2.n != 2) throw ValidationError("ermakov_invariant needs the n = 2 layer");
    return layer2[0] * layer2[2] - layer2[1] * layer2[1];
}

double higher_invariant(const MomentLayer& layer) {
    const int n = layer.n;
    double sum = 0.0;
    double binom = 1.0;
    for (int l = 0; l <= n; ++l) {
        const double sign = (l % 2 == 0) ? 1.0 : -1.0;
        sum += sign * binom * layer[l] * layer[n - l];
        binom = binom * (n - l) / (l + 1);
    }
    return 0.5 * sum;
}

double uncertainty_product(const MomentState& state) {
    if (state.n_max() < 2) throw ValidationError("uncertainty_product needs layers 1 and 2");
    const double x = state.at(1, 0), p = state.at(1, 1);
    const double dx = state.at(2, 0) - x * x;
    const double dp = state.at(2, 2) - p * p;
    const double dxp = state.at(2, 1) - x * p;
    return dx * dp - dxp * dxp;
}

double harmonic_energy(const MomentState& state, double omega_sq, double mass) {
    return state.at(2, 2) / (2 * mass) + 0.5 * mass * omega_sq * state.at(2, 0);
}

} // namespace momentlab
