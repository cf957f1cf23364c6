#include "momentlab/pde.hpp"

#include "momentlab/errors.hpp"
#include "momentlab/ode.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <sstream>

namespace momentlab {

using cplx = std::complex<double>;

void GridSpec::validate() const {
    if (!(x_max > x_min)) throw ValidationError("grid.x_max must exceed grid.x_min");
    if (points < 8 || (points & (points - 1)) != 0)
        throw ValidationError("grid.points must be a power of two >= 8");
}

double GridSpec::k(std::size_t j) const {
    const double dk = 2.0 * std::numbers::pi / length();
    const auto n = static_cast<long>(points);
    const auto jj = static_cast<long>(j);
    return dk * static_cast<double>(jj < n / 2 ? jj : jj - n);
}

GridWavefunction::GridWavefunction(GridSpec spec, std::vector<cplx> psi)
    : spec_(spec), psi_(std::move(psi)) {
    spec_.validate();
    if (psi_.size() != spec_.points)
        throw ValidationError("wavefunction sample count must equal grid.points");
}

double GridWavefunction::norm() const {
    double s = 0.0;
    for (const cplx& v : psi_) s += std::norm(v);
    return s * spec_.dx();
}

double GridWavefunction::boundary_mass() const {
    const std::size_t edge = std::max<std::size_t>(1, spec_.points / 20);
    double s = 0.0;
    for (std::size_t i = 0; i < edge; ++i)
        s += std::norm(psi_[i]) + std::norm(psi_[spec_.points - 1 - i]);
    return s * spec_.dx();
}

void GridWavefunction::normalize() {
    const double n = norm();
    if (!(n > 0.0)) throw ValidationError("cannot normalise a zero wavefunction");
    const double scale = 1.0 / std::sqrt(n);
    for (cplx& v : psi_) v *= scale;
}

GridWavefunction init_gaussian(const GaussianState& g, const GridSpec& grid,
                               const SystemParams& params) {
    g.validate();
    params.validate();
    grid.validate();
    if (!(6.0 * g.alpha < grid.length()))
        throw DomainError("pde_oracle: grid domain too small for the packet (need 6*alpha < "
                          "x_max - x_min)");
    const double hbar = params.hbar;
    const cplx A(1.0 / (4.0 * g.alpha * g.alpha), -g.beta / (2.0 * hbar * g.alpha));
    const double N = 1.0 / std::sqrt(g.alpha * std::sqrt(2.0 * std::numbers::pi));
    std::vector<cplx> psi(grid.points);
    for (std::size_t i = 0; i < grid.points; ++i) {
        const double d = grid.x(i) - g.q;
        psi[i] = N * std::exp(cplx(0.0, g.p * d / hbar) - A * d * d);
    }
    GridWavefunction w(grid, std::move(psi));
    w.normalize();
    return w;
}

// --- FFT ---------------------------------------------------------------------

namespace {
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
} // namespace

struct FourierTransform::Plans {
    std::size_t n = 0;
    fftw_complex* buffer = nullptr;
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;

    explicit Plans(std::size_t size) : n(size) {
        std::lock_guard lock(planner_mutex());
        buffer = fftw_alloc_complex(n);
        fwd = fftw_plan_dft_1d(static_cast<int>(n), buffer, buffer, FFTW_FORWARD, FFTW_ESTIMATE);
        bwd = fftw_plan_dft_1d(static_cast<int>(n), buffer, buffer, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    ~Plans() {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(bwd);
        fftw_free(buffer);
    }
    Plans(const Plans&) = delete;
    Plans& operator=(const Plans&) = delete;

    void run(fftw_plan plan, std::vector<cplx>& data) {
        std::copy(data.begin(), data.end(), reinterpret_cast<cplx*>(buffer));
        fftw_execute(plan);
        std::copy_n(reinterpret_cast<const cplx*>(buffer), n, data.begin());
    }
};

FourierTransform::FourierTransform(std::size_t n) : plans_(std::make_unique<Plans>(n)) {}
FourierTransform::~FourierTransform() = default;
FourierTransform::FourierTransform(FourierTransform&&) noexcept = default;
FourierTransform& FourierTransform::operator=(FourierTransform&&) noexcept = default;

std::size_t FourierTransform::size() const noexcept { return plans_->n; }

void FourierTransform::forward(std::vector<cplx>& data) { plans_->run(plans_->fwd, data); }

void FourierTransform::backward(std::vector<cplx>& data) {
    plans_->run(plans_->bwd, data);
    const double inv = 1.0 / static_cast<double>(plans_->n);
    for (cplx& v : data) v *= inv;
}

// --- propagation --------------------------------------------------------------

SplitStepPropagator::SplitStepPropagator(const GridSpec& grid, PotentialSpec pot,
                                         SystemParams params)
    : grid_(grid), pot_(std::move(pot)), params_(params), fft_(grid.points) {
    grid_.validate();
    params_.validate();
    x_sq_.resize(grid_.points);
    for (std::size_t i = 0; i < grid_.points; ++i) x_sq_[i] = grid_.x(i) * grid_.x(i);
}

void SplitStepPropagator::step(GridWavefunction& w, double t, double dt) {
    const double hbar = params_.hbar;
    const double m = params_.mass;
    const double mid = t + 0.5 * dt;
    auto& psi = w.psi();

    if (dt != cached_dt_ || kinetic_.empty()) {
        kinetic_.resize(grid_.points);
        for (std::size_t j = 0; j < grid_.points; ++j) {
            const double k = grid_.k(j);
            kinetic_[j] = std::polar(1.0, -hbar * k * k * dt / (2.0 * m));
        }
        cached_dt_ = dt;
    }

    const double V2 = pot_.V2(mid, m);
    std::vector<cplx> kick(grid_.points);
    for (std::size_t i = 0; i < grid_.points; ++i) {
        const double x2 = x_sq_[i];
        const double v = pot_.V0 + 0.5 * V2 * x2 + pot_.V4 / 24.0 * x2 * x2;
        kick[i] = std::polar(1.0, -v * dt / (2.0 * hbar));
    }
    for (std::size_t i = 0; i < grid_.points; ++i) psi[i] *= kick[i];
    fft_.forward(psi);
    for (std::size_t j = 0; j < grid_.points; ++j) psi[j] *= kinetic_[j];
    fft_.backward(psi);
    for (std::size_t i = 0; i < grid_.points; ++i) psi[i] *= kick[i];
}

GridWavefunction step_splitstep(GridWavefunction w, const PotentialSpec& pot,
                                const SystemParams& params, double t, double dt) {
    SplitStepPropagator prop(w.spec(), pot, params);
    prop.step(w, t, dt);
    return w;
}

// --- moments -----------------------------------------------------------------

double spectral_tail_mass(const GridWavefunction& w) {
    std::vector<cplx> spec = w.psi();
    FourierTransform fft(spec.size());
    fft.forward(spec);
    const double kmax = std::numbers::pi / w.spec().dx();
    double total = 0.0, tail = 0.0;
    for (std::size_t j = 0; j < spec.size(); ++j) {
        const double d = std::norm(spec[j]);
        total += d;
        if (std::abs(w.spec().k(j)) > 0.95 * kmax) tail += d;
    }
    return total > 0.0 ? tail / total : 0.0;
}

std::vector<double> momentum_density(const GridWavefunction& w) {
    std::vector<cplx> spec = w.psi();
    FourierTransform fft(spec.size());
    fft.forward(spec);
    std::vector<double> out(spec.size());
    double total = 0.0;
    for (std::size_t j = 0; j < spec.size(); ++j) total += out[j] = std::norm(spec[j]);
    for (double& v : out) v /= total;
    return out;
}

MomentExtractor::MomentExtractor(const GridSpec& grid, SystemParams params)
    : grid_(grid), params_(params), fft_(grid.points) {
    grid_.validate();
    params_.validate();
}

namespace {
constexpr double kTrustThreshold = 1e-10;
constexpr double kImagThreshold = 1e-9;
constexpr int kMaxGridMomentDegree = 6;
} // namespace

void MomentExtractor::prepare(const GridWavefunction& w, int max_p_power) {
    if (w.spec().points != grid_.points)
        throw ValidationError("wavefunction grid does not match the extractor grid");
    const double boundary = w.boundary_mass();
    if (!(boundary < kTrustThreshold)) {
        std::ostringstream msg;
        msg << "pde_oracle: boundary mass " << boundary << " exceeds 1e-10; moments untrusted";
        throw UntrustedResultError(msg.str());
    }
    std::vector<cplx> spec = w.psi();
    fft_.forward(spec);
    const double kmax = std::numbers::pi / grid_.dx();
    double total = 0.0, tail = 0.0;
    for (std::size_t j = 0; j < spec.size(); ++j) {
        total += std::norm(spec[j]);
        if (std::abs(grid_.k(j)) > 0.95 * kmax) tail += std::norm(spec[j]);
    }
    if (total > 0.0 && !(tail / total < kTrustThreshold)) {
        std::ostringstream msg;
        msg << "pde_oracle: spectral tail mass " << tail / total
            << " exceeds 1e-10; grid under-resolves the packet";
        throw UntrustedResultError(msg.str());
    }

    p_powers_.assign(static_cast<std::size_t>(max_p_power) + 1, {});
    p_powers_[0] = w.psi();
    std::vector<cplx> factor(grid_.points, cplx(1.0, 0.0));
    for (int j = 1; j <= max_p_power; ++j) {
        std::vector<cplx> tmp(grid_.points);
        for (std::size_t i = 0; i < grid_.points; ++i) {
            factor[i] *= params_.hbar * grid_.k(i);
            tmp[i] = spec[i] * factor[i];
        }
        fft_.backward(tmp);
        p_powers_[static_cast<std::size_t>(j)] = std::move(tmp);
    }
}

namespace {

double binomial(int n, int k) {
    double b = 1.0;
    for (int i = 0; i < k; ++i) b = b * (n - i) / (i + 1);
    return b;
}

double weighted_moment(const GridSpec& grid, const std::vector<std::vector<cplx>>& pp, int n,
                       int l) {
    const int xpow = n - l;
    cplx sum(0.0, 0.0);
    for (int k = 0; k <= l; ++k) {
        const auto& left = pp[static_cast<std::size_t>(k)];
        const auto& right = pp[static_cast<std::size_t>(l - k)];
        cplx partial(0.0, 0.0);
        for (std::size_t i = 0; i < grid.points; ++i)
            partial += std::conj(left[i]) * std::pow(grid.x(i), xpow) * right[i];
        sum += binomial(l, k) * partial;
    }
    sum *= grid.dx() / std::ldexp(1.0, l);
    if (!(std::abs(sum.imag()) < kImagThreshold)) {
        std::ostringstream msg;
        msg << "pde_oracle: moment (" << n << "," << l << ") has imaginary part " << sum.imag()
            << " above 1e-9";
        throw UntrustedResultError(msg.str());
    }
    return sum.real();
}

} // namespace

double MomentExtractor::moment(const GridWavefunction& w, int n, int l) {
    if (n < 0 || l < 0 || l > n) throw ValidationError("grid_moment requires 0 <= l <= n");
    if (n > kMaxGridMomentDegree) throw ValidationError("grid moments are limited to n <= 6");
    prepare(w, l);
    return weighted_moment(grid_, p_powers_, n, l);
}

MomentState MomentExtractor::moments(const GridWavefunction& w, int n_max) {
    if (n_max < 0 || n_max > kMaxGridMomentDegree)
        throw ValidationError("grid moments are limited to n <= 6");
    prepare(w, n_max);
    MomentState out = MomentState::zeros(n_max);
    for (int n = 1; n <= n_max; ++n) {
        MomentLayer layer = MomentLayer::zeros(n);
        for (int l = 0; l <= n; ++l) layer[l] = weighted_moment(grid_, p_powers_, n, l);
        out.set_layer(layer);
    }
    return out;
}

double grid_moment(const GridWavefunction& w, int n, int l, const SystemParams& params) {
    MomentExtractor ex(w.spec(), params);
    return ex.moment(w, n, l);
}

OracleResult run_oracle(const GridWavefunction& initial, const PotentialSpec& pot,
                        const SystemParams& params, double t0, double t1, double dt,
                        std::size_t stride, int n_max) {
    if (!(dt > 0.0)) throw ValidationError("run.dt must be positive");
    if (!(t1 > t0)) throw ValidationError("run.t1 must exceed run.t0");
    if (stride == 0) throw ValidationError("run.sample_stride must be positive");
    pot.omega.check_covers(t0, t1);
    const std::size_t steps = ode::step_count(t0, t1, dt);
    if (steps == 0 || std::abs(static_cast<double>(steps) * dt - (t1 - t0)) > 1e-9 * (t1 - t0))
        throw ValidationError("run.dt must divide the interval t1 - t0");
    const int degree = std::min(n_max, kMaxGridMomentDegree);

    SplitStepPropagator prop(initial.spec(), pot, params);
    MomentExtractor extractor(initial.spec(), params);
    GridWavefunction w = initial;
    const double norm0 = w.norm();
    const auto jumps = pot.omega.discontinuities();
    const double snap = 1e-9 * dt;

    OracleResult result{{}, 0.0, w};
    result.series.times.push_back(t0);
    result.series.states.push_back(extractor.moments(w, degree));
    for (std::size_t i = 0; i < steps; ++i) {
        const double ta = t0 + static_cast<double>(i) * dt;
        const double tb = t0 + static_cast<double>(i + 1) * dt;
        double t = ta;
        for (double j : jumps) {
            if (j > t + snap && j < tb - snap) {
                prop.step(w, t, j - t);
                t = j;
            }
        }
        prop.step(w, t, tb - t);
        result.max_norm_drift = std::max(result.max_norm_drift, std::abs(w.norm() - norm0));
        if ((i + 1) % stride == 0) {
            result.series.times.push_back(tb);
            result.series.states.push_back(extractor.moments(w, degree));
        }
    }
    result.final_state = std::move(w);
    return result;
}

} // namespace momentlab
