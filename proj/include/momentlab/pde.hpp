#pragma once

#include "momentlab/classical.hpp"
#include "momentlab/gaussian.hpp"
#include "momentlab/moments.hpp"

#include <complex>
#include <cstddef>
#include <memory>
#include <vector>

namespace momentlab {

/// Uniform periodic grid xᵢ = x_min + i·dx, dx = (x_max − x_min)/N.
struct GridSpec {
    double x_min = -20.0;
    double x_max = 20.0;
    std::size_t points = 1024;

    void validate() const;
    double length() const { return x_max - x_min; }
    double dx() const { return length() / static_cast<double>(points); }
    double x(std::size_t i) const { return x_min + static_cast<double>(i) * dx(); }
    /// Angular wavenumber of FFT bin j (Nyquist bin mapped to −N/2).
    double k(std::size_t j) const;
};

class GridWavefunction {
public:
    GridWavefunction(GridSpec spec, std::vector<std::complex<double>> psi);

    const GridSpec& spec() const noexcept { return spec_; }
    const std::vector<std::complex<double>>& psi() const noexcept { return psi_; }
    std::vector<std::complex<double>>& psi() noexcept { return psi_; }

    /// Σ|ψ|² dx.
    double norm() const;
    /// Σ|ψ|² dx over the outer 5% of grid points at each end.
    double boundary_mass() const;
    void normalize();

private:
    GridSpec spec_;
    std::vector<std::complex<double>> psi_;
};

/// Samples the Gaussian ansatz with γ = 0 and renormalises on the grid.
/// Throws DomainError unless 6α fits inside the box.
GridWavefunction init_gaussian(const GaussianState& g, const GridSpec& grid,
                               const SystemParams& params);

/// In-place unnormalised FFT pair on a fixed length; FFTW-backed.
class FourierTransform {
public:
    explicit FourierTransform(std::size_t n);
    ~FourierTransform();
    FourierTransform(const FourierTransform&) = delete;
    FourierTransform& operator=(const FourierTransform&) = delete;
    FourierTransform(FourierTransform&&) noexcept;
    FourierTransform& operator=(FourierTransform&&) noexcept;

    std::size_t size() const noexcept;
    void forward(std::vector<std::complex<double>>& data);
    /// Inverse transform including the 1/N factor.
    void backward(std::vector<std::complex<double>>& data);

private:
    struct Plans;
    std::unique_ptr<Plans> plans_;
};

/// Strang splitting for iħ∂ₜψ = (p̂²/2m + V(t,x))ψ: half potential kick,
/// full kinetic drift in Fourier space, half kick. V is evaluated at the
/// step midpoint.
class SplitStepPropagator {
public:
    SplitStepPropagator(const GridSpec& grid, PotentialSpec pot, SystemParams params);

    void step(GridWavefunction& w, double t, double dt);

private:
    GridSpec grid_;
    PotentialSpec pot_;
    SystemParams params_;
    FourierTransform fft_;
    double cached_dt_ = 0.0;
    std::vector<std::complex<double>> kinetic_;
    std::vector<double> x_sq_;
};

GridWavefunction step_splitstep(GridWavefunction w, const PotentialSpec& pot,
                                const SystemParams& params, double t, double dt);

/// Weyl moments by quadrature: ⟨ψ|p̂ᵏ x̂^{n−ℓ} p̂^{ℓ−k}|ψ⟩ with p̂ applied by
/// Fourier differentiation.
class MomentExtractor {
public:
    MomentExtractor(const GridSpec& grid, SystemParams params);

    /// Throws UntrustedResultError when the packet touches the boundary,
    /// leaks into the top 5% of wavenumbers, or a moment has an imaginary
    /// part above 1e-9.
    MomentState moments(const GridWavefunction& w, int n_max);
    double moment(const GridWavefunction& w, int n, int l);

private:
    void prepare(const GridWavefunction& w, int max_p_power);

    GridSpec grid_;
    SystemParams params_;
    FourierTransform fft_;
    std::vector<std::vector<std::complex<double>>> p_powers_; // p̂ʲψ
};

double grid_moment(const GridWavefunction& w, int n, int l, const SystemParams& params);

/// Fraction of Σ|ψ̂|² in wavenumbers above 95% of Nyquist.
double spectral_tail_mass(const GridWavefunction& w);

/// |ψ̂(k)|² per FFT bin, normalised to unit sum.
std::vector<double> momentum_density(const GridWavefunction& w);

struct OracleResult {
    MomentSeries series;
    double max_norm_drift = 0.0;
    GridWavefunction final_state;
};

/// Propagates with `dt` on [t0, t1] and extracts moments (n ≤ min(n_max, 6))
/// every `stride` steps. Steps straddling a frequency jump are split there.
OracleResult run_oracle(const GridWavefunction& initial, const PotentialSpec& pot,
                        const SystemParams& params, double t0, double t1, double dt,
                        std::size_t stride, int n_max);

} // namespace momentlab
