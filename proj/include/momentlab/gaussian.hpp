#pragma once

#include "momentlab/classical.hpp"
#include "momentlab/frequency_profile.hpp"
#include "momentlab/moments.hpp"

#include <cstddef>
#include <vector>

namespace momentlab {

/// Gaussian wave packet ψ ∝ e^{iγ} e^{ip(x−q)/ħ} e^{−A(x−q)²} with
/// A = 1/4α² − iβ/(2ħα). α is the position spread, β its conjugate momentum.
struct GaussianState {
    double q = 0.0;
    double p = 0.0;
    double alpha = 1.0;
    double beta = 0.0;
    double gamma = 0.0; // carried, not evolved

    void validate() const;
};

/// Time derivative of (q, p, α, β).
struct GaussianRate {
    double q = 0.0;
    double p = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
};

/// Even potential V = V₀ + V₂x²/2 + V₄x⁴/24 with V₂ = mω(t)².
struct PotentialSpec {
    double V0 = 0.0;
    FrequencyProfile omega = FrequencyProfile::constant(1.0);
    double V4 = 0.0;

    double V2(double t, double mass) const { return mass * omega.omega_sq(t); }
    double V2(double t, double mass, double piece_ref) const {
        return mass * omega.omega_sq(t, piece_ref);
    }
    double value(double x, double t, double mass) const {
        return V0 + 0.5 * V2(t, mass) * x * x + V4 / 24.0 * x * x * x * x;
    }
};

/// Weyl moments of a Gaussian state up to degree n_max ≤ 6. Higher layers
/// follow from Wick pairing of the covariance [[α², αβ], [αβ, β²+ħ²/4α²]]
/// around the mean (q, p).
MomentState gaussian_moments(const GaussianState& g, const SystemParams& params, int n_max);

/// Effective equations of motion truncated at quartic order.
GaussianRate effective_rhs(const GaussianState& g, const PotentialSpec& pot,
                           const SystemParams& params, double t);

struct GaussianSeries {
    std::vector<double> times;
    std::vector<GaussianState> states;
};

/// RK4 evolution on [t0, t1]; records every `stride`-th node. Throws
/// SingularityError if α falls below 1e-12 of its initial value.
GaussianSeries evolve_gaussian(const GaussianState& g0, const PotentialSpec& pot,
                               const SystemParams& params, double t0, double t1, double dt,
                               std::size_t stride = 1);

/// Kinetic part p²/2m + β²/2m + ħ²/(8mα²).
double kinetic_hamiltonian(const GaussianState& g, const SystemParams& params);

/// Potential average V(q) + V₂α²/2 + V₄α⁴/8 + V₄q²α²/4.
double potential_hamiltonian(const GaussianState& g, const PotentialSpec& pot,
                             const SystemParams& params, double t);

double effective_hamiltonian(const GaussianState& g, const PotentialSpec& pot,
                             const SystemParams& params, double t = 0.0);

/// Ermakov–Lewis invariant in Gaussian variables:
/// (qβ − pα)² + ħ²q²/4α² + ħ²/4.
double ermakov_gaussian(const GaussianState& g, const SystemParams& params);

} // namespace momentlab
