#pragma once

#include "momentlab/classical.hpp"
#include "momentlab/frequency_profile.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <vector>

namespace momentlab {

/// Weyl moments ⟨O_{n,ℓ}⟩ of a single degree n, indexed by ℓ = 0..n.
struct MomentLayer {
    int n = 0;
    std::vector<double> values;

    MomentLayer() = default;
    MomentLayer(int degree, std::vector<double> v);
    static MomentLayer zeros(int degree) { return {degree, std::vector<double>(degree + 1, 0.0)}; }

    double operator[](int l) const { return values[static_cast<std::size_t>(l)]; }
    double& operator[](int l) { return values[static_cast<std::size_t>(l)]; }
};

/// Layers n = 0..n_max of raw Weyl moments. Layer 0 is the norm, fixed to 1.
class MomentState {
public:
    MomentState() = default;
    explicit MomentState(std::vector<MomentLayer> layers);

    /// State with layer 0 = 1 and all other moments zero.
    static MomentState zeros(int n_max);

    int n_max() const { return static_cast<int>(layers_.size()) - 1; }
    const MomentLayer& layer(int n) const { return layers_.at(static_cast<std::size_t>(n)); }
    void set_layer(const MomentLayer& layer);
    double at(int n, int l) const { return layer(n)[l]; }
    const std::vector<MomentLayer>& layers() const noexcept { return layers_; }

private:
    std::vector<MomentLayer> layers_;
};

/// Integration constants of one layer in the closed-form basis, indexed by r.
struct BasisCoefficients {
    int n = 0;
    std::vector<double> c;
};

/// Right-hand side of the harmonic moment hierarchy for one layer:
/// d/dt⟨O_{n,ℓ}⟩ = (n−ℓ)/m ⟨O_{n,ℓ+1}⟩ − m ω² ℓ ⟨O_{n,ℓ−1}⟩.
std::vector<double> layer_rhs(const MomentLayer& layer, double omega_sq, double mass);

struct MomentSeries {
    std::vector<double> times;
    std::vector<MomentState> states;
    std::vector<std::string> warnings;
};

/// RK4 evolution of every layer independently on [t0, t1]; records every
/// `stride`-th grid node.
MomentSeries evolve_layers(const MomentState& initial, const FrequencyProfile& profile,
                           const SystemParams& params, double t0, double t1, double dt,
                           std::size_t stride = 1);

/// Single-layer evolution on the grid nodes; returns one layer per node.
std::vector<MomentLayer> evolve_layer(const MomentLayer& initial, const FrequencyProfile& profile,
                                      const SystemParams& params, double t0, double t1,
                                      double dt);

/// Exact rational weight (n−ℓ)! r! (n−r)! ℓ! / (n! (r−a)! (n−r−b)! a! b!),
/// converted to double once. Supports n ≤ 20.
double closed_form_weight(int n, int l, int r, int a);

/// r-th closed-form solution of layer n at component ℓ:
/// mˡ Σ_{a+b=ℓ} weight · q̇₁ᵃ q̇₂ᵇ q₁^{r−a} q₂^{n−r−b}.
double closed_form_moment(int n, int l, int r, const ClassicalState& s, double mass);
double closed_form_moment(int n, int l, int r, const TrajectoryPair& pair, double mass,
                          double t);

/// (n+1)×(n+1) matrix M[ℓ][r] = closed_form_moment(n, ℓ, r).
Eigen::MatrixXd basis_matrix(int n, const ClassicalState& s, double mass);

/// 2-norm condition number via SVD.
double condition_number(const Eigen::MatrixXd& m);

/// Expresses `initial` (moments at time t0) in the closed-form basis.
/// Throws SingularMatrixError when the basis matrix is numerically singular.
BasisCoefficients fit_basis(const MomentLayer& initial, const TrajectoryPair& pair, double mass,
                            double t0);

/// Σ_r c_r · closed_form_moment(n, ℓ, r) for every ℓ.
MomentLayer reconstruct_layer(const BasisCoefficients& coeffs, const ClassicalState& s,
                              double mass);

struct ClosedFormResidual {
    int n = 0;
    double max_residual = 0.0;
    int worst_l = 0;
    int worst_r = 0;
    double worst_t = 0.0;
    std::size_t checked_points = 0;
};

struct ClosedFormCheckOptions {
    double dt = 1e-3;         // classical solve step
    double fd_step = 1e-4;    // central-difference step
    std::size_t samples = 200; // sample times across the interval
};

/// Checks that every closed-form solution satisfies the hierarchy: central
/// finite differences of closed_form_moment against layer_rhs built from the
/// sibling closed forms. The residual at (ℓ, r) is normalised by the largest
/// |derivative| of that solution over the samples. Sample times within two
/// difference steps of a frequency jump are skipped.
ClosedFormResidual verify_closed_form(int n, const FrequencyProfile& profile,
                                      const SystemParams& params, double t0, double t1,
                                      const ClosedFormCheckOptions& options = {});

/// ⟨x̂²⟩⟨p̂²⟩ − ⟨D̂⟩² of a degree-2 layer.
double ermakov_invariant(const MomentLayer& layer2);

/// ½ Σ_ℓ (−1)^ℓ C(n,ℓ) ⟨O_{n,ℓ}⟩⟨O_{n,n−ℓ}⟩.
double higher_invariant(const MomentLayer& layer);

/// Robertson–Schrödinger product of the centred second moments.
double uncertainty_product(const MomentState& state);

/// ⟨p̂²⟩/2m + mω²⟨x̂²⟩/2.
double harmonic_energy(const MomentState& state, double omega_sq, double mass);

} // namespace momentlab
