#pragma once

#include <utility>
#include <variant>
#include <vector>

namespace momentlab {

/// ω(t) = ω₀.
struct ConstantOmega {
    double omega0 = 1.0;
};

/// ω(t)² = ω₀²(1 + ε sin Ωt).
struct SinusoidalOmega {
    double omega0 = 1.0;
    double epsilon = 0.0;
    double drive = 0.0;
};

/// ω is constant on [tᵢ, tᵢ₊₁); the last piece extends to +∞.
struct PiecewiseOmega {
    std::vector<std::pair<double, double>> breakpoints; // (start time, ω)
};

/// Natural cubic spline through (tᵢ, ωᵢ); ω² is the square of the spline.
struct TabulatedOmega {
    std::vector<std::pair<double, double>> samples;
};

/// Time-dependent frequency of V(t,x) = ½ m ω(t)² x².
///
/// ω² ≤ 0 (free particle or inverted oscillator) is rejected at construction
/// unless `allow_inverted` is set.
class FrequencyProfile {
public:
    static FrequencyProfile constant(double omega0, bool allow_inverted = false);
    static FrequencyProfile sinusoidal(double omega0, double epsilon, double drive,
                                       bool allow_inverted = false);
    static FrequencyProfile piecewise(std::vector<std::pair<double, double>> breakpoints,
                                      bool allow_inverted = false);
    static FrequencyProfile tabulated(std::vector<std::pair<double, double>> samples,
                                      bool allow_inverted = false);

    /// ω(t)². Piecewise profiles are right-continuous at breakpoints.
    double omega_sq(double t) const { return omega_sq(t, t); }

    /// ω(t)² with the piece of a piecewise profile selected by `piece_ref`
    /// instead of `t`. Integrators pass the midpoint of the current step so
    /// that stage evaluations at a step end never leak across a jump.
    double omega_sq(double t, double piece_ref) const;

    /// Times where ω is discontinuous.
    std::vector<double> discontinuities() const;

    /// Upper bound of |ω| over [t0, t1], used for step-size warnings.
    double max_abs_omega(double t0, double t1) const;

    /// Throws DomainError unless the profile is defined on all of [t0, t1].
    void check_covers(double t0, double t1) const;

    bool allow_inverted() const noexcept { return allow_inverted_; }

    using Variant = std::variant<ConstantOmega, SinusoidalOmega, PiecewiseOmega, TabulatedOmega>;
    const Variant& variant() const noexcept { return variant_; }

private:
    struct Spline {
        std::vector<double> t, y, second; // second derivatives at knots
        double eval(double x) const;
    };

    FrequencyProfile(Variant v, bool allow_inverted);

    Variant variant_;
    bool allow_inverted_ = false;
    Spline spline_;
};

/// ω(t)² of `profile`; DomainError outside a tabulated or piecewise domain.
double eval_omega_sq(const FrequencyProfile& profile, double t);

} // namespace momentlab
