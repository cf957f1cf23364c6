#include "momentlab/frequency_profile.hpp"

#include "momentlab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace momentlab {
namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw ValidationError(std::string(what) + " must be finite");
}

void require_sorted(const std::vector<std::pair<double, double>>& pts, const char* what) {
    if (pts.empty()) throw ValidationError(std::string(what) + " needs at least one entry");
    for (std::size_t i = 0; i < pts.size(); ++i) {
        require_finite(pts[i].first, what);
        require_finite(pts[i].second, what);
        if (i > 0 && !(pts[i].first > pts[i - 1].first))
            throw ValidationError(std::string(what) + " times must be strictly increasing");
    }
}

} // namespace

FrequencyProfile::FrequencyProfile(Variant v, bool allow_inverted)
    : variant_(std::move(v)), allow_inverted_(allow_inverted) {}

FrequencyProfile FrequencyProfile::constant(double omega0, bool allow_inverted) {
    require_finite(omega0, "omega0");
    if (omega0 == 0.0 && !allow_inverted)
        throw ValidationError("omega0 = 0 (free particle) requires allow_inverted");
    return FrequencyProfile(ConstantOmega{omega0}, allow_inverted);
}

FrequencyProfile FrequencyProfile::sinusoidal(double omega0, double epsilon, double drive,
                                              bool allow_inverted) {
    require_finite(omega0, "omega0");
    require_finite(epsilon, "epsilon");
    require_finite(drive, "drive frequency");
    if (!allow_inverted) {
        if (omega0 == 0.0)
            throw ValidationError("omega0 = 0 (free particle) requires allow_inverted");
        if (!(std::abs(epsilon) < 1.0))
            throw ValidationError("sinusoidal epsilon must lie in (-1, 1) unless allow_inverted");
    }
    return FrequencyProfile(SinusoidalOmega{omega0, epsilon, drive}, allow_inverted);
}

FrequencyProfile FrequencyProfile::piecewise(std::vector<std::pair<double, double>> breakpoints,
                                             bool allow_inverted) {
    require_sorted(breakpoints, "piecewise breakpoints");
    if (!allow_inverted)
        for (const auto& [t, w] : breakpoints)
            if (w == 0.0) throw ValidationError("piecewise omega = 0 requires allow_inverted");
    return FrequencyProfile(PiecewiseOmega{std::move(breakpoints)}, allow_inverted);
}

FrequencyProfile FrequencyProfile::tabulated(std::vector<std::pair<double, double>> samples,
                                             bool allow_inverted) {
    require_sorted(samples, "tabulated samples");
    if (samples.size() < 2) throw ValidationError("tabulated profile needs at least two samples");
    if (!allow_inverted)
        for (const auto& [t, w] : samples)
            if (w == 0.0) throw ValidationError("tabulated omega = 0 requires allow_inverted");

    FrequencyProfile out(TabulatedOmega{samples}, allow_inverted);
    Spline& s = out.spline_;
    const std::size_t n = samples.size();
    s.t.resize(n);
    s.y.resize(n);
    s.second.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        s.t[i] = samples[i].first;
        s.y[i] = samples[i].second;
    }
    // Natural spline: tridiagonal solve for interior second derivatives.
    if (n > 2) {
        std::vector<double> diag(n, 0.0), rhs(n, 0.0), upper(n, 0.0);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double h0 = s.t[i] - s.t[i - 1];
            const double h1 = s.t[i + 1] - s.t[i];
            diag[i] = 2.0 * (h0 + h1);
            upper[i] = h1;
            rhs[i] = 6.0 * ((s.y[i + 1] - s.y[i]) / h1 - (s.y[i] - s.y[i - 1]) / h0);
        }
        for (std::size_t i = 2; i + 1 < n; ++i) {
            const double lower = s.t[i] - s.t[i - 1];
            const double f = lower / diag[i - 1];
            diag[i] -= f * upper[i - 1];
            rhs[i] -= f * rhs[i - 1];
        }
        for (std::size_t i = n - 2; i >= 1; --i) {
            s.second[i] = (rhs[i] - upper[i] * s.second[i + 1]) / diag[i];
        }
    }
    return out;
}

double FrequencyProfile::Spline::eval(double x) const {
    auto it = std::upper_bound(t.begin(), t.end(), x);
    std::size_t k = it == t.begin() ? 1 : static_cast<std::size_t>(it - t.begin());
    k = std::min(k, t.size() - 1);
    const double h = t[k] - t[k - 1];
    const double a = (t[k] - x) / h;
    const double b = (x - t[k - 1]) / h;
    return a * y[k - 1] + b * y[k] +
           ((a * a * a - a) * second[k - 1] + (b * b * b - b) * second[k]) * h * h / 6.0;
}

double FrequencyProfile::omega_sq(double t, double piece_ref) const {
    return std::visit(
        overloaded{
            [&](const ConstantOmega& c) { return c.omega0 * c.omega0; },
            [&](const SinusoidalOmega& s) {
                return s.omega0 * s.omega0 * (1.0 + s.epsilon * std::sin(s.drive * t));
            },
            [&](const PiecewiseOmega& p) {
                const auto& bp = p.breakpoints;
                if (piece_ref < bp.front().first)
                    throw DomainError("t = " + std::to_string(piece_ref) +
                                      " precedes the first piecewise breakpoint");
                auto it = std::upper_bound(
                    bp.begin(), bp.end(), piece_ref,
                    [](double v, const std::pair<double, double>& e) { return v < e.first; });
                const double w = std::prev(it)->second;
                return w * w;
            },
            [&](const TabulatedOmega& tab) {
                const auto& s = tab.samples;
                const double tol = 1e-12 * std::max(1.0, std::abs(s.back().first - s.front().first));
                if (t < s.front().first - tol || t > s.back().first + tol)
                    throw DomainError("t = " + std::to_string(t) +
                                      " outside the tabulated frequency range");
                const double w = spline_.eval(t);
                return w * w;
            },
        },
        variant_);
}

std::vector<double> FrequencyProfile::discontinuities() const {
    std::vector<double> out;
    if (const auto* p = std::get_if<PiecewiseOmega>(&variant_))
        for (std::size_t i = 1; i < p->breakpoints.size(); ++i)
            out.push_back(p->breakpoints[i].first);
    return out;
}

double FrequencyProfile::max_abs_omega(double t0, double t1) const {
    return std::visit(
        overloaded{
            [&](const ConstantOmega& c) { return std::abs(c.omega0); },
            [&](const SinusoidalOmega& s) {
                return std::abs(s.omega0) * std::sqrt(1.0 + std::abs(s.epsilon));
            },
            [&](const PiecewiseOmega& p) {
                double m = 0.0;
                const auto& bp = p.breakpoints;
                for (std::size_t i = 0; i < bp.size(); ++i) {
                    const double end = i + 1 < bp.size() ? bp[i + 1].first : t1 + 1.0;
                    if (end > t0 && bp[i].first <= t1) m = std::max(m, std::abs(bp[i].second));
                }
                return m;
            },
            [&](const TabulatedOmega&) {
                double m = 0.0;
                constexpr int probes = 1000;
                for (int i = 0; i <= probes; ++i) {
                    const double t = t0 + (t1 - t0) * i / probes;
                    m = std::max(m, std::abs(spline_.eval(t)));
                }
                for (double y : spline_.y) m = std::max(m, std::abs(y));
                return m;
            },
        },
        variant_);
}

void FrequencyProfile::check_covers(double t0, double t1) const {
    if (const auto* p = std::get_if<PiecewiseOmega>(&variant_)) {
        if (t0 < p->breakpoints.front().first)
            throw DomainError("piecewise profile starts after the simulation interval");
    } else if (const auto* tab = std::get_if<TabulatedOmega>(&variant_)) {
        if (t0 < tab->samples.front().first || t1 > tab->samples.back().first)
            throw DomainError("tabulated profile does not cover the simulation interval");
    }
}

double eval_omega_sq(const FrequencyProfile& profile, double t) { return profile.omega_sq(t); }

} // namespace momentlab
