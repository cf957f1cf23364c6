#pragma once

#include <gmpxx.h>

#include <array>
#include <compare>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace momentlab::weyl {

/// Exact complex rational re + i·im.
class GaussRational {
public:
    GaussRational() = default;
    GaussRational(mpq_class re, mpq_class im = 0);
    GaussRational(long re) : GaussRational(mpq_class(re)) {}

    static GaussRational i() { return {0, 1}; }

    const mpq_class& re() const noexcept { return re_; }
    const mpq_class& im() const noexcept { return im_; }
    bool is_zero() const { return sgn(re_) == 0 && sgn(im_) == 0; }
    GaussRational conj() const { return {re_, -im_}; }

    GaussRational& operator+=(const GaussRational& o);
    GaussRational& operator-=(const GaussRational& o);
    friend GaussRational operator+(GaussRational a, const GaussRational& b) { return a += b; }
    friend GaussRational operator-(GaussRational a, const GaussRational& b) { return a -= b; }
    friend GaussRational operator-(const GaussRational& a) { return {-a.re_, -a.im_}; }
    friend GaussRational operator*(const GaussRational& a, const GaussRational& b);
    friend bool operator==(const GaussRational& a, const GaussRational& b) {
        return a.re_ == b.re_ && a.im_ == b.im_;
    }

    std::string to_string() const;

private:
    mpq_class re_ = 0;
    mpq_class im_ = 0;
};

/// Normal-ordered monomial ħᵏ x̂ᵃ p̂ᵇ (x̂ to the left of p̂).
struct Monomial {
    int x = 0;
    int p = 0;
    int hbar = 0;

    auto operator<=>(const Monomial&) const = default;
};

/// Element of the Weyl algebra generated by x̂, p̂ with [x̂,p̂] = iħ, where ħ is
/// kept as a formal symbol. Stored in canonical normal order without zero
/// coefficients, so equality is term-wise comparison.
class WeylElement {
public:
    using Terms = std::map<Monomial, GaussRational>;

    WeylElement() = default;

    static WeylElement x();
    static WeylElement p();
    static WeylElement one() { return scalar(1); }
    static WeylElement hbar() { return term(0, 0, 1, 1); }
    static WeylElement scalar(const GaussRational& c, int hbar_power = 0) {
        return term(0, 0, hbar_power, c);
    }
    static WeylElement term(int x_power, int p_power, int hbar_power, const GaussRational& c);

    const Terms& terms() const noexcept { return terms_; }
    bool is_zero() const noexcept { return terms_.empty(); }

    /// Highest a + b over the terms, or -1 for the zero element.
    int degree() const;

    /// Formal adjoint: reverses products and conjugates coefficients.
    WeylElement adjoint() const;

    /// Drops every term carrying a positive power of ħ.
    WeylElement classical_limit() const;

    WeylElement& operator+=(const WeylElement& o);
    WeylElement& operator-=(const WeylElement& o);
    friend WeylElement operator+(WeylElement a, const WeylElement& b) { return a += b; }
    friend WeylElement operator-(WeylElement a, const WeylElement& b) { return a -= b; }
    friend WeylElement operator-(const WeylElement& a);
    friend WeylElement operator*(const WeylElement& a, const WeylElement& b);
    friend WeylElement operator*(const GaussRational& c, const WeylElement& a);
    friend bool operator==(const WeylElement&, const WeylElement&) = default;

    /// Diagnostic rendering, one term per summand: "x^2 p^1 * (3/2) h^1".
    /// The zero element renders as "0".
    std::string to_string() const;

private:
    void add_term(const Monomial& m, const GaussRational& c);

    Terms terms_;
};

WeylElement multiply(const WeylElement& a, const WeylElement& b);
WeylElement commutator(const WeylElement& a, const WeylElement& b);

/// O_{n,ℓ} = 2^{-ℓ} Σ_k C(ℓ,k) p̂ᵏ x̂^{n-ℓ} p̂^{ℓ-k}. Throws ValidationError
/// unless 0 ≤ ℓ ≤ n.
WeylElement weyl_monomial(int n, int l);

/// The quadratic generators x̂², p̂², D̂ = ½(x̂p̂ + p̂x̂).
struct SL2Triple {
    WeylElement x2;
    WeylElement p2;
    WeylElement D;

    static SL2Triple standard();
};

/// ½(x²p² + p²x²) − D² for the given triple.
WeylElement casimir(const SL2Triple& triple);

/// Image under the symplectic rotation x̂ → p̂, p̂ → −x̂.
WeylElement rotate_symplectic(const WeylElement& a);

struct IdentityCheck {
    std::string name;
    bool holds = false;
    WeylElement residual;
};

struct LadderReport {
    int n = 0;
    int l = 0;
    std::array<IdentityCheck, 3> checks;

    bool all_hold() const {
        return checks[0].holds && checks[1].holds && checks[2].holds;
    }
};

/// Checks [D̂,O_{n,ℓ}] = iħ(2ℓ−n)O_{n,ℓ}, [p̂²,O_{n,ℓ}] = −2iħ(n−ℓ)O_{n,ℓ+1}
/// and [x̂²,O_{n,ℓ}] = 2iħℓ O_{n,ℓ−1} as exact identities.
LadderReport verify_ladder(int n, int l);

/// Polynomial in ħ: power → coefficient.
using HbarPolynomial = std::map<int, GaussRational>;

/// Writes `e` as Σ_ℓ c_ℓ(ħ) O_{n,ℓ}. Returns nullopt when `e` is not in the
/// span of the degree-n layer.
std::optional<std::vector<HbarPolynomial>> expand_in_layer(const WeylElement& e, int n);

} // namespace momentlab::weyl
