#include "momentlab/weyl.hpp"

#include "momentlab/errors.hpp"

#include <gmp.h>

#include <algorithm>

#include <sstream>

namespace momentlab::weyl {

GaussRational::GaussRational(mpq_class re, mpq_class im) : re_(std::move(re)), im_(std::move(im)) {
    re_.canonicalize();
    im_.canonicalize();
}

GaussRational& GaussRational::operator+=(const GaussRational& o) {
    re_ += o.re_;
    im_ += o.im_;
    return *this;
}

GaussRational& GaussRational::operator-=(const GaussRational& o) {
    re_ -= o.re_;
    im_ -= o.im_;
    return *this;
}

GaussRational operator*(const GaussRational& a, const GaussRational& b) {
    return {a.re_ * b.re_ - a.im_ * b.im_, a.re_ * b.im_ + a.im_ * b.re_};
}

std::string GaussRational::to_string() const {
    if (sgn(im_) == 0) return re_.get_str();
    if (sgn(re_) == 0) return im_.get_str() + "i";
    return re_.get_str() + (sgn(im_) > 0 ? "+" : "") + im_.get_str() + "i";
}

namespace {

mpz_class binomial(unsigned long n, unsigned long k) {
    mpz_class out;
    mpz_bin_uiui(out.get_mpz_t(), n, k);
    return out;
}

mpz_class factorial(unsigned long n) {
    mpz_class out;
    mpz_fac_ui(out.get_mpz_t(), n);
    return out;
}

// (−i)^j
GaussRational minus_i_pow(int j) {
    switch (j % 4) {
    case 0: return {1, 0};
    case 1: return {0, -1};
    case 2: return {-1, 0};
    default: return {0, 1};
    }
}

} // namespace

WeylElement WeylElement::x() { return term(1, 0, 0, 1); }
WeylElement WeylElement::p() { return term(0, 1, 0, 1); }

WeylElement WeylElement::term(int x_power, int p_power, int hbar_power, const GaussRational& c) {
    if (x_power < 0 || p_power < 0 || hbar_power < 0)
        throw ValidationError("Weyl monomial powers must be non-negative");
    WeylElement e;
    e.add_term({x_power, p_power, hbar_power}, c);
    return e;
}

void WeylElement::add_term(const Monomial& m, const GaussRational& c) {
    if (c.is_zero()) return;
    auto [it, inserted] = terms_.try_emplace(m, c);
    if (!inserted) {
        it->second += c;
        if (it->second.is_zero()) terms_.erase(it);
    }
}

int WeylElement::degree() const {
    int d = -1;
    for (const auto& [m, c] : terms_) d = std::max(d, m.x + m.p);
    return d;
}

WeylElement& WeylElement::operator+=(const WeylElement& o) {
    for (const auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
}

WeylElement& WeylElement::operator-=(const WeylElement& o) {
    for (const auto& [m, c] : o.terms_) add_term(m, -c);
    return *this;
}

WeylElement operator-(const WeylElement& a) {
    WeylElement out;
    for (const auto& [m, c] : a.terms_) out.terms_.emplace(m, -c);
    return out;
}

WeylElement operator*(const GaussRational& c, const WeylElement& a) {
    WeylElement out;
    for (const auto& [m, v] : a.terms_) out.add_term(m, c * v);
    return out;
}

// (x^a p^b)(x^c p^d) = Σ_j C(b,j) C(c,j) j! (−iħ)^j x^{a+c−j} p^{b+d−j}
WeylElement operator*(const WeylElement& lhs, const WeylElement& rhs) {
    WeylElement out;
    for (const auto& [ml, cl] : lhs.terms_) {
        for (const auto& [mr, cr] : rhs.terms_) {
            const GaussRational base = cl * cr;
            const int jmax = std::min(ml.p, mr.x);
            for (int j = 0; j <= jmax; ++j) {
                const mpz_class weight = binomial(ml.p, j) * binomial(mr.x, j) * factorial(j);
                const GaussRational c = base * minus_i_pow(j) * GaussRational(mpq_class(weight));
                out.add_term({ml.x + mr.x - j, ml.p + mr.p - j, ml.hbar + mr.hbar + j}, c);
            }
        }
    }
    return out;
}

WeylElement WeylElement::adjoint() const {
    // (c x^a p^b)† = c̄ p^b x^a
    WeylElement out;
    for (const auto& [m, c] : terms_)
        out += term(0, m.p, m.hbar, c.conj()) * term(m.x, 0, 0, 1);
    return out;
}

WeylElement WeylElement::classical_limit() const {
    WeylElement out;
    for (const auto& [m, c] : terms_)
        if (m.hbar == 0) out.terms_.emplace(m, c);
    return out;
}

std::string WeylElement::to_string() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [m, c] : terms_) {
        if (!first) os << " + ";
        first = false;
        os << "x^" << m.x << " p^" << m.p << " * (" << c.to_string() << ") h^" << m.hbar;
    }
    return os.str();
}

WeylElement multiply(const WeylElement& a, const WeylElement& b) { return a * b; }

WeylElement commutator(const WeylElement& a, const WeylElement& b) { return a * b - b * a; }

namespace {

WeylElement power(const WeylElement& base, int k) {
    WeylElement out = WeylElement::one();
    for (int i = 0; i < k; ++i) out = out * base;
    return out;
}

} // namespace

WeylElement weyl_monomial(int n, int l) {
    if (n < 0 || l < 0 || l > n)
        throw ValidationError("weyl_monomial requires 0 <= l <= n (got n=" + std::to_string(n) +
                              ", l=" + std::to_string(l) + ")");
    const WeylElement xs = power(WeylElement::x(), n - l);
    WeylElement sum;
    for (int k = 0; k <= l; ++k) {
        const WeylElement word = power(WeylElement::p(), k) * xs * power(WeylElement::p(), l - k);
        sum += GaussRational(mpq_class(binomial(l, k))) * word;
    }
    mpq_class scale(1);
    scale /= mpq_class(mpz_class(1) << l);
    return GaussRational(scale) * sum;
}

SL2Triple SL2Triple::standard() {
    return {weyl_monomial(2, 0), weyl_monomial(2, 2), weyl_monomial(2, 1)};
}

WeylElement casimir(const SL2Triple& t) {
    const GaussRational half(mpq_class(1, 2));
    return half * (t.x2 * t.p2 + t.p2 * t.x2) - t.D * t.D;
}

WeylElement rotate_symplectic(const WeylElement& a) {
    const WeylElement x_img = WeylElement::p();
    const WeylElement p_img = -WeylElement::x();
    WeylElement out;
    for (const auto& [m, c] : a.terms())
        out += WeylElement::scalar(c, m.hbar) * power(x_img, m.x) * power(p_img, m.p);
    return out;
}

LadderReport verify_ladder(int n, int l) {
    if (n < 0 || l < 0 || l > n) throw ValidationError("verify_ladder requires 0 <= l <= n");
    const SL2Triple g = SL2Triple::standard();
    const WeylElement o = weyl_monomial(n, l);
    const GaussRational i = GaussRational::i();
    auto ih = [&](long k) { return WeylElement::scalar(i * GaussRational(k), 1); };

    LadderReport report{n, l, {}};
    auto record = [&](std::size_t slot, std::string name, const WeylElement& lhs,
                      const WeylElement& rhs) {
        WeylElement residual = lhs - rhs;
        report.checks[slot] = {std::move(name), residual.is_zero(), std::move(residual)};
    };

    record(0, "[D,O] = i hbar (2l-n) O", commutator(g.D, o), ih(2L * l - n) * o);
    const WeylElement up = l < n ? weyl_monomial(n, l + 1) : WeylElement{};
    record(1, "[p^2,O] = -2 i hbar (n-l) O_{n,l+1}", commutator(g.p2, o), ih(-2L * (n - l)) * up);
    const WeylElement down = l > 0 ? weyl_monomial(n, l - 1) : WeylElement{};
    record(2, "[x^2,O] = 2 i hbar l O_{n,l-1}", commutator(g.x2, o), ih(2L * l) * down);
    return report;
}

std::optional<std::vector<HbarPolynomial>> expand_in_layer(const WeylElement& e, int n) {
    std::vector<HbarPolynomial> coeffs(static_cast<std::size_t>(n) + 1);
    std::vector<WeylElement> basis;
    for (int l = 0; l <= n; ++l) basis.push_back(weyl_monomial(n, l));

    WeylElement residual = e;
    while (!residual.is_zero()) {
        // Every O_{n,ℓ} has the single top-degree term x^{n−ℓ} p^ℓ with unit
        // coefficient, so peeling top-degree terms is a triangular solve.
        const auto top = std::find_if(residual.terms().begin(), residual.terms().end(),
                                      [&](const auto& kv) { return kv.first.x + kv.first.p == n; });
        if (top == residual.terms().end()) return std::nullopt;
        const Monomial m = top->first;
        const GaussRational c = top->second;
        coeffs[static_cast<std::size_t>(m.p)][m.hbar] += c;
        residual -= WeylElement::scalar(c, m.hbar) * basis[static_cast<std::size_t>(m.p)];
    }
    for (auto& poly : coeffs)
        std::erase_if(poly, [](const auto& kv) { return kv.second.is_zero(); });
    return coeffs;
}

} // namespace momentlab::weyl
