#pragma once

// Special-function catalog: Riemann zeta (uni/multivariate), Pochhammer
// and generalized hypergeometric series, the six Rodrigues-formula
// orthogonal polynomial families, and monomials. Everything is exposed
// both as a plain value and as a series representation.

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "mtmf/expr.hpp"
#include "mtmf/mtmf.hpp"
#include "mtmf/quadrature.hpp"

namespace mtmf {

class SpecialError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Pochhammer and hypergeometric series

inline double pochhammer(double a, std::uint64_t n) {
    double r = 1.0;
    for (std::uint64_t i = 0; i < n; ++i) r *= a + static_cast<double>(i);
    return r;
}

struct HypResult {
    double value = 0.0;
    bool converged = false;
    bool diverged = false;  // outside the p<=q+1 / |x|<1 convergence regime
    bool terminated = false;  // a numerator Pochhammer hit zero (polynomial case)
    std::size_t terms = 0;
};

inline HypResult hypergeometric(const std::vector<double>& a, const std::vector<double>& b,
                                double x, const TruncationPolicy& policy = {}) {
    HypResult out;
    if (a.size() > b.size() + 1 && x != 0.0) out.diverged = true;
    if (a.size() == b.size() + 1 && std::fabs(x) >= 1.0) out.diverged = true;
    double term = 1.0;
    std::size_t small_run = 0;
    for (std::uint64_t n = 0; n < policy.max_terms; ++n) {
        out.value += term;
        ++out.terms;
        if (std::fabs(term) < policy.abs_tol) {
            if (++small_run >= policy.consecutive_small) {
                out.converged = !out.diverged;
                return out;
            }
        } else {
            small_run = 0;
        }
        double num = 1.0;
        for (double ai : a) num *= ai + static_cast<double>(n);
        if (num == 0.0) {  // series terminates: the value is exact
            out.terminated = true;
            out.converged = true;
            return out;
        }
        double den = 1.0;
        for (double bj : b) {
            double factor = bj + static_cast<double>(n);
            if (factor == 0.0)
                throw SpecialError("hypergeometric: denominator Pochhammer pole at n=" +
                                   std::to_string(n + 1) + " (b=" + std::to_string(bj) + ")");
            den *= factor;
        }
        term *= num / den * x / static_cast<double>(n + 1);
        if (!std::isfinite(term))
            throw SpecialError("hypergeometric: non-finite term at n=" + std::to_string(n + 1));
    }
    return out;  // max_terms hit
}

// Series representation of pFq: a_n = prod Pochhammer ratio, g = x1, B = N.
inline Mtmf hypergeometric_mtmf(const std::vector<double>& a, const std::vector<double>& b,
                                const TruncationPolicy& policy = {}) {
    Mtmf f;
    f.arity = 1;
    f.B = IndexSet::all();
    f.trunc = policy;
    f.g = Coefficient(Expr::variable(0));
    f.a = CoefficientFamily::closure([a, b](std::uint64_t n) -> Coefficient {
        double num = 1.0;
        for (double ai : a) num *= pochhammer(ai, n);
        double den = 1.0;
        for (double bj : b) {
            double p = pochhammer(bj, n);
            if (p == 0.0) throw SpecialError("hypergeometric: denominator Pochhammer pole");
            den *= p;
        }
        return Coefficient(Expr::constant(num / den));
    });
    return f;
}

// ---------------------------------------------------------------------------
// Riemann zeta via partial sum plus Euler-Maclaurin tail correction.

struct ZetaResult {
    double value = 0.0;
    double error_bound = 0.0;
};

inline ZetaResult zeta_detailed(double s, const TruncationPolicy& policy = {}) {
    if (!(s > 1.0)) throw SpecialError("zeta requires argument > 1");
    const double N = 2000.0;
    double sum = 0.0;
    for (double n = 1.0; n <= N; ++n) sum += std::pow(n, -s);
    // tail: integral term, half endpoint, first two Bernoulli corrections
    double tail = std::pow(N, 1.0 - s) / (s - 1.0) - 0.5 * std::pow(N, -s) +
                  s / 12.0 * std::pow(N, -s - 1.0) -
                  s * (s + 1.0) * (s + 2.0) / 720.0 * std::pow(N, -s - 3.0);
    // first omitted correction term bounds the truncation error
    double bound = std::fabs(s * (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) / 30240.0 *
                             std::pow(N, -s - 5.0)) +
                   policy.abs_tol;
    return {sum + tail, bound};
}

inline double zeta(double s, const TruncationPolicy& policy = {}) {
    return zeta_detailed(s, policy).value;
}

inline double zeta_mv(std::span<const double> x, const TruncationPolicy& policy = {}) {
    double s = 0.0;
    for (double xi : x) s += xi;
    if (!(s > 1.0)) throw SpecialError("zeta_mv requires coordinate sum > 1");
    return zeta(s, policy);
}

inline double zeta_mv(std::initializer_list<double> x, const TruncationPolicy& policy = {}) {
    return zeta_mv(std::span<const double>(x.begin(), x.size()), policy);
}

// Series representation: a_n(x) = n!/n^(x1+...+xp), g = 1, B = N+.
inline Mtmf zeta_mtmf(std::size_t arity = 1) {
    Mtmf f;
    f.arity = arity;
    f.B = IndexSet::positive();
    f.g = Coefficient(Expr::constant(1.0));
    ParseOptions opts;
    opts.allow_series_index = true;
    std::string s = "x1";
    for (std::size_t i = 2; i <= arity; ++i) s += "+x" + std::to_string(i);
    f.a = CoefficientFamily::generator(parse("fact(n)/n^(" + s + ")", arity, opts));
    f.trunc.max_terms = 170;  // fact(n) overflows past n=170
    return f;
}

// ---------------------------------------------------------------------------
// Rodrigues-formula polynomial families

struct PolynomialFamily {
    enum class Kind { ChebyshevFirst, ChebyshevSecond, Hermite, Jacobi, Laguerre, Legendre };
    Kind kind = Kind::Legendre;
    double alpha = 0.0, beta = 0.0;  // Jacobi exponents

    static PolynomialFamily chebyshev_first() { return {Kind::ChebyshevFirst}; }
    static PolynomialFamily chebyshev_second() { return {Kind::ChebyshevSecond}; }
    static PolynomialFamily hermite() { return {Kind::Hermite}; }
    static PolynomialFamily jacobi(double a, double b) {
        if (a <= -1.0 || b <= -1.0) throw SpecialError("jacobi exponents must exceed -1");
        return {Kind::Jacobi, a, b};
    }
    static PolynomialFamily laguerre() { return {Kind::Laguerre}; }
    static PolynomialFamily legendre() { return {Kind::Legendre}; }

    // support interval, with the standard tail truncation for unbounded
    // families (weight < 1e-16 outside)
    Interval support() const {
        switch (kind) {
        case Kind::Hermite: return {-12.0, 12.0};
        case Kind::Laguerre: return {0.0, 60.0};
        default: return {-1.0, 1.0};
        }
    }

    std::string name() const {
        switch (kind) {
        case Kind::ChebyshevFirst: return "chebyshev1";
        case Kind::ChebyshevSecond: return "chebyshev2";
        case Kind::Hermite: return "hermite";
        case Kind::Jacobi:
            return "jacobi(" + std::to_string(alpha) + "," + std::to_string(beta) + ")";
        case Kind::Laguerre: return "laguerre";
        case Kind::Legendre: return "legendre";
        }
        return "?";
    }

    // weight for the orthogonality integral (the reciprocal of the h
    // factor, or 1 for Legendre)
    double weight(double x) const {
        switch (kind) {
        case Kind::ChebyshevFirst: return 1.0 / std::sqrt(1.0 - x * x);
        case Kind::ChebyshevSecond: return std::sqrt(1.0 - x * x);
        case Kind::Hermite: return std::exp(-x * x);
        case Kind::Jacobi: return std::pow(1.0 - x, alpha) * std::pow(1.0 + x, beta);
        case Kind::Laguerre: return std::exp(-x);
        case Kind::Legendre: return 1.0;
        }
        return 1.0;
    }
};

// P_n = a_n * h(x) * d^n/dx^n [inner_n(x)], reduced to an explicit polynomial.
inline Expr rodrigues_poly(const PolynomialFamily& fam, std::uint64_t n) {
    using K = PolynomialFamily::Kind;
    Expr x = Expr::variable(0);
    Expr one_minus_x2 = simplify(Expr::constant(1.0) - x * x);
    double dn = static_cast<double>(n);
    double an = 1.0;
    Expr h = Expr::constant(1.0);
    Expr inner = Expr::constant(1.0);
    switch (fam.kind) {
    case K::ChebyshevFirst:
        an = (n % 2 ? -1.0 : 1.0) * std::exp2(dn) * factorial(n) / factorial(2 * n);
        h = Expr::pow(one_minus_x2, 0.5);
        inner = Expr::pow(one_minus_x2, dn - 0.5);
        break;
    case K::ChebyshevSecond:
        an = (n % 2 ? -1.0 : 1.0) * std::exp2(dn + 1.0) * (dn + 1.0) * (dn + 1.0) *
             factorial(n) / factorial(2 * n + 2);
        h = Expr::pow(one_minus_x2, -0.5);
        inner = Expr::pow(one_minus_x2, dn + 0.5);
        break;
    case K::Hermite:
        an = n % 2 ? -1.0 : 1.0;
        h = Expr::exp(x * x);
        inner = Expr::exp(Expr::constant(-1.0) * x * x);
        break;
    case K::Jacobi: {
        Expr om = simplify(Expr::constant(1.0) - x);
        Expr op = simplify(Expr::constant(1.0) + x);
        an = (n % 2 ? -1.0 : 1.0) / (std::exp2(dn) * factorial(n));
        h = Expr::pow(om, -fam.alpha) * Expr::pow(op, -fam.beta);
        inner = Expr::pow(om, fam.alpha + dn) * Expr::pow(op, fam.beta + dn);
        break;
    }
    case K::Laguerre:
        an = 1.0 / factorial(n);
        h = Expr::exp(x);
        inner = Expr::pow_int(x, static_cast<long long>(n)) *
                Expr::exp(Expr::constant(-1.0) * x);
        break;
    case K::Legendre:
        an = 1.0 / (std::exp2(dn) * factorial(n));
        inner = Expr::pow_int(simplify(x * x - Expr::constant(1.0)),
                              static_cast<long long>(n));
        break;
    }
    Expr derived = nth_derivative(simplify(inner), 0, static_cast<unsigned>(n));
    Expr poly = expand(Expr::constant(an) * h * derived);
    if (contains_kind(poly, ExprKind::Exp) || contains_kind(poly, ExprKind::Sqrt) ||
        contains_kind(poly, ExprKind::Log))
        throw SpecialError("rodrigues_poly: weight factors failed to cancel for " +
                           fam.name() + " n=" + std::to_string(n));
    return poly;
}

// Extract dense monomial coefficients [c_0 ... c_deg] from a univariate
// polynomial expression; throws if the tree is not polynomial in x1.
inline std::vector<double> poly_coefficients(const Expr& e) {
    std::vector<double> out;
    auto add = [&out](std::size_t k, double c) {
        if (out.size() <= k) out.resize(k + 1, 0.0);
        out[k] += c;
    };
    std::function<void(const Expr&, double, std::size_t)> walk =
        [&](const Expr& node, double coeff, std::size_t degree) {
            switch (node.kind()) {
            case ExprKind::Constant: add(degree, coeff * node.value()); return;
            case ExprKind::Variable:
                if (node.var_index() != 0)
                    throw SpecialError("poly_coefficients: expression is not univariate");
                add(degree + 1, coeff);
                return;
            case ExprKind::Sum:
                for (const auto& k : node.children()) walk(k, coeff, degree);
                return;
            case ExprKind::Product: {
                double c = coeff;
                std::size_t d = degree;
                for (const auto& k : node.children()) {
                    if (k.kind() == ExprKind::Constant) {
                        c *= k.value();
                    } else if (k.kind() == ExprKind::Variable && k.var_index() == 0) {
                        d += 1;
                    } else if (k.kind() == ExprKind::Power &&
                               k.child().kind() == ExprKind::Variable &&
                               k.integer_exponent() && k.exponent() > 0.0) {
                        d += static_cast<std::size_t>(k.exponent());
                    } else {
                        throw SpecialError("poly_coefficients: non-polynomial factor: " +
                                           to_string(k));
                    }
                }
                add(d, c);
                return;
            }
            case ExprKind::Power:
                if (node.child().kind() == ExprKind::Variable && node.integer_exponent() &&
                    node.exponent() > 0.0) {
                    add(degree + static_cast<std::size_t>(node.exponent()), coeff);
                    return;
                }
                throw SpecialError("poly_coefficients: non-polynomial power: " + to_string(node));
            default:
                throw SpecialError("poly_coefficients: non-polynomial node: " + to_string(node));
            }
        };
    walk(e, 1.0, 0);
    while (out.size() > 1 && out.back() == 0.0) out.pop_back();
    if (out.empty()) out.push_back(0.0);
    return out;
}

// Weighted orthogonality Gram matrix ∫ P_m P_n w over the family support.
// Chebyshev/Jacobi endpoint singularities are removed by the x = cos θ
// substitution, under which half/integer-exponent weights become analytic.
inline std::vector<std::vector<double>> orthogonality_matrix(const PolynomialFamily& fam,
                                                             std::uint64_t n_max,
                                                             const QuadratureSpec& tols = {}) {
    using K = PolynomialFamily::Kind;
    std::vector<std::vector<double>> coeffs;
    for (std::uint64_t n = 0; n <= n_max; ++n)
        coeffs.push_back(poly_coefficients(rodrigues_poly(fam, n)));
    auto horner = [&](std::uint64_t n, double x) {
        double v = 0.0;
        for (std::size_t k = coeffs[n].size(); k-- > 0;) v = v * x + coeffs[n][k];
        return v;
    };
    bool substituted = fam.kind == K::ChebyshevFirst || fam.kind == K::ChebyshevSecond ||
                       fam.kind == K::Jacobi;
    QuadratureSpec quad = tols;
    if (substituted) {
        quad.box = {{0.0, M_PI}};
    } else {
        Interval s = fam.support();
        quad.box = {{s.lo, s.hi}};
    }
    std::vector<std::vector<double>> gram(n_max + 1, std::vector<double>(n_max + 1, 0.0));
    for (std::uint64_t m = 0; m <= n_max; ++m)
        for (std::uint64_t n = m; n <= n_max; ++n) {
            auto integrand = [&](std::span<const double> p) {
                if (!substituted) {
                    double x = p[0];
                    return horner(m, x) * horner(n, x) * fam.weight(x);
                }
                double theta = p[0];
                double x = std::cos(theta);
                double pp = horner(m, x) * horner(n, x);
                switch (fam.kind) {
                case K::ChebyshevFirst:
                    return pp;  // dx/sqrt(1-x^2) = -dθ
                case K::ChebyshevSecond: {
                    double s = std::sin(theta);
                    return pp * s * s;
                }
                default: {  // Jacobi
                    double sh = std::sin(theta / 2.0), ch = std::cos(theta / 2.0);
                    double w = std::pow(2.0 * sh * sh, fam.alpha) *
                               std::pow(2.0 * ch * ch, fam.beta);
                    return pp * w * std::sin(theta);
                }
                }
            };
            QuadratureResult r = integrate(integrand, quad);
            if (!r.converged)
                throw SpecialError("orthogonality_matrix: quadrature failed for " +
                                   fam.name() + " entry (" + std::to_string(m) + "," +
                                   std::to_string(n) + ")");
            gram[m][n] = gram[n][m] = r.value;
        }
    return gram;
}

// Standard countable basis member: B={1}, g = x1^b1 ... xp^bp.
inline Mtmf monomial(const std::vector<std::uint64_t>& powers) {
    std::size_t arity = powers.empty() ? 1 : powers.size();
    Expr g = Expr::constant(1.0);
    for (std::size_t i = 0; i < powers.size(); ++i)
        g = g * Expr::pow_int(Expr::variable(static_cast<int>(i)),
                              static_cast<long long>(powers[i]));
    return trivial_rep(simplify(g), arity);
}

}  // namespace mtmf
