#pragma once

// Differentiation of series representations: shift-operator formulas for
// the separated (coefficients-in-t, base-in-x) form, the general
// Leibniz + multinomial formula for the k-th derivative, the k-th order
// ODE residual identity, and finite-difference cross checks.

#include <cmath>
#include <cstdlib>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mtmf/expr.hpp"
#include "mtmf/mtmf.hpp"

namespace mtmf {

class CalculusError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline std::size_t combinatorial_budget() {
    if (const char* s = std::getenv("MTMF_BUDGET")) {
        long long v = std::atoll(s);
        if (v > 0) return static_cast<std::size_t>(v);
    }
    return 1'000'000;
}

// result(l) = a(l + n)
inline CoefficientFamily shift(const CoefficientFamily& a, std::uint64_t n) {
    if (n == 0) return a;
    return CoefficientFamily::closure(
        [a, n](std::uint64_t l) { return a.at(l + n); });
}

// An Mtmf of the form sum_{n=0}^{N} a_n(t) g(x)^n / n!: coefficients
// depend only on t, the base only on x.
struct SeparatedMtmf {
    Mtmf f;
    std::uint64_t N = 0;

    SeparatedMtmf(Mtmf src, std::uint64_t order) : f(std::move(src)), N(order) {
        if (f.B.tag() != IndexSet::Tag::Range || f.B.range_bound() != N)
            throw CalculusError("separated form requires B = {0..N}");
        if (!f.g.symbolic() || uses_time(f.g.expr()))
            throw CalculusError("separated form requires a symbolic, time-free base g");
        for (std::uint64_t n = 0; n <= N; ++n) {
            Coefficient c = f.a.at(n);
            if (!c.symbolic() || uses_any_variable(c.expr()))
                throw CalculusError("separated form requires coefficients in t only (a_" +
                                    std::to_string(n) + " is not)");
        }
    }
};

// d/dx_i: (dg/dx_i) * T_{g, tau(a)}(B_{N-1}), absorbed into the
// coefficients so the result is again a plain Mtmf with the same base.
inline Mtmf d1_separated(const SeparatedMtmf& s, int axis) {
    if (contains_kind(s.f.g.expr(), ExprKind::Indicator))
        throw CalculusError("cannot differentiate an indicator base");
    Expr gx = diff(s.f.g.expr(), axis);
    Mtmf out = s.f;
    if (s.N == 0) {
        // T(B_0) = a_0(t): free of x
        out.B = IndexSet::finite({});
        return out;
    }
    out.B = IndexSet::range(s.N - 1);
    auto a = s.f.a;
    out.a = CoefficientFamily::closure([a, gx](std::uint64_t n) {
        return Coefficient(simplify(gx * a.at(n + 1).expr()));
    });
    return out;
}

// d2/dx_j dx_i: g_{x_j x_i} T_{g,tau(a)}(B_{N-1}) + g_{x_i} g_{x_j}
// T_{g,tau^2(a)}(B_{N-2}), merged into one representation over B_{N-1}.
inline Mtmf d2_separated(const SeparatedMtmf& s, int axis_i, int axis_j) {
    if (s.N == 0) {
        Mtmf out = s.f;
        out.B = IndexSet::finite({});
        return out;
    }
    Expr g = s.f.g.expr();
    Expr gi = diff(g, axis_i);
    Expr gj = diff(g, axis_j);
    Expr gji = diff(gi, axis_j);
    Mtmf out = s.f;
    out.B = IndexSet::range(s.N - 1);
    auto a = s.f.a;
    std::uint64_t N = s.N;
    out.a = CoefficientFamily::closure([a, gi, gj, gji, N](std::uint64_t n) {
        Expr e = gji * a.at(n + 1).expr();
        if (n + 2 <= N) e = e + gi * gj * a.at(n + 2).expr();
        return Coefficient(simplify(e));
    });
    return out;
}

namespace detail {

// partitions of l as multisets of positive parts
inline void enumerate_partitions(std::uint64_t l, std::uint64_t max_part,
                                 std::vector<std::uint64_t>& current,
                                 const std::function<void(const std::vector<std::uint64_t>&)>& emit) {
    if (l == 0) {
        emit(current);
        return;
    }
    for (std::uint64_t part = std::min(l, max_part); part >= 1; --part) {
        current.push_back(part);
        enumerate_partitions(l - part, part, current, emit);
        current.pop_back();
    }
}

// d^l (g^n) / dx^l as an expression, via the partition form of the
// product-rule sum: for each partition (lambda_1 >= ... >= lambda_r) of l
// with r <= n parts, the ordered compositions it represents number
// l!/(prod lambda_i!) * n!/((n-r)! prod_j m_j!), m_j the multiplicities.
inline Expr power_derivative(const std::vector<Expr>& gders, std::uint64_t n, std::uint64_t l,
                             std::size_t& budget) {
    if (l == 0) return Expr::pow_int(gders[0], static_cast<long long>(n));
    if (n == 0) return Expr::constant(0.0);
    std::vector<Expr> terms;
    std::vector<std::uint64_t> current;
    bool overflow = false;
    enumerate_partitions(l, l, current, [&](const std::vector<std::uint64_t>& parts) {
        std::uint64_t r = parts.size();
        if (r > n) return;
        if (budget == 0) {
            overflow = true;
            return;
        }
        --budget;
        double mult = factorial(l);
        for (auto p : parts) mult /= factorial(p);
        // distinct arrangements of the parts over n slots
        double arrangements = 1.0;
        for (std::uint64_t i = 0; i < r; ++i) arrangements *= static_cast<double>(n - i);
        std::uint64_t run = 1;
        for (std::uint64_t i = 1; i <= r; ++i) {
            if (i < r && parts[i] == parts[i - 1]) {
                ++run;
            } else {
                arrangements /= factorial(run);
                run = 1;
            }
        }
        Expr term = Expr::constant(mult * arrangements) *
                    Expr::pow_int(gders[0], static_cast<long long>(n - r));
        for (auto p : parts) term = term * gders[p];
        terms.push_back(term);
    });
    if (overflow)
        throw CalculusError("derivative assembly exceeds the combinatorial budget "
                            "(raise MTMF_BUDGET to override)");
    if (terms.empty()) return Expr::constant(0.0);
    return simplify(Expr::sum(std::move(terms)));
}

}  // namespace detail

// Evaluator for the k-th partial derivative of f along one axis, built from
// the Leibniz + multinomial double sum.
struct DerivativeEvaluator {
    Expr expr;
    double operator()(std::span<const double> x, double t = 0.0) const {
        return eval(expr, x, t);
    }
    double operator()(std::initializer_list<double> x, double t = 0.0) const {
        return eval(expr, std::span<const double>(x.begin(), x.size()), t);
    }
};

inline DerivativeEvaluator dk_general(const Mtmf& f, int axis, unsigned k) {
    if (!f.g.symbolic()) throw CalculusError("dk_general requires a symbolic base");
    std::size_t budget = combinatorial_budget();
    std::vector<std::uint64_t> members =
        f.B.is_finite() ? f.B.enumerate_up_to(f.B.tag() == IndexSet::Tag::Range
                                                  ? f.B.range_bound()
                                                  : (f.B.elements().empty()
                                                         ? 0
                                                         : f.B.elements().back()))
                        : f.B.first_members(f.trunc.max_terms);
    if (members.size() > f.trunc.max_terms) members.resize(f.trunc.max_terms);
    std::vector<Expr> gders = {f.g.expr()};
    for (unsigned i = 1; i <= k; ++i) gders.push_back(diff(gders.back(), axis));
    std::vector<Expr> terms;
    for (std::uint64_t n : members) {
        Coefficient cn = f.a.at(n);
        if (!cn.symbolic())
            throw CalculusError("dk_general requires symbolic coefficients (a_" +
                                std::to_string(n) + " is numeric)");
        std::vector<Expr> aders = {cn.expr()};
        for (unsigned i = 1; i <= k; ++i) aders.push_back(diff(aders.back(), axis));
        for (unsigned l = 0; l <= k; ++l) {
            double binom = factorial(k) / (factorial(l) * factorial(k - l));
            Expr piece = Expr::constant(binom / factorial(n)) * aders[k - l] *
                         detail::power_derivative(gders, n, l, budget);
            terms.push_back(piece);
        }
    }
    DerivativeEvaluator out;
    out.expr = terms.empty() ? Expr::constant(0.0) : simplify(Expr::sum(std::move(terms)));
    return out;
}

// Residual of the k-th order ODE identity satisfied by the partial
// solution y = T_{g, tau(a)}(B_{N-1}):
//   sum_{n=0}^{k} C(k,n) g^{(k-n+1)} y^{(n)}
//     = sum_{n=0}^{N} (a_n/n!) sum_{compositions of k+1} c Pi g^{(k_i)}.
inline std::vector<double> residual_kth_ode(const SeparatedMtmf& s, int axis, unsigned k,
                                            std::span<const double> grid, double t = 0.0) {
    if (s.N <= 1) throw CalculusError("residual identity requires N > 1");
    std::size_t budget = combinatorial_budget();
    Expr g = s.f.g.expr();
    std::vector<Expr> gders = {g};
    for (unsigned i = 1; i <= k + 1; ++i) gders.push_back(diff(gders.back(), axis));
    // partial solution y as an explicit truncated sum
    std::vector<Expr> yterms;
    for (std::uint64_t n = 0; n + 1 <= s.N; ++n)
        yterms.push_back(Expr::constant(1.0 / factorial(n)) * s.f.a.at(n + 1).expr() *
                         Expr::pow_int(g, static_cast<long long>(n)));
    Expr y = simplify(Expr::sum(std::move(yterms)));
    std::vector<Expr> yders = {y};
    for (unsigned i = 1; i <= k; ++i) yders.push_back(diff(yders.back(), axis));
    std::vector<Expr> lhs_terms;
    for (unsigned n = 0; n <= k; ++n) {
        double binom = factorial(k) / (factorial(n) * factorial(k - n));
        lhs_terms.push_back(Expr::constant(binom) * gders[k - n + 1] * yders[n]);
    }
    Expr lhs = simplify(Expr::sum(std::move(lhs_terms)));
    std::vector<Expr> rhs_terms;
    for (std::uint64_t n = 0; n <= s.N; ++n)
        rhs_terms.push_back(Expr::constant(1.0 / factorial(n)) * s.f.a.at(n).expr() *
                            detail::power_derivative(gders, n, k + 1, budget));
    Expr rhs = simplify(Expr::sum(std::move(rhs_terms)));
    Expr residual = simplify(lhs - rhs);
    std::vector<double> out;
    out.reserve(grid.size());
    for (double x : grid) out.push_back(eval(residual, {&x, 1}, t));
    return out;
}

// Relative deviation between an evaluator and a central finite-difference
// stencil of the underlying series.
inline double fd_check(const Mtmf& f, const DerivativeEvaluator& deriv,
                       std::span<const double> x, int axis, unsigned k, double t = 0.0) {
    if (k > 4) throw CalculusError("finite-difference stencils provided up to order 4");
    std::vector<double> p(x.begin(), x.end());
    auto at = [&](double offset) {
        double saved = p[static_cast<std::size_t>(axis)];
        p[static_cast<std::size_t>(axis)] = saved + offset;
        double v = evaluate(f, p, t).value;
        p[static_cast<std::size_t>(axis)] = saved;
        return v;
    };
    double h = k <= 2 ? 1e-4 : 1e-2;
    double fd = 0.0;
    switch (k) {
    case 0: fd = at(0.0); break;
    case 1: fd = (at(h) - at(-h)) / (2.0 * h); break;
    case 2: fd = (at(h) - 2.0 * at(0.0) + at(-h)) / (h * h); break;
    case 3: fd = (at(2.0 * h) - 2.0 * at(h) + 2.0 * at(-h) - at(-2.0 * h)) / (2.0 * h * h * h);
        break;
    default:
        fd = (at(2.0 * h) - 4.0 * at(h) + 6.0 * at(0.0) - 4.0 * at(-h) + at(-2.0 * h)) /
             (h * h * h * h);
        break;
    }
    double v = deriv(x, t);
    return std::fabs(v - fd) / (1.0 + std::fabs(v));
}

}  // namespace mtmf
