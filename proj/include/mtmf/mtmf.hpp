#pragma once

// The core series value T_{g,a}(B) = sum_{n in B} a_n(x) g(x)^n / n!,
// with truncated evaluation, the trivial/simple constructions, the
// canonical linear combiner and pointwise product, and the dyadic
// simple-function approximation.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mtmf/expr.hpp"
#include "mtmf/indexset.hpp"

namespace mtmf {

inline double factorial(std::uint64_t n) {
    static const std::vector<double> table = [] {
        std::vector<double> t(171);
        t[0] = 1.0;
        for (std::size_t i = 1; i < t.size(); ++i) t[i] = t[i - 1] * static_cast<double>(i);
        return t;
    }();
    if (n < table.size()) return table[n];
    return std::numeric_limits<double>::infinity();
}

struct TruncationPolicy {
    std::size_t max_terms = 64;
    double abs_tol = 1e-12;
    std::size_t consecutive_small = 3;
};

struct EvalReport {
    double value = 0.0;
    bool converged = false;  // the tail terms fell under abs_tol
    bool truncated = false;  // max_terms hit before convergence
    std::size_t terms = 0;   // members of B actually summed
};

// One term's coefficient: either a closed form or a numeric closure (used
// for ODE solutions whose coefficients exist only as dense numeric output).
using NumericFn = std::function<double(std::span<const double>, double)>;

class Coefficient {
public:
    Coefficient() : expr_(Expr::constant(0.0)) {}
    Coefficient(Expr e) : expr_(std::move(e)) {}
    Coefficient(NumericFn f, std::string label = "<numeric>")
        : fn_(std::move(f)), label_(std::move(label)) {}

    bool symbolic() const { return !fn_; }
    const Expr& expr() const {
        if (fn_) throw ExprError("coefficient is numeric-only: " + label_);
        return expr_;
    }
    double operator()(std::span<const double> x, double t) const {
        return fn_ ? fn_(x, t) : eval(expr_, x, t);
    }
    std::string to_text() const { return fn_ ? label_ : to_string(expr_); }

private:
    Expr expr_;
    NumericFn fn_;
    std::string label_;
};

// The family n -> a_n: an explicit list, a generator expression over the
// series index n, or a closure.
class CoefficientFamily {
public:
    static CoefficientFamily explicit_list(std::vector<Coefficient> coeffs) {
        CoefficientFamily f;
        f.list_ = std::move(coeffs);
        return f;
    }
    static CoefficientFamily generator(Expr gen_with_n) {
        CoefficientFamily f;
        f.gen_ = std::move(gen_with_n);
        return f;
    }
    static CoefficientFamily closure(std::function<Coefficient(std::uint64_t)> fn) {
        CoefficientFamily f;
        f.closure_ = std::move(fn);
        return f;
    }

    Coefficient at(std::uint64_t n) const {
        if (closure_) return closure_(n);
        if (gen_.valid()) return Coefficient(simplify(subst_series_index(gen_, static_cast<double>(n))));
        if (n < list_.size()) return list_[n];
        return Coefficient(Expr::constant(0.0));
    }

    bool is_explicit() const { return !closure_ && !gen_.valid(); }
    const std::vector<Coefficient>& list() const { return list_; }
    bool has_generator() const { return gen_.valid(); }
    const Expr& generator_expr() const { return gen_; }

private:
    std::vector<Coefficient> list_;
    Expr gen_;
    std::function<Coefficient(std::uint64_t)> closure_;
};

struct Mtmf {
    std::size_t arity = 1;
    IndexSet B = IndexSet::finite({});
    CoefficientFamily a;
    Coefficient g;
    TruncationPolicy trunc;
};

namespace detail {

inline double ipow(double base, std::uint64_t n) {
    // 0^0 := 1 falls out of the loop structure
    double r = 1.0;
    while (n) {
        if (n & 1) r *= base;
        base *= base;
        n >>= 1;
    }
    return r;
}

}  // namespace detail

inline EvalReport evaluate(const Mtmf& f, std::span<const double> x, double t = 0.0) {
    if (x.size() != f.arity) throw EvalError("evaluation point arity mismatch");
    EvalReport rep;
    double gx = f.g(x, t);
    std::size_t small_run = 0;
    std::uint64_t n = 0;
    std::size_t visited = 0;  // naturals scanned, bounds the B-membership walk
    const std::size_t scan_cap = f.trunc.max_terms * 64 + 1024;
    bool exhausted = false;
    while (rep.terms < f.trunc.max_terms) {
        if (f.B.is_finite()) {
            std::uint64_t last = f.B.tag() == IndexSet::Tag::Range
                                     ? f.B.range_bound()
                                     : (f.B.elements().empty() ? 0 : f.B.elements().back());
            if (n > last) {
                exhausted = true;
                break;
            }
        } else if (visited > scan_cap) {
            break;
        }
        ++visited;
        if (!f.B.contains(n)) {
            ++n;
            continue;
        }
        double term = f.a.at(n)(x, t) * detail::ipow(gx, n) / factorial(n);
        if (!std::isfinite(term))
            throw EvalError("non-finite series term at n=" + std::to_string(n));
        rep.value += term;
        ++rep.terms;
        if (std::fabs(term) < f.trunc.abs_tol) {
            if (++small_run >= f.trunc.consecutive_small && !f.B.is_finite()) {
                rep.converged = true;
                return rep;
            }
        } else {
            small_run = 0;
        }
        ++n;
    }
    if (exhausted) {
        // a fully enumerated finite sum is exact, not truncated
        rep.converged = true;
    } else {
        rep.truncated = true;
    }
    return rep;
}

inline EvalReport evaluate(const Mtmf& f, std::initializer_list<double> x, double t = 0.0) {
    return evaluate(f, std::span<const double>(x.begin(), x.size()), t);
}

inline double evaluate_value(const Mtmf& f, std::span<const double> x, double t = 0.0) {
    return evaluate(f, x, t).value;
}

// B={1}, a=[0,1], g=h: the representation of a plain function.
inline Mtmf trivial_rep(Expr h, std::size_t arity) {
    Mtmf f;
    f.arity = arity;
    f.B = IndexSet::finite({1});
    f.a = CoefficientFamily::explicit_list({Coefficient(Expr::constant(0.0)), Coefficient(Expr::constant(1.0))});
    f.g = Coefficient(std::move(h));
    return f;
}

// Simple function sum c_k I_{C_k}: a_n(x) = n! c_n I_{C_n}(x), g = 1,
// B = indices of the cells.
inline Mtmf simple_rep(const std::vector<std::vector<Interval>>& cells,
                       const std::vector<double>& constants, std::size_t arity) {
    if (cells.size() != constants.size())
        throw ExprError("simple_rep: cells and constants differ in length");
    for (std::size_t i = 0; i < cells.size(); ++i)
        for (std::size_t j = i + 1; j < cells.size(); ++j) {
            bool overlap = true;
            for (std::size_t ax = 0; ax < arity && overlap; ++ax) {
                const Interval& u = cells[i][ax];
                const Interval& v = cells[j][ax];
                if (u.hi <= v.lo || v.hi <= u.lo) overlap = false;
            }
            if (overlap) throw ExprError("simple_rep: cells overlap");
        }
    std::vector<Coefficient> a;
    std::vector<std::uint64_t> members;
    a.emplace_back(Expr::constant(0.0));  // slot n=0 unused: I cells start at n=1
    for (std::size_t k = 0; k < cells.size(); ++k) {
        std::uint64_t n = k + 1;
        a.emplace_back(simplify(Expr::constant(factorial(n) * constants[k]) *
                                Expr::indicator(cells[k])));
        members.push_back(n);
    }
    Mtmf f;
    f.arity = arity;
    f.B = IndexSet::finite(std::move(members));
    f.a = CoefficientFamily::explicit_list(std::move(a));
    f.g = Coefficient(Expr::constant(1.0));
    return f;
}

// Canonical combiner: s = 1, s_n = alpha a_{n,1} g1^n + beta a_{n,2} g2^n.
inline Mtmf linear_combine(double alpha, const Mtmf& f1, double beta, const Mtmf& f2) {
    if (f1.arity != f2.arity) throw EvalError("linear_combine: arity mismatch");
    Mtmf out;
    out.arity = f1.arity;
    out.B = set_union(f1.B, f2.B);
    out.g = Coefficient(Expr::constant(1.0));
    out.trunc = f1.trunc;
    out.trunc.max_terms = std::max(f1.trunc.max_terms, f2.trunc.max_terms);
    auto a1 = f1.a;
    auto g1 = f1.g;
    auto B1 = f1.B;
    auto a2 = f2.a;
    auto g2 = f2.g;
    auto B2 = f2.B;
    out.a = CoefficientFamily::closure([=](std::uint64_t n) -> Coefficient {
        bool in1 = B1.contains(n), in2 = B2.contains(n);
        Coefficient c1 = in1 ? a1.at(n) : Coefficient();
        Coefficient c2 = in2 ? a2.at(n) : Coefficient();
        if ((!in1 || (c1.symbolic() && g1.symbolic())) &&
            (!in2 || (c2.symbolic() && g2.symbolic()))) {
            Expr e = Expr::constant(0.0);
            if (in1)
                e = e + Expr::constant(alpha) * c1.expr() *
                            Expr::pow_int(g1.expr(), static_cast<long long>(n));
            if (in2)
                e = e + Expr::constant(beta) * c2.expr() *
                            Expr::pow_int(g2.expr(), static_cast<long long>(n));
            return Coefficient(simplify(e));
        }
        return Coefficient(
            [=](std::span<const double> x, double t) {
                double v = 0.0;
                if (in1) v += alpha * c1(x, t) * detail::ipow(g1(x, t), n);
                if (in2) v += beta * c2(x, t) * detail::ipow(g2(x, t), n);
                return v;
            },
            "<combined n=" + std::to_string(n) + ">");
    });
    return out;
}

// Product representation: B = B1, g = g1, a_n(x) = a_{n,1}(x) * f2(x).
inline Mtmf pointwise_product(const Mtmf& f1, const Mtmf& f2) {
    if (f1.arity != f2.arity) throw EvalError("pointwise_product: arity mismatch");
    Mtmf out = f1;
    auto a1 = f1.a;
    auto f2c = f2;
    out.a = CoefficientFamily::closure([=](std::uint64_t n) -> Coefficient {
        Coefficient c1 = a1.at(n);
        return Coefficient(
            [=](std::span<const double> x, double t) {
                return c1(x, t) * evaluate(f2c, x, t).value;
            },
            "<product n=" + std::to_string(n) + ">");
    });
    return out;
}

// ---------------------------------------------------------------------------
// Dense simple-function approximation h_{j,k}: quantize a_n and g over a
// bounding box. Values are clipped to a 2^k-level grid over the function's
// range and then rounded to dyadic rationals with denominator 2^j.

inline Mtmf approx_simple(const Mtmf& f, unsigned j, unsigned k,
                          const std::vector<Interval>& domain) {
    if (domain.size() != f.arity) throw EvalError("approx_simple: domain arity mismatch");
    auto quantize = [j, k](double u) {
        double level = std::floor(u * std::exp2(static_cast<double>(k))) /
                       std::exp2(static_cast<double>(k));
        return std::round(level * std::exp2(static_cast<double>(j))) /
               std::exp2(static_cast<double>(j));
    };
    auto domain_guard = [domain](std::span<const double> x) {
        for (std::size_t ax = 0; ax < domain.size(); ++ax)
            if (x[ax] < domain[ax].lo || x[ax] > domain[ax].hi)
                throw EvalError("approx_simple: point outside quantization domain");
    };
    Mtmf out;
    out.arity = f.arity;
    out.B = f.B;
    out.trunc = f.trunc;
    auto gsrc = f.g;
    out.g = Coefficient(
        [=](std::span<const double> x, double t) {
            domain_guard(x);
            return quantize(gsrc(x, t));
        },
        "<quantized g>");
    auto asrc = f.a;
    out.a = CoefficientFamily::closure([=](std::uint64_t n) -> Coefficient {
        Coefficient c = asrc.at(n);
        return Coefficient(
            [=](std::span<const double> x, double t) {
                domain_guard(x);
                return quantize(c(x, t));
            },
            "<quantized n=" + std::to_string(n) + ">");
    });
    return out;
}

}  // namespace mtmf
