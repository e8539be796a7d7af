#pragma once

// Closed-form expression trees: parsing, evaluation, symbolic
// differentiation and simplification. Trees are immutable and shared;
// every operation returns a new tree.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mtmf {

class ExprError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public ExprError {
public:
    ParseError(const std::string& msg, std::size_t pos)
        : ExprError(msg + " (at position " + std::to_string(pos) + ")"), position(pos) {}
    std::size_t position;
};

class EvalError : public ExprError {
public:
    using ExprError::ExprError;
};

class DiffError : public ExprError {
public:
    using ExprError::ExprError;
};

enum class ExprKind {
    Constant,
    Variable,     // x1..xp, zero-based index
    Time,         // t
    SeriesIndex,  // n, allowed only in coefficient generators
    Sum,
    Product,
    Quotient,
    Power,        // child ^ numeric exponent
    Negate,
    Exp,
    Log,
    Sin,
    Cos,
    Sqrt,
    Abs,
    Sign,
    Indicator,    // axis-aligned box, half-open [lo, hi) per axis
    Factorial     // fact(u) = Gamma(u+1), evaluation-only
};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

class Expr {
public:
    Expr() = default;

    static Expr constant(double v);
    static Expr variable(int index);
    static Expr time_var();
    static Expr series_index();
    static Expr sum(std::vector<Expr> kids);
    static Expr product(std::vector<Expr> kids);
    static Expr quotient(Expr num, Expr den);
    static Expr pow(Expr base, double exponent);
    static Expr pow_int(Expr base, long long exponent);
    static Expr negate(Expr u);
    static Expr exp(Expr u);
    static Expr log(Expr u);
    static Expr sin(Expr u);
    static Expr cos(Expr u);
    static Expr sqrt(Expr u);
    static Expr abs(Expr u);
    static Expr sign(Expr u);
    static Expr factorial(Expr u);
    static Expr indicator(std::vector<Interval> box);

    bool valid() const { return node_ != nullptr; }
    ExprKind kind() const { return node().kind; }
    double value() const { return node().value; }
    int var_index() const { return node().var; }
    double exponent() const { return node().exponent; }
    bool integer_exponent() const { return node().int_exponent; }
    const std::vector<Expr>& children() const { return node().kids; }
    const Expr& child(std::size_t i = 0) const { return node().kids[i]; }
    const std::vector<Interval>& box() const { return node().boxes; }

    bool is_constant(double v) const {
        return valid() && kind() == ExprKind::Constant && value() == v;
    }

private:
    struct Node {
        ExprKind kind = ExprKind::Constant;
        double value = 0.0;
        int var = 0;
        double exponent = 0.0;
        bool int_exponent = false;
        std::vector<Expr> kids;
        std::vector<Interval> boxes;
    };

    explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

    const Node& node() const {
        if (!node_) throw ExprError("use of empty Expr");
        return *node_;
    }

    static Expr make(Node n) {
        return Expr(std::make_shared<const Node>(std::move(n)));
    }

    std::shared_ptr<const Node> node_;
};

inline Expr Expr::constant(double v) {
    Node n;
    n.kind = ExprKind::Constant;
    n.value = v;
    return make(std::move(n));
}

inline Expr Expr::variable(int index) {
    if (index < 0) throw ExprError("negative variable index");
    Node n;
    n.kind = ExprKind::Variable;
    n.var = index;
    return make(std::move(n));
}

inline Expr Expr::time_var() {
    Node n;
    n.kind = ExprKind::Time;
    return make(std::move(n));
}

inline Expr Expr::series_index() {
    Node n;
    n.kind = ExprKind::SeriesIndex;
    return make(std::move(n));
}

inline Expr Expr::sum(std::vector<Expr> kids) {
    Node n;
    n.kind = ExprKind::Sum;
    n.kids = std::move(kids);
    return make(std::move(n));
}

inline Expr Expr::product(std::vector<Expr> kids) {
    Node n;
    n.kind = ExprKind::Product;
    n.kids = std::move(kids);
    return make(std::move(n));
}

inline Expr Expr::quotient(Expr num, Expr den) {
    Node n;
    n.kind = ExprKind::Quotient;
    n.kids = {std::move(num), std::move(den)};
    return make(std::move(n));
}

inline Expr Expr::pow(Expr base, double exponent) {
    Node n;
    n.kind = ExprKind::Power;
    n.exponent = exponent;
    n.int_exponent = exponent == std::floor(exponent) && std::fabs(exponent) < 1e15;
    n.kids = {std::move(base)};
    return make(std::move(n));
}

inline Expr Expr::pow_int(Expr base, long long exponent) {
    return pow(std::move(base), static_cast<double>(exponent));
}

#define MTMF_UNARY_FACTORY(fn, K)            \
    inline Expr Expr::fn(Expr u) {           \
        Node n;                              \
        n.kind = ExprKind::K;                \
        n.kids = {std::move(u)};             \
        return make(std::move(n));           \
    }

MTMF_UNARY_FACTORY(negate, Negate)
MTMF_UNARY_FACTORY(exp, Exp)
MTMF_UNARY_FACTORY(log, Log)
MTMF_UNARY_FACTORY(sin, Sin)
MTMF_UNARY_FACTORY(cos, Cos)
MTMF_UNARY_FACTORY(sqrt, Sqrt)
MTMF_UNARY_FACTORY(abs, Abs)
MTMF_UNARY_FACTORY(sign, Sign)
MTMF_UNARY_FACTORY(factorial, Factorial)
#undef MTMF_UNARY_FACTORY

inline Expr Expr::indicator(std::vector<Interval> box) {
    for (const auto& iv : box)
        if (!(iv.lo <= iv.hi)) throw ExprError("indicator box has lo > hi");
    Node n;
    n.kind = ExprKind::Indicator;
    n.boxes = std::move(box);
    return make(std::move(n));
}

// Convenience builders (unsimplified nodes).
inline Expr operator+(const Expr& a, const Expr& b) { return Expr::sum({a, b}); }
inline Expr operator-(const Expr& a, const Expr& b) { return Expr::sum({a, Expr::negate(b)}); }
inline Expr operator*(const Expr& a, const Expr& b) { return Expr::product({a, b}); }
inline Expr operator/(const Expr& a, const Expr& b) { return Expr::quotient(a, b); }
inline Expr operator-(const Expr& a) { return Expr::negate(a); }
inline Expr operator*(double a, const Expr& b) { return Expr::product({Expr::constant(a), b}); }
inline Expr operator+(double a, const Expr& b) { return Expr::sum({Expr::constant(a), b}); }
inline Expr operator-(double a, const Expr& b) { return Expr::sum({Expr::constant(a), Expr::negate(b)}); }

// ---------------------------------------------------------------------------
// Structural ordering: a deterministic total order on trees, used for
// canonical sorting of sum/product children and for like-term keys.

inline int structural_compare(const Expr& a, const Expr& b) {
    if (static_cast<int>(a.kind()) != static_cast<int>(b.kind()))
        return static_cast<int>(a.kind()) < static_cast<int>(b.kind()) ? -1 : 1;
    auto cmp_double = [](double x, double y) { return x < y ? -1 : (x > y ? 1 : 0); };
    switch (a.kind()) {
    case ExprKind::Constant: return cmp_double(a.value(), b.value());
    case ExprKind::Variable:
        return a.var_index() < b.var_index() ? -1 : (a.var_index() > b.var_index() ? 1 : 0);
    case ExprKind::Time:
    case ExprKind::SeriesIndex:
        return 0;
    case ExprKind::Indicator: {
        const auto& ba = a.box();
        const auto& bb = b.box();
        if (ba.size() != bb.size()) return ba.size() < bb.size() ? -1 : 1;
        for (std::size_t i = 0; i < ba.size(); ++i) {
            if (int c = cmp_double(ba[i].lo, bb[i].lo)) return c;
            if (int c = cmp_double(ba[i].hi, bb[i].hi)) return c;
        }
        return 0;
    }
    case ExprKind::Power: {
        if (int c = structural_compare(a.child(), b.child())) return c;
        return cmp_double(a.exponent(), b.exponent());
    }
    default: {
        const auto& ka = a.children();
        const auto& kb = b.children();
        if (ka.size() != kb.size()) return ka.size() < kb.size() ? -1 : 1;
        for (std::size_t i = 0; i < ka.size(); ++i)
            if (int c = structural_compare(ka[i], kb[i])) return c;
        return 0;
    }
    }
}

inline bool structural_equal(const Expr& a, const Expr& b) {
    return structural_compare(a, b) == 0;
}

// ---------------------------------------------------------------------------
// Evaluation

inline double eval(const Expr& e, std::span<const double> x, double t = 0.0) {
    switch (e.kind()) {
    case ExprKind::Constant: return e.value();
    case ExprKind::Variable: {
        int i = e.var_index();
        if (i >= static_cast<int>(x.size()))
            throw EvalError("point has too few coordinates for x" + std::to_string(i + 1));
        return x[static_cast<std::size_t>(i)];
    }
    case ExprKind::Time: return t;
    case ExprKind::SeriesIndex:
        throw EvalError("series index n left unsubstituted");
    case ExprKind::Sum: {
        double s = 0.0;
        for (const auto& k : e.children()) s += eval(k, x, t);
        return s;
    }
    case ExprKind::Product: {
        double p = 1.0;
        for (const auto& k : e.children()) p *= eval(k, x, t);
        return p;
    }
    case ExprKind::Quotient: {
        double num = eval(e.child(0), x, t);
        double den = eval(e.child(1), x, t);
        if (den == 0.0) throw EvalError("division by zero");
        return num / den;
    }
    case ExprKind::Power: {
        double b = eval(e.child(), x, t);
        double p = e.exponent();
        if (b == 0.0) {
            if (p == 0.0) return 1.0;  // 0^0 := 1
            if (p < 0.0) throw EvalError("zero raised to negative power");
            return 0.0;
        }
        if (!e.integer_exponent() && b < 0.0)
            throw EvalError("negative base with non-integer exponent");
        return std::pow(b, p);
    }
    case ExprKind::Negate: return -eval(e.child(), x, t);
    case ExprKind::Exp: return std::exp(eval(e.child(), x, t));
    case ExprKind::Log: {
        double u = eval(e.child(), x, t);
        if (u <= 0.0) throw EvalError("log of non-positive value");
        return std::log(u);
    }
    case ExprKind::Sin: return std::sin(eval(e.child(), x, t));
    case ExprKind::Cos: return std::cos(eval(e.child(), x, t));
    case ExprKind::Sqrt: {
        double u = eval(e.child(), x, t);
        if (u < 0.0) throw EvalError("sqrt of negative value");
        return std::sqrt(u);
    }
    case ExprKind::Abs: return std::fabs(eval(e.child(), x, t));
    case ExprKind::Sign: {
        double u = eval(e.child(), x, t);
        return u > 0.0 ? 1.0 : (u < 0.0 ? -1.0 : 0.0);
    }
    case ExprKind::Indicator: {
        const auto& box = e.box();
        for (std::size_t i = 0; i < box.size(); ++i) {
            if (i >= x.size()) throw EvalError("point has too few coordinates for indicator");
            if (!(box[i].lo <= x[i] && x[i] < box[i].hi)) return 0.0;
        }
        return 1.0;
    }
    case ExprKind::Factorial: {
        double u = eval(e.child(), x, t);
        if (u <= -1.0) throw EvalError("factorial of value <= -1");
        return std::tgamma(u + 1.0);
    }
    }
    throw EvalError("unknown node kind");
}

inline double eval(const Expr& e, std::initializer_list<double> x, double t = 0.0) {
    return eval(e, std::span<const double>(x.begin(), x.size()), t);
}

// ---------------------------------------------------------------------------
// Tree queries

inline bool contains_kind(const Expr& e, ExprKind k) {
    if (e.kind() == k) return true;
    for (const auto& c : e.children())
        if (contains_kind(c, k)) return true;
    return false;
}

inline bool uses_variable(const Expr& e, int index) {
    if (e.kind() == ExprKind::Variable && e.var_index() == index) return true;
    for (const auto& c : e.children())
        if (uses_variable(c, index)) return true;
    return false;
}

inline bool uses_any_variable(const Expr& e) {
    if (e.kind() == ExprKind::Variable || e.kind() == ExprKind::Indicator) return true;
    for (const auto& c : e.children())
        if (uses_any_variable(c)) return true;
    return false;
}

inline bool uses_time(const Expr& e) {
    if (e.kind() == ExprKind::Time) return true;
    for (const auto& c : e.children())
        if (uses_time(c)) return true;
    return false;
}

inline int max_variable_index(const Expr& e) {
    int m = -1;
    if (e.kind() == ExprKind::Variable) m = e.var_index();
    for (const auto& c : e.children()) m = std::max(m, max_variable_index(c));
    return m;
}

// Substitute a concrete value for the series index n.
inline Expr subst_series_index(const Expr& e, double n) {
    if (e.kind() == ExprKind::SeriesIndex) return Expr::constant(n);
    if (e.children().empty()) return e;
    std::vector<Expr> kids;
    kids.reserve(e.children().size());
    bool changed = false;
    for (const auto& c : e.children()) {
        Expr s = subst_series_index(c, n);
        changed = changed || !structural_equal(s, c);
        kids.push_back(std::move(s));
    }
    if (!changed) return e;
    switch (e.kind()) {
    case ExprKind::Sum: return Expr::sum(std::move(kids));
    case ExprKind::Product: return Expr::product(std::move(kids));
    case ExprKind::Quotient: return Expr::quotient(kids[0], kids[1]);
    case ExprKind::Power: return Expr::pow(kids[0], e.exponent());
    case ExprKind::Negate: return Expr::negate(kids[0]);
    case ExprKind::Exp: return Expr::exp(kids[0]);
    case ExprKind::Log: return Expr::log(kids[0]);
    case ExprKind::Sin: return Expr::sin(kids[0]);
    case ExprKind::Cos: return Expr::cos(kids[0]);
    case ExprKind::Sqrt: return Expr::sqrt(kids[0]);
    case ExprKind::Abs: return Expr::abs(kids[0]);
    case ExprKind::Sign: return Expr::sign(kids[0]);
    case ExprKind::Factorial: return Expr::factorial(kids[0]);
    default: return e;
    }
}

// ---------------------------------------------------------------------------
// Simplification: constant folding, 0/1 identities, like-term collection,
// merging of powers with equal bases and of exp factors. Value-preserving
// wherever both the input and the output are defined.

namespace detail {

inline bool near_integer(double e) {
    return std::fabs(e - std::round(e)) < 1e-9;
}

Expr simp_sum(std::vector<Expr> kids);
Expr simp_product(std::vector<Expr> kids);
Expr simp_power(Expr base, double exponent);

inline Expr rebuild_power(Expr base, double exponent) {
    if (near_integer(exponent)) exponent = std::round(exponent);
    if (exponent == 0.0) return Expr::constant(1.0);
    if (exponent == 1.0) return std::move(base);
    return Expr::pow(std::move(base), exponent);
}

inline Expr simp_power(Expr base, double exponent) {
    if (near_integer(exponent)) exponent = std::round(exponent);
    if (exponent == 0.0) return Expr::constant(1.0);
    if (exponent == 1.0) return base;
    if (base.kind() == ExprKind::Constant) {
        double b = base.value();
        bool is_int = exponent == std::floor(exponent);
        if (b > 0.0 || (is_int && b != 0.0) || (b == 0.0 && exponent > 0.0))
            return Expr::constant(std::pow(b, exponent));
        return Expr::pow(std::move(base), exponent);
    }
    if (base.kind() == ExprKind::Power)
        return simp_power(base.child(), base.exponent() * exponent);
    if (base.kind() == ExprKind::Product && exponent == std::floor(exponent)) {
        std::vector<Expr> kids;
        for (const auto& k : base.children()) kids.push_back(rebuild_power(k, exponent));
        return simp_product(std::move(kids));
    }
    return Expr::pow(std::move(base), exponent);
}

inline Expr simp_product(std::vector<Expr> kids) {
    // flatten
    std::vector<Expr> flat;
    for (auto& k : kids) {
        if (k.kind() == ExprKind::Product)
            for (const auto& c : k.children()) flat.push_back(c);
        else
            flat.push_back(std::move(k));
    }
    double coeff = 1.0;
    std::vector<std::pair<Expr, double>> factors;  // base -> exponent
    std::vector<Expr> exp_args;
    auto add_factor = [&](const Expr& base, double e) {
        for (auto& f : factors) {
            if (structural_equal(f.first, base)) {
                f.second += e;
                return;
            }
        }
        factors.emplace_back(base, e);
    };
    for (const auto& f : flat) {
        switch (f.kind()) {
        case ExprKind::Constant: coeff *= f.value(); break;
        case ExprKind::Exp: exp_args.push_back(f.child()); break;
        case ExprKind::Power: add_factor(f.child(), f.exponent()); break;
        default: add_factor(f, 1.0); break;
        }
    }
    if (coeff == 0.0) return Expr::constant(0.0);
    std::vector<Expr> out;
    for (auto& [base, e] : factors) {
        Expr p = simp_power(base, e);
        if (p.kind() == ExprKind::Constant)
            coeff *= p.value();
        else
            out.push_back(std::move(p));
    }
    if (!exp_args.empty()) {
        Expr arg = exp_args.size() == 1 ? exp_args[0] : simp_sum(std::move(exp_args));
        if (arg.kind() == ExprKind::Constant)
            coeff *= std::exp(arg.value());
        else
            out.push_back(Expr::exp(std::move(arg)));
    }
    if (coeff == 0.0) return Expr::constant(0.0);
    std::sort(out.begin(), out.end(),
              [](const Expr& a, const Expr& b) { return structural_compare(a, b) < 0; });
    if (out.empty()) return Expr::constant(coeff);
    if (coeff == 1.0)
        return out.size() == 1 ? out[0] : Expr::product(std::move(out));
    std::vector<Expr> with_c;
    with_c.reserve(out.size() + 1);
    with_c.push_back(Expr::constant(coeff));
    for (auto& o : out) with_c.push_back(std::move(o));
    return Expr::product(std::move(with_c));
}

// Split a simplified term into (numeric coefficient, canonical key).
inline std::pair<double, Expr> term_key(const Expr& term) {
    if (term.kind() == ExprKind::Constant) return {term.value(), Expr()};
    if (term.kind() == ExprKind::Product && term.child(0).kind() == ExprKind::Constant) {
        std::vector<Expr> rest(term.children().begin() + 1, term.children().end());
        Expr key = rest.size() == 1 ? rest[0] : Expr::product(std::move(rest));
        return {term.child(0).value(), key};
    }
    return {1.0, term};
}

inline Expr simp_sum(std::vector<Expr> kids) {
    std::vector<Expr> flat;
    for (auto& k : kids) {
        if (k.kind() == ExprKind::Sum)
            for (const auto& c : k.children()) flat.push_back(c);
        else
            flat.push_back(std::move(k));
    }
    double constant = 0.0;
    std::vector<std::pair<Expr, double>> terms;  // key -> coefficient
    for (const auto& term : flat) {
        auto [c, key] = term_key(term);
        if (!key.valid()) {
            constant += c;
            continue;
        }
        bool merged = false;
        for (auto& t : terms) {
            if (structural_equal(t.first, key)) {
                t.second += c;
                merged = true;
                break;
            }
        }
        if (!merged) terms.emplace_back(key, c);
    }
    std::sort(terms.begin(), terms.end(), [](const auto& a, const auto& b) {
        return structural_compare(a.first, b.first) < 0;
    });
    std::vector<Expr> out;
    if (constant != 0.0) out.push_back(Expr::constant(constant));
    for (auto& [key, c] : terms) {
        if (c == 0.0) continue;
        if (c == 1.0)
            out.push_back(key);
        else
            out.push_back(simp_product({Expr::constant(c), key}));
    }
    if (out.empty()) return Expr::constant(0.0);
    if (out.size() == 1) return out[0];
    return Expr::sum(std::move(out));
}

}  // namespace detail

inline Expr simplify(const Expr& e) {
    using detail::simp_power;
    using detail::simp_product;
    using detail::simp_sum;
    switch (e.kind()) {
    case ExprKind::Constant:
    case ExprKind::Variable:
    case ExprKind::Time:
    case ExprKind::SeriesIndex:
    case ExprKind::Indicator:
        return e;
    default: break;
    }
    std::vector<Expr> kids;
    kids.reserve(e.children().size());
    for (const auto& c : e.children()) kids.push_back(simplify(c));
    switch (e.kind()) {
    case ExprKind::Sum: return simp_sum(std::move(kids));
    case ExprKind::Product: return simp_product(std::move(kids));
    case ExprKind::Negate: return simp_product({Expr::constant(-1.0), std::move(kids[0])});
    case ExprKind::Quotient:
        return simp_product({std::move(kids[0]), detail::rebuild_power(std::move(kids[1]), -1.0)});
    case ExprKind::Power: return simp_power(std::move(kids[0]), e.exponent());
    case ExprKind::Sqrt: return simp_power(std::move(kids[0]), 0.5);
    case ExprKind::Exp:
        if (kids[0].kind() == ExprKind::Constant) return Expr::constant(std::exp(kids[0].value()));
        if (kids[0].kind() == ExprKind::Log) return kids[0].child();
        return Expr::exp(std::move(kids[0]));
    case ExprKind::Log:
        if (kids[0].kind() == ExprKind::Constant && kids[0].value() > 0.0)
            return Expr::constant(std::log(kids[0].value()));
        if (kids[0].kind() == ExprKind::Exp) return kids[0].child();
        return Expr::log(std::move(kids[0]));
    case ExprKind::Sin:
        if (kids[0].kind() == ExprKind::Constant) return Expr::constant(std::sin(kids[0].value()));
        return Expr::sin(std::move(kids[0]));
    case ExprKind::Cos:
        if (kids[0].kind() == ExprKind::Constant) return Expr::constant(std::cos(kids[0].value()));
        return Expr::cos(std::move(kids[0]));
    case ExprKind::Abs:
        if (kids[0].kind() == ExprKind::Constant) return Expr::constant(std::fabs(kids[0].value()));
        return Expr::abs(std::move(kids[0]));
    case ExprKind::Sign:
        if (kids[0].kind() == ExprKind::Constant) {
            double v = kids[0].value();
            return Expr::constant(v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0));
        }
        return Expr::sign(std::move(kids[0]));
    case ExprKind::Factorial:
        if (kids[0].kind() == ExprKind::Constant && kids[0].value() > -1.0)
            return Expr::constant(std::tgamma(kids[0].value() + 1.0));
        return Expr::factorial(std::move(kids[0]));
    default: return e;
    }
}

// ---------------------------------------------------------------------------
// Polynomial expansion: distributes products over sums and expands integer
// powers of sums, so that like-term collection in simplify can reach an
// explicit polynomial form.

namespace detail {

inline Expr expand_impl(const Expr& e);

inline std::vector<Expr> addends(const Expr& e) {
    if (e.kind() == ExprKind::Sum) return e.children();
    return {e};
}

inline Expr expand_product(const std::vector<Expr>& kids) {
    std::vector<Expr> acc = {Expr::constant(1.0)};
    for (const auto& k : kids) {
        std::vector<Expr> terms = addends(k);
        std::vector<Expr> next;
        next.reserve(acc.size() * terms.size());
        if (acc.size() * terms.size() > 2'000'000)
            throw ExprError("expansion exceeds term budget");
        for (const auto& a : acc)
            for (const auto& t : terms) next.push_back(simp_product({a, t}));
        acc = addends(simp_sum(std::move(next)));
    }
    return simp_sum(std::move(acc));
}

inline Expr expand_impl(const Expr& e) {
    switch (e.kind()) {
    case ExprKind::Sum: {
        std::vector<Expr> kids;
        for (const auto& c : e.children()) kids.push_back(expand_impl(c));
        return simp_sum(std::move(kids));
    }
    case ExprKind::Product: {
        std::vector<Expr> kids;
        for (const auto& c : e.children()) kids.push_back(expand_impl(c));
        return expand_product(kids);
    }
    case ExprKind::Power: {
        Expr base = expand_impl(e.child());
        double p = e.exponent();
        if (p == std::floor(p) && p >= 2.0 && p <= 64.0 && base.kind() == ExprKind::Sum) {
            std::vector<Expr> reps(static_cast<std::size_t>(p), base);
            return expand_product(reps);
        }
        return simp_power(std::move(base), p);
    }
    default:
        return simplify(e);
    }
}

}  // namespace detail

// Expand-and-simplify to a fixpoint (bounded rounds); merging fractional
// powers can expose new integer powers of sums, hence the iteration.
inline Expr expand(const Expr& e) {
    Expr cur = simplify(e);
    for (int round = 0; round < 4; ++round) {
        Expr next = detail::expand_impl(cur);
        if (structural_equal(next, cur)) break;
        cur = std::move(next);
    }
    return cur;
}

// ---------------------------------------------------------------------------
// Symbolic differentiation

inline constexpr int kTimeAxis = -1;

inline Expr diff_raw(const Expr& e, int var) {
    auto d = [var](const Expr& u) { return diff_raw(u, var); };
    switch (e.kind()) {
    case ExprKind::Constant:
    case ExprKind::SeriesIndex:
        return Expr::constant(0.0);
    case ExprKind::Variable:
        return Expr::constant(var >= 0 && e.var_index() == var ? 1.0 : 0.0);
    case ExprKind::Time:
        return Expr::constant(var == kTimeAxis ? 1.0 : 0.0);
    case ExprKind::Sum: {
        std::vector<Expr> kids;
        for (const auto& c : e.children()) kids.push_back(d(c));
        return Expr::sum(std::move(kids));
    }
    case ExprKind::Product: {
        std::vector<Expr> terms;
        const auto& kids = e.children();
        for (std::size_t i = 0; i < kids.size(); ++i) {
            std::vector<Expr> factors = kids;
            factors[i] = d(kids[i]);
            terms.push_back(Expr::product(std::move(factors)));
        }
        return Expr::sum(std::move(terms));
    }
    case ExprKind::Quotient: {
        const Expr& a = e.child(0);
        const Expr& b = e.child(1);
        return Expr::quotient(d(a) * b - a * d(b), Expr::pow_int(b, 2));
    }
    case ExprKind::Power: {
        double p = e.exponent();
        if (p == 0.0) return Expr::constant(0.0);
        return Expr::constant(p) * Expr::pow(e.child(), p - 1.0) * d(e.child());
    }
    case ExprKind::Negate: return Expr::negate(d(e.child()));
    case ExprKind::Exp: return e * d(e.child());
    case ExprKind::Log: return Expr::quotient(d(e.child()), e.child());
    case ExprKind::Sin: return Expr::cos(e.child()) * d(e.child());
    case ExprKind::Cos: return Expr::negate(Expr::sin(e.child())) * d(e.child());
    case ExprKind::Sqrt:
        return Expr::quotient(d(e.child()), Expr::constant(2.0) * Expr::sqrt(e.child()));
    case ExprKind::Abs: return Expr::sign(e.child()) * d(e.child());
    case ExprKind::Sign: return Expr::constant(0.0);  // off the kink
    case ExprKind::Indicator:
        throw DiffError("indicator nodes are evaluation-only, cannot differentiate");
    case ExprKind::Factorial:
        throw DiffError("factorial nodes are evaluation-only, cannot differentiate");
    }
    throw DiffError("unknown node kind");
}

inline Expr diff(const Expr& e, int var) {
    return simplify(diff_raw(e, var));
}

inline Expr nth_derivative(const Expr& e, int var, unsigned n) {
    Expr cur = n == 0 ? e : simplify(e);
    for (unsigned i = 0; i < n; ++i) cur = diff(cur, var);
    return cur;
}

// ---------------------------------------------------------------------------
// Printing

namespace detail {

inline std::string format_double(double v) {
    char buf[40];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

// precedence levels: 0 sum, 1 product, 2 unary, 3 power/atom
inline std::string print_impl(const Expr& e, int parent_prec) {
    auto wrap = [&](const std::string& s, int prec) {
        return prec < parent_prec ? "(" + s + ")" : s;
    };
    switch (e.kind()) {
    case ExprKind::Constant: {
        double v = e.value();
        if (v < 0.0) return wrap("-" + format_double(-v), 2);
        return format_double(v);
    }
    case ExprKind::Variable: return "x" + std::to_string(e.var_index() + 1);
    case ExprKind::Time: return "t";
    case ExprKind::SeriesIndex: return "n";
    case ExprKind::Sum: {
        std::string s;
        bool first = true;
        for (const auto& k : e.children()) {
            std::string part = print_impl(k, 1);
            if (!first && !part.empty() && part[0] != '-') s += " + ";
            else if (!first) { s += " - "; part = part.substr(1); }
            s += part;
            first = false;
        }
        return wrap(s, 0);
    }
    case ExprKind::Product: {
        std::string s;
        bool first = true;
        for (const auto& k : e.children()) {
            if (!first) s += "*";
            s += print_impl(k, 2);
            first = false;
        }
        return wrap(s, 1);
    }
    case ExprKind::Quotient:
        return wrap(print_impl(e.child(0), 2) + " / " + print_impl(e.child(1), 3), 1);
    case ExprKind::Power:
        return wrap(print_impl(e.child(), 4) + "^" + format_double(e.exponent()), 3);
    case ExprKind::Negate: return wrap("-" + print_impl(e.child(), 3), 2);
    case ExprKind::Exp: return "exp(" + print_impl(e.child(), 0) + ")";
    case ExprKind::Log: return "log(" + print_impl(e.child(), 0) + ")";
    case ExprKind::Sin: return "sin(" + print_impl(e.child(), 0) + ")";
    case ExprKind::Cos: return "cos(" + print_impl(e.child(), 0) + ")";
    case ExprKind::Sqrt: return "sqrt(" + print_impl(e.child(), 0) + ")";
    case ExprKind::Abs: return "abs(" + print_impl(e.child(), 0) + ")";
    case ExprKind::Sign: return "sign(" + print_impl(e.child(), 0) + ")";
    case ExprKind::Factorial: return "fact(" + print_impl(e.child(), 0) + ")";
    case ExprKind::Indicator: {
        std::string s = "ind(";
        bool first = true;
        for (const auto& iv : e.box()) {
            if (!first) s += ";";
            s += format_double(iv.lo) + "," + format_double(iv.hi);
            first = false;
        }
        return s + ")";
    }
    }
    return "?";
}

}  // namespace detail

inline std::string to_string(const Expr& e) {
    return detail::print_impl(e, 0);
}

// ---------------------------------------------------------------------------
// Parser: infix with precedence ^ > unary- > * / > + -, function call
// syntax f(arg), variables x1..xp and t, indicator ind(lo,hi;...).

struct ParseOptions {
    bool allow_series_index = false;
};

namespace detail {

class Parser {
public:
    Parser(std::string_view text, std::size_t arity, ParseOptions opts)
        : text_(text), arity_(arity), opts_(opts) {}

    Expr parse() {
        Expr e = parse_expr(0);
        skip_ws();
        if (pos_ != text_.size()) throw ParseError("unexpected trailing input", pos_);
        return e;
    }

private:
    std::string_view text_;
    std::size_t arity_;
    ParseOptions opts_;
    std::size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    bool consume(char c) {
        if (peek() == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!consume(c))
            throw ParseError(std::string("expected '") + c + "'", pos_);
    }

    // binding powers: + - = 10, * / = 20, unary- = 30, ^ = 40
    Expr parse_expr(int min_bp) {
        Expr lhs = parse_prefix();
        for (;;) {
            char c = peek();
            int bp;
            switch (c) {
            case '+': case '-': bp = 10; break;
            case '*': case '/': bp = 20; break;
            case '^': bp = 40; break;
            default: return lhs;
            }
            if (bp < min_bp) return lhs;
            ++pos_;
            if (c == '^') {
                Expr rhs = parse_expr(40);  // right-assoc via prefix handling below
                lhs = make_power(std::move(lhs), std::move(rhs));
            } else {
                Expr rhs = parse_expr(bp + 1);
                switch (c) {
                case '+': lhs = lhs + rhs; break;
                case '-': lhs = lhs - rhs; break;
                case '*': lhs = lhs * rhs; break;
                case '/': lhs = lhs / rhs; break;
                }
            }
        }
    }

    Expr make_power(Expr base, Expr expo) {
        Expr folded = simplify(expo);
        if (folded.kind() == ExprKind::Constant)
            return Expr::pow(std::move(base), folded.value());
        // symbolic exponent: a^b = exp(b*log(a))
        return Expr::exp(folded * Expr::log(std::move(base)));
    }

    Expr parse_prefix() {
        char c = peek();
        if (c == '\0') throw ParseError("unexpected end of input", pos_);
        if (c == '-') {
            ++pos_;
            return Expr::negate(parse_expr(31));
        }
        if (c == '+') {
            ++pos_;
            return parse_expr(31);
        }
        if (c == '(') {
            ++pos_;
            Expr e = parse_expr(0);
            expect(')');
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c))) return parse_ident();
        throw ParseError(std::string("unexpected character '") + c + "'", pos_);
    }

    Expr parse_number() {
        skip_ws();
        const char* begin = text_.data() + pos_;
        char* end = nullptr;
        double v = std::strtod(begin, &end);
        if (end == begin) throw ParseError("malformed number", pos_);
        pos_ += static_cast<std::size_t>(end - begin);
        return Expr::constant(v);
    }

    Expr parse_ident() {
        skip_ws();
        std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        std::string name(text_.substr(start, pos_ - start));
        if (name == "t") return Expr::time_var();
        if (name == "n") {
            if (!opts_.allow_series_index)
                throw ParseError("series index n not allowed here", start);
            return Expr::series_index();
        }
        if (name == "pi") return Expr::constant(3.14159265358979323846);
        if (name == "e") return Expr::constant(2.71828182845904523536);
        if (name.size() > 1 && name[0] == 'x' &&
            std::all_of(name.begin() + 1, name.end(),
                        [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); })) {
            long idx = std::strtol(name.c_str() + 1, nullptr, 10);
            if (idx < 1) throw ParseError("variable indices start at 1", start);
            if (static_cast<std::size_t>(idx) > arity_)
                throw ParseError("variable index out of range: " + name, start);
            return Expr::variable(static_cast<int>(idx - 1));
        }
        if (name == "ind") return parse_indicator(start);
        static const struct {
            const char* name;
            Expr (*make)(Expr);
        } fns[] = {
            {"exp", &Expr::exp}, {"log", &Expr::log}, {"ln", &Expr::log},
            {"sin", &Expr::sin}, {"cos", &Expr::cos}, {"sqrt", &Expr::sqrt},
            {"abs", &Expr::abs}, {"sign", &Expr::sign}, {"fact", &Expr::factorial},
        };
        for (const auto& f : fns) {
            if (name == f.name) {
                expect('(');
                Expr arg = parse_expr(0);
                expect(')');
                return f.make(std::move(arg));
            }
        }
        throw ParseError("unknown identifier: " + name, start);
    }

    Expr parse_indicator(std::size_t start) {
        expect('(');
        std::vector<Interval> box;
        for (;;) {
            double lo = parse_const_component();
            expect(',');
            double hi = parse_const_component();
            if (lo > hi) throw ParseError("indicator interval has lo > hi", start);
            box.push_back({lo, hi});
            if (consume(';')) continue;
            expect(')');
            break;
        }
        return Expr::indicator(std::move(box));
    }

    double parse_const_component() {
        Expr e = simplify(parse_expr(0));
        if (e.kind() != ExprKind::Constant)
            throw ParseError("indicator bounds must be constant", pos_);
        return e.value();
    }
};

}  // namespace detail

inline Expr parse(std::string_view text, std::size_t arity, ParseOptions opts = {}) {
    return detail::Parser(text, arity, opts).parse();
}

}  // namespace mtmf
