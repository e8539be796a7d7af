#pragma once

// Lie-series machinery: iterated applications of a first-order differential
// operator, the exponential series sum c^n L^n g / n!, and the nonlinear
// first-order initial value solver built from the planar field
// L = d/dx + h(x,z) d/dz applied to z at the origin.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "mtmf/expr.hpp"
#include "mtmf/indexset.hpp"
#include "mtmf/mtmf.hpp"

namespace mtmf {

class LieError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline std::size_t node_count(const Expr& e) {
    std::size_t n = 1;
    for (const auto& c : e.children()) n += node_count(c);
    return n;
}

struct LieOperator {
    enum class Kind {
        SingleVar,    // L = f(x1) d/dx1
        PlanarField,  // L = d/dx1 + h(x1, x2) d/dx2
    };
    Kind kind = Kind::SingleVar;
    Expr f;  // the coefficient f, or the field component h

    static LieOperator single(Expr f) { return {Kind::SingleVar, std::move(f)}; }
    static LieOperator planar(Expr h) { return {Kind::PlanarField, std::move(h)}; }

    Expr apply(const Expr& g) const {
        // expanding collects like terms; without it the iterated powers
        // balloon far past the node budget
        switch (kind) {
        case Kind::SingleVar: return expand(simplify(f * diff(g, 0)));
        case Kind::PlanarField: return expand(simplify(diff(g, 0) + f * diff(g, 1)));
        }
        throw LieError("unknown operator kind");
    }

    std::size_t arity() const { return kind == Kind::SingleVar ? 1 : 2; }
};

inline constexpr std::size_t kLieNodeBudget = 100'000;

struct LiePowers {
    std::vector<Expr> terms;  // L^0 g .. L^N g (may stop early)
    bool complete = true;     // false if the node budget cut the list short
};

inline LiePowers lie_powers(const LieOperator& L, const Expr& g, std::size_t order,
                            std::size_t node_budget = kLieNodeBudget) {
    LiePowers out;
    out.terms.push_back(simplify(g));
    std::size_t used = node_count(out.terms.back());
    for (std::size_t n = 1; n <= order; ++n) {
        Expr next = L.apply(out.terms.back());
        used += node_count(next);
        if (used > node_budget) {
            out.complete = false;
            return out;
        }
        out.terms.push_back(std::move(next));
    }
    return out;
}

// The exponential series sum_{n=0..N} c^n (L^n g) / n! as a series value:
// B = 0..N, base slot c, a_n = L^n g.
struct LieApplyResult {
    LiePowers powers;
    Mtmf series;
};

inline LieApplyResult lie_apply(const LieOperator& L, const Expr& g, const Expr& c,
                                std::size_t order,
                                std::size_t node_budget = kLieNodeBudget) {
    LieApplyResult out;
    out.powers = lie_powers(L, g, order, node_budget);
    std::vector<Coefficient> a;
    for (const auto& e : out.powers.terms) a.emplace_back(e);
    out.series.arity = L.arity();
    out.series.B = IndexSet::range(out.powers.terms.size() - 1);
    out.series.a = CoefficientFamily::explicit_list(std::move(a));
    out.series.g = Coefficient(c);
    out.series.trunc.max_terms = order + 1;
    return out;
}

// z' = h(x, z), z(0) = 0: Taylor data a_n = (L^n z)(0, 0) for the planar
// field L = d/dx + h d/dz, summed as y(x) = sum_{n>=1} a_n x^n / n!.
struct NlodeSolution {
    std::vector<double> a;  // a[0..N], a[0] = 0
    bool complete = true;

    double value(double x) const {
        double s = 0.0;
        for (std::size_t n = a.size(); n-- > 1;)
            s = (s + a[n] / factorial(n)) * x;  // Horner over x^n/n!
        return s;
    }

    Mtmf as_mtmf() const {
        Mtmf f;
        f.arity = 1;
        f.B = IndexSet::range(a.size() - 1);
        std::vector<Coefficient> coeffs;
        for (double v : a) coeffs.emplace_back(Expr::constant(v));
        f.a = CoefficientFamily::explicit_list(std::move(coeffs));
        f.g = Coefficient(Expr::variable(0));
        f.trunc.max_terms = a.size();
        return f;
    }
};

inline NlodeSolution nlode_solve(const Expr& h, std::size_t order,
                                 std::size_t node_budget = kLieNodeBudget) {
    if (max_variable_index(h) > 1)
        throw LieError("field h must use only x1 (independent) and x2 (state)");
    LieOperator L = LieOperator::planar(h);
    LiePowers powers = lie_powers(L, Expr::variable(1), order, node_budget);
    NlodeSolution out;
    out.complete = powers.complete;
    const double origin[2] = {0.0, 0.0};
    for (const auto& e : powers.terms) out.a.push_back(eval(e, {origin, 2}));
    return out;
}

// Sup-distance between the truncated Lie solution and a step-doubling RK4
// integration of z' = h(x, z) over [lo, hi].
inline double nlode_check(const Expr& h, const NlodeSolution& sol, double lo, double hi,
                          std::size_t grid = 201) {
    if (!(lo < hi)) throw LieError("empty check interval");
    auto rhs = [&h](double x, double z) {
        const double p[2] = {x, z};
        return eval(h, {p, 2});
    };
    auto rk4_to = [&](double target) {
        const std::size_t steps = 4096;
        double x = 0.0, z = 0.0;
        double dt = target / steps;
        for (std::size_t i = 0; i < steps; ++i) {
            double k1 = rhs(x, z);
            double k2 = rhs(x + dt / 2, z + dt / 2 * k1);
            double k3 = rhs(x + dt / 2, z + dt / 2 * k2);
            double k4 = rhs(x + dt, z + dt * k3);
            z += dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
            x += dt;
        }
        return z;
    };
    double sup = 0.0;
    for (std::size_t i = 0; i < grid; ++i) {
        double x = lo + (hi - lo) * static_cast<double>(i) / (grid - 1);
        double ref = x == 0.0 ? 0.0 : rk4_to(x);
        sup = std::max(sup, std::fabs(sol.value(x) - ref));
    }
    return sup;
}

}  // namespace mtmf
