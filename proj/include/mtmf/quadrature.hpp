#pragma once

// Tensor Gauss-Legendre quadrature over boxes with recursive adaptive
// bisection, plus the per-n integrability probe for series representations.

#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "mtmf/expr.hpp"
#include "mtmf/mtmf.hpp"

namespace mtmf {

struct QuadratureSpec {
    std::vector<Interval> box;
    unsigned order = 12;          // Gauss-Legendre points per axis per cell
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    unsigned max_subdivisions = 40;
};

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    bool converged = true;
    std::size_t evaluations = 0;
};

namespace detail {

struct GaussRule {
    std::vector<double> nodes;    // on (-1, 1)
    std::vector<double> weights;
};

// Nodes via Newton iteration on P_k, standard Golub-free construction.
inline const GaussRule& gauss_legendre(unsigned k) {
    static std::vector<GaussRule> cache(65);
    if (k == 0 || k > 64) throw std::runtime_error("quadrature order out of range (1..64)");
    GaussRule& r = cache[k];
    if (!r.nodes.empty()) return r;
    r.nodes.resize(k);
    r.weights.resize(k);
    for (unsigned i = 0; i < k; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (k + 0.5));
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            if (k == 1) { p1 = x; }
            for (unsigned j = 2; j <= k; ++j) {
                double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            // p1 = P_k(x), p0 = P_{k-1}(x)
            double dp = k * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::fabs(dx) < 1e-15) break;
        }
        double p0 = 1.0, p1 = x;
        for (unsigned j = 2; j <= k; ++j) {
            double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
            p0 = p1;
            p1 = p2;
        }
        double dp = k * (x * p1 - p0) / (x * x - 1.0);
        r.nodes[i] = x;
        r.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return r;
}

using Integrand = std::function<double(std::span<const double>)>;

inline double cell_estimate(const Integrand& f, const std::vector<Interval>& cell,
                            unsigned order, std::size_t& evals) {
    const GaussRule& rule = gauss_legendre(order);
    std::size_t p = cell.size();
    std::vector<std::size_t> idx(p, 0);
    std::vector<double> x(p);
    double scale = 1.0;
    for (const auto& iv : cell) scale *= (iv.hi - iv.lo) / 2.0;
    double sum = 0.0;
    for (;;) {
        double w = 1.0;
        for (std::size_t ax = 0; ax < p; ++ax) {
            const Interval& iv = cell[ax];
            x[ax] = 0.5 * (iv.lo + iv.hi) + 0.5 * (iv.hi - iv.lo) * rule.nodes[idx[ax]];
            w *= rule.weights[idx[ax]];
        }
        sum += w * f(x);
        ++evals;
        std::size_t ax = 0;
        while (ax < p && ++idx[ax] == rule.nodes.size()) {
            idx[ax] = 0;
            ++ax;
        }
        if (ax == p) break;
    }
    return sum * scale;
}

inline void integrate_cell(const Integrand& f, const std::vector<Interval>& cell,
                           const QuadratureSpec& spec, double coarse, unsigned depth,
                           double tol_cell, QuadratureResult& out) {
    // refine: bisect the widest axis
    std::size_t widest = 0;
    for (std::size_t ax = 1; ax < cell.size(); ++ax)
        if (cell[ax].hi - cell[ax].lo > cell[widest].hi - cell[widest].lo) widest = ax;
    std::vector<Interval> left = cell, right = cell;
    double mid = 0.5 * (cell[widest].lo + cell[widest].hi);
    left[widest].hi = mid;
    right[widest].lo = mid;
    double il = cell_estimate(f, left, spec.order, out.evaluations);
    double ir = cell_estimate(f, right, spec.order, out.evaluations);
    double fine = il + ir;
    double err = std::fabs(fine - coarse);
    if (err <= tol_cell || depth >= spec.max_subdivisions) {
        out.value += fine;
        out.error_estimate += err;
        if (err > tol_cell) out.converged = false;
        return;
    }
    // halve the budget per child but keep it attainable in double precision
    double child_tol = std::max(tol_cell / 2.0, 1e-16);
    integrate_cell(f, left, spec, il, depth + 1, child_tol, out);
    integrate_cell(f, right, spec, ir, depth + 1, child_tol, out);
}

}  // namespace detail

inline QuadratureResult integrate(const detail::Integrand& f, const QuadratureSpec& spec) {
    if (spec.box.empty()) throw std::runtime_error("quadrature box is empty");
    for (const auto& iv : spec.box)
        if (!(iv.lo < iv.hi)) throw std::runtime_error("quadrature box has lo >= hi");
    double magnitude = std::numeric_limits<double>::infinity();
    QuadratureResult out;
    // the relative target depends on the value; iterate until the tolerance
    // used matches the magnitude actually found
    double shrink = 1.0;
    for (int pass = 0; pass < 4; ++pass) {
        out = {};
        double coarse = detail::cell_estimate(f, spec.box, spec.order, out.evaluations);
        double tol = shrink * std::max(spec.abs_tol,
                                       spec.rel_tol * std::min(magnitude, std::fabs(coarse)));
        detail::integrate_cell(f, spec.box, spec, coarse, 0, std::max(tol, 1e-16), out);
        double target = std::max(spec.abs_tol, spec.rel_tol * std::fabs(out.value));
        if (out.converged && out.error_estimate <= target) return out;
        magnitude = std::fabs(out.value);
        shrink *= 0.25;
    }
    out.converged = false;
    return out;
}

inline QuadratureResult integrate(const Expr& e, const QuadratureSpec& spec) {
    if (max_variable_index(e) >= static_cast<int>(spec.box.size()))
        throw EvalError("integrand arity exceeds quadrature box dimension");
    return integrate([&e](std::span<const double> x) { return eval(e, x); }, spec);
}

// Per-n probe of the Polish-space integrability condition:
// value of ∫ [g(x)^n − a_n(x) + c]^2 dμ_p over the box.
struct IntegrabilityEntry {
    std::uint64_t n = 0;
    double value = 0.0;
    bool finite = true;  // quadrature converged to a finite value
};

inline std::vector<IntegrabilityEntry> polish_integrability_check(
    const Mtmf& f, const QuadratureSpec& quad, double c) {
    if (!(c > 0.0)) throw std::invalid_argument("integrability check requires c > 0");
    std::vector<IntegrabilityEntry> out;
    for (std::uint64_t n : f.B.is_finite()
                               ? f.B.enumerate_up_to(f.B.tag() == IndexSet::Tag::Range
                                                         ? f.B.range_bound()
                                                         : (f.B.elements().empty()
                                                                ? 0
                                                                : f.B.elements().back()))
                               : f.B.first_members(f.trunc.max_terms)) {
        Coefficient an = f.a.at(n);
        auto integrand = [&](std::span<const double> x) {
            double u = detail::ipow(f.g(x, 0.0), n) - an(x, 0.0) + c;
            return u * u;
        };
        QuadratureResult r = integrate(integrand, quad);
        out.push_back({n, r.value, r.converged && std::isfinite(r.value)});
    }
    return out;
}

}  // namespace mtmf
