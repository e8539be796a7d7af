#pragma once

// Representation-level geometry: the series inner product
// rho(f1,f2) = sum_{n in B1∩B2} ∫ a_{n,1} a_{n,2} (g1 g2)^n / n! dμ_p,
// its induced norm and distance, Gram-Schmidt, and span projection.
//
// NOTE: these are functionals of the *representation* (a, g, B), not of
// the pointwise function values; distinct representations of the same
// pointwise function generally have different inner products.

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "mtmf/mtmf.hpp"
#include "mtmf/quadrature.hpp"

namespace mtmf {

class GeometryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline double inner_product(const Mtmf& f1, const Mtmf& f2, const QuadratureSpec& quad) {
    if (f1.arity != f2.arity) throw GeometryError("inner_product: arity mismatch");
    IndexSet C = intersect(f1.B, f2.B);
    std::size_t max_terms = std::max(f1.trunc.max_terms, f2.trunc.max_terms);
    double abs_tol = std::min(f1.trunc.abs_tol, f2.trunc.abs_tol);
    std::size_t small_needed = std::max(f1.trunc.consecutive_small, f2.trunc.consecutive_small);
    std::vector<std::uint64_t> members = C.is_finite()
        ? C.enumerate_up_to(C.tag() == IndexSet::Tag::Range
                                ? C.range_bound()
                                : (C.elements().empty() ? 0 : C.elements().back()))
        : C.first_members(max_terms);
    if (C.is_finite() && members.size() > max_terms) members.resize(max_terms);
    double total = 0.0;
    std::size_t small_run = 0;
    for (std::uint64_t n : members) {
        Coefficient a1 = f1.a.at(n);
        Coefficient a2 = f2.a.at(n);
        auto integrand = [&](std::span<const double> x) {
            // multiply the symmetric factors first so that swapping the
            // arguments commutes at the IEEE level
            double aa = a1(x, 0.0) * a2(x, 0.0);
            double gg = f1.g(x, 0.0) * f2.g(x, 0.0);
            return aa * detail::ipow(gg, n);
        };
        QuadratureResult r = integrate(integrand, quad);
        if (!std::isfinite(r.value))
            throw GeometryError("inner_product: non-finite integral at n=" + std::to_string(n));
        double term = r.value / factorial(n);
        total += term;
        if (!C.is_finite()) {
            if (std::fabs(term) < abs_tol) {
                if (++small_run >= small_needed) break;
            } else {
                small_run = 0;
            }
        }
    }
    return total;
}

inline double norm(const Mtmf& f, const QuadratureSpec& quad) {
    double v = inner_product(f, f, quad);
    if (v < 0.0) {
        if (v < -10.0 * std::max(quad.abs_tol, 1e-12))
            throw GeometryError("norm: negative self inner product " + std::to_string(v));
        v = 0.0;  // quadrature noise
    }
    return std::sqrt(v);
}

inline double distance(const Mtmf& f1, const Mtmf& f2, const QuadratureSpec& quad) {
    return norm(linear_combine(1.0, f1, -1.0, f2), quad);
}

// Classical Gram-Schmidt over the canonical combiner. Throws on rank
// deficiency, naming the offending input index.
inline std::vector<Mtmf> gram_schmidt(const std::vector<Mtmf>& fs, const QuadratureSpec& quad) {
    std::vector<Mtmf> basis;
    for (std::size_t i = 0; i < fs.size(); ++i) {
        Mtmf v = fs[i];
        for (const Mtmf& e : basis) {
            double c = inner_product(v, e, quad);
            v = linear_combine(1.0, v, -c, e);
        }
        double len = norm(v, quad);
        if (len < 1e-10)
            throw GeometryError("gram_schmidt: input " + std::to_string(i) +
                                " is linearly dependent on its predecessors");
        basis.push_back(linear_combine(1.0 / len, v, 0.0, v));
    }
    return basis;
}

struct Projection {
    std::vector<double> coefficients;
    double residual_norm = 0.0;
};

inline Projection project(const Mtmf& f, const std::vector<Mtmf>& basis,
                          const QuadratureSpec& quad) {
    Projection out;
    Mtmf residual = f;
    for (const Mtmf& e : basis) {
        double c = inner_product(f, e, quad);
        out.coefficients.push_back(c);
        residual = linear_combine(1.0, residual, -c, e);
    }
    out.residual_norm = norm(residual, quad);
    return out;
}

}  // namespace mtmf
