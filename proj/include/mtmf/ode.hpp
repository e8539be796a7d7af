#pragma once

// Linear ODE boundary problems L_m[y] = h under C[y] = r, solved by
// variation of parameters over a numerically computed homogeneous basis.
// The right-hand side is a series family h = sum h_n h_g^n / n!; the
// solver works per n and assembles the solution as a series
// representation with recovered base h_g.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mtmf/expr.hpp"
#include "mtmf/indexset.hpp"
#include "mtmf/mtmf.hpp"

namespace mtmf {

class OdeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class LodeFlavor { Static, SpaceTime, PdeT };

struct LodeProblem {
    std::size_t m = 1;
    std::vector<Expr> p;  // p[0] .. p[m], with p[m] nowhere zero on the interval
    Interval interval{0.0, 1.0};
    IndexSet B = IndexSet::finite({1});
    CoefficientFamily h_n;  // weights: in x (static) or in t (time flavors)
    Expr h_g = Expr::constant(1.0);
    std::vector<std::vector<double>> M, N;  // boundary matrices, m x m
    std::vector<double> bc_rhs;             // boundary values r_j, default 0
    double x0 = 0.0;                        // expansion point, defaults to interval.lo
    LodeFlavor flavor = LodeFlavor::Static;
    TruncationPolicy trunc;
};

namespace ode_detail {

inline double eval1(const Expr& e, double x) { return eval(e, {&x, 1}); }

// One accepted integrator node: state u = (y, y', ..., y^{(m-1)}) together
// with its first and second x-derivatives for quintic dense output.
struct DenseNode {
    double x;
    std::vector<double> u, du, ddu;
};

class DenseSolution {
public:
    std::vector<DenseNode> nodes;  // ascending in x

    double component(std::size_t j, double x) const {
        if (nodes.empty()) throw OdeError("dense output is empty");
        if (x <= nodes.front().x + 1e-14 && x >= nodes.front().x - 1e-14)
            return nodes.front().u[j];
        auto it = std::lower_bound(nodes.begin(), nodes.end(), x,
                                   [](const DenseNode& n, double v) { return n.x < v; });
        if (it == nodes.begin()) ++it;
        if (it == nodes.end()) --it;
        const DenseNode& b = *it;
        const DenseNode& a = *(it - 1);
        double h = b.x - a.x;
        double s = (x - a.x) / h;
        // two-point quintic Hermite in the scaled variable
        double f0 = a.u[j], d0 = a.du[j] * h, c0 = a.ddu[j] * h * h;
        double f1 = b.u[j], d1 = b.du[j] * h, c1 = b.ddu[j] * h * h;
        double s2 = s * s, s3 = s2 * s, s4 = s3 * s, s5 = s4 * s;
        double H0 = 1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5;
        double H1 = s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5;
        double H2 = 0.5 * s2 - 1.5 * s3 + 1.5 * s4 - 0.5 * s5;
        double H3 = 0.5 * s3 - s4 + 0.5 * s5;
        double H4 = -4.0 * s3 + 7.0 * s4 - 3.0 * s5;
        double H5 = 10.0 * s3 - 15.0 * s4 + 6.0 * s5;
        return H0 * f0 + H1 * d0 + H2 * c0 + H3 * c1 + H4 * d1 + H5 * f1;
    }
};

using OdeRhs = std::function<void(double, const std::vector<double>&, std::vector<double>&)>;

// Dormand-Prince 5(4) with error control; second state derivatives for the
// dense record come from the caller.
inline DenseSolution rk45(const OdeRhs& rhs,
                          const std::function<std::vector<double>(double, const std::vector<double>&)>& second,
                          std::vector<double> u0, double x_from, double x_to, double h_max) {
    static const double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static const double a21 = 1.0 / 5;
    static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
    static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static const double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
    const double tol = 1e-12;
    const std::size_t dim = u0.size();
    double dir = x_to >= x_from ? 1.0 : -1.0;
    double span = std::fabs(x_to - x_from);
    DenseSolution out;
    std::vector<double> u = u0, du(dim);
    double x = x_from;
    rhs(x, u, du);
    out.nodes.push_back({x, u, du, second(x, u)});
    if (span == 0.0) return out;
    double h = dir * std::min(h_max, span / 16.0);
    std::vector<double> k1(dim), k2(dim), k3(dim), k4(dim), k5(dim), k6(dim), k7(dim),
        tmp(dim), unew(dim);
    std::size_t steps = 0;
    while (dir * (x_to - x) > 1e-14 * span) {
        if (++steps > 2'000'000) throw OdeError("integrator exceeded step budget");
        if (dir * (x + h - x_to) > 0.0) h = x_to - x;
        rhs(x, u, k1);
        for (std::size_t i = 0; i < dim; ++i) tmp[i] = u[i] + h * a21 * k1[i];
        rhs(x + c2 * h, tmp, k2);
        for (std::size_t i = 0; i < dim; ++i) tmp[i] = u[i] + h * (a31 * k1[i] + a32 * k2[i]);
        rhs(x + c3 * h, tmp, k3);
        for (std::size_t i = 0; i < dim; ++i)
            tmp[i] = u[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        rhs(x + c4 * h, tmp, k4);
        for (std::size_t i = 0; i < dim; ++i)
            tmp[i] = u[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        rhs(x + c5 * h, tmp, k5);
        for (std::size_t i = 0; i < dim; ++i)
            tmp[i] = u[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] +
                                 a65 * k5[i]);
        rhs(x + h, tmp, k6);
        for (std::size_t i = 0; i < dim; ++i)
            unew[i] = u[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        rhs(x + h, unew, k7);
        double err = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
            double ei = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                             e7 * k7[i]);
            double scale = tol * (1.0 + std::fabs(unew[i]));
            err = std::max(err, std::fabs(ei) / scale);
        }
        if (err <= 1.0) {
            x += h;
            u = unew;
            out.nodes.push_back({x, u, k7, second(x, u)});
        }
        double factor = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
        factor = std::min(5.0, std::max(0.2, factor));
        h *= factor;
        if (std::fabs(h) > h_max) h = dir * h_max;
        if (std::fabs(h) < 1e-14 * span) throw OdeError("integrator step size underflow");
    }
    if (dir < 0) std::reverse(out.nodes.begin(), out.nodes.end());
    return out;
}

// Cumulative integral of a scalar function from x0, evaluated lazily via
// adaptive Simpson over cached panels.
class CumulativeIntegral {
public:
    CumulativeIntegral(std::function<double(double)> f, double x0, double lo, double hi)
        : f_(std::move(f)), x0_(x0), lo_(lo), hi_(hi) {}

    double operator()(double x) const {
        if (x == x0_) return 0.0;
        return adaptive(x0_, x);
    }

private:
    std::function<double(double)> f_;
    double x0_, lo_, hi_;

    double simpson(double a, double b, double fa, double fm, double fb) const {
        return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    }

    double rec(double a, double b, double fa, double fm, double fb, double whole,
               double tol, int depth) const {
        double m = 0.5 * (a + b);
        double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
        double flm = f_(lm), frm = f_(rm);
        double left = simpson(a, m, fa, flm, fm);
        double right = simpson(m, b, fm, frm, fb);
        double delta = left + right - whole;
        if (depth <= 0 || std::fabs(delta) <= 15.0 * tol)
            return left + right + delta / 15.0;
        return rec(a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
               rec(m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
    }

    double adaptive(double a, double b) const {
        if (a == b) return 0.0;
        double m = 0.5 * (a + b);
        double fa = f_(a), fm = f_(m), fb = f_(b);
        double whole = simpson(a, b, fa, fm, fb);
        return rec(a, b, fa, fm, fb, whole, 1e-11, 40);
    }
};

}  // namespace ode_detail

inline void validate_problem(const LodeProblem& prob) {
    if (prob.p.size() != prob.m + 1)
        throw OdeError("problem must supply coefficients p_0..p_m");
    if (!(prob.interval.lo < prob.interval.hi)) throw OdeError("empty interval");
    if (prob.x0 < prob.interval.lo || prob.x0 > prob.interval.hi)
        throw OdeError("expansion point outside the interval");
    if (prob.M.size() != prob.m || prob.N.size() != prob.m)
        throw OdeError("boundary matrices must be m x m");
    for (std::size_t r = 0; r < prob.m; ++r)
        if (prob.M[r].size() != prob.m || prob.N[r].size() != prob.m)
            throw OdeError("boundary matrices must be m x m");
    if (!prob.bc_rhs.empty() && prob.bc_rhs.size() != prob.m)
        throw OdeError("boundary right-hand side must have m entries");
    for (int i = 0; i <= 1000; ++i) {
        double x = prob.interval.lo + (prob.interval.hi - prob.interval.lo) * i / 1000.0;
        if (std::fabs(ode_detail::eval1(prob.p[prob.m], x)) < 1e-12)
            throw OdeError("leading coefficient vanishes near x=" + std::to_string(x));
    }
}

// The m homogeneous solutions z_k with canonical unit initial data at x0:
// z_k^{(l)}(x0) = delta_{kl}, so the Wronskian at x0 is exactly 1.
class HomogeneousBasis {
public:
    HomogeneousBasis(const LodeProblem& prob) : m_(prob.m) {
        validate_problem(prob);
        for (std::size_t i = 0; i <= prob.m; ++i) {
            p_.push_back(prob.p[i]);
            dp_.push_back(diff(prob.p[i], 0));
        }
        double a = prob.interval.lo, b = prob.interval.hi, x0 = prob.x0;
        double h_max = (b - a) / 100.0;
        auto rhs = [this](double x, const std::vector<double>& u, std::vector<double>& du) {
            for (std::size_t i = 0; i + 1 < m_; ++i) du[i] = u[i + 1];
            double s = 0.0;
            for (std::size_t i = 0; i < m_; ++i) s += ode_detail::eval1(p_[i], x) * u[i];
            du[m_ - 1] = -s / ode_detail::eval1(p_[m_], x);
        };
        auto second = [this, &rhs](double x, const std::vector<double>& u) {
            // u'' from the equation and its x-derivative
            std::vector<double> du(m_), ddu(m_);
            rhs(x, u, du);
            for (std::size_t i = 0; i + 1 < m_; ++i) ddu[i] = du[i + 1];
            double pm = ode_detail::eval1(p_[m_], x);
            double dpm = ode_detail::eval1(dp_[m_], x);
            double s = 0.0, ds = 0.0;
            for (std::size_t i = 0; i < m_; ++i) {
                s += ode_detail::eval1(p_[i], x) * u[i];
                ds += ode_detail::eval1(dp_[i], x) * u[i] + ode_detail::eval1(p_[i], x) * du[i];
            }
            ddu[m_ - 1] = -(ds * pm - s * dpm) / (pm * pm);
            return ddu;
        };
        for (std::size_t k = 0; k < m_; ++k) {
            std::vector<double> u0(m_, 0.0);
            u0[k] = 1.0;
            ode_detail::DenseSolution fwd =
                ode_detail::rk45(rhs, second, u0, x0, b, h_max);
            ode_detail::DenseSolution bwd =
                ode_detail::rk45(rhs, second, u0, x0, a, h_max);
            ode_detail::DenseSolution full;
            full.nodes = bwd.nodes;
            if (!full.nodes.empty()) full.nodes.pop_back();  // drop duplicate x0 node
            full.nodes.insert(full.nodes.end(), fwd.nodes.begin(), fwd.nodes.end());
            z_.push_back(std::move(full));
        }
    }

    std::size_t order() const { return m_; }

    // j-th derivative of z_k, j <= m-1 from dense output, j = m from the
    // homogeneous equation itself
    double deriv(std::size_t k, std::size_t j, double x) const {
        if (j < m_) return z_[k].component(j, x);
        if (j == m_) {
            double s = 0.0;
            for (std::size_t i = 0; i < m_; ++i)
                s += ode_detail::eval1(p_[i], x) * z_[k].component(i, x);
            return -s / ode_detail::eval1(p_[m_], x);
        }
        throw OdeError("basis derivatives available up to order m");
    }

    double value(std::size_t k, double x) const { return deriv(k, 0, x); }

    double p_at(std::size_t i, double x) const { return ode_detail::eval1(p_[i], x); }

private:
    std::size_t m_;
    std::vector<Expr> p_, dp_;
    std::vector<ode_detail::DenseSolution> z_;
};

inline double wronskian(const HomogeneousBasis& z, double t) {
    std::size_t m = z.order();
    Eigen::MatrixXd W(m, m);
    for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = 0; c < m; ++c) W(r, c) = z.deriv(c, r, t);
    return W.determinant();
}

// W_k: column k (1-based) replaced by the unit vector (0,...,0,1)
inline double wronskian_k(const HomogeneousBasis& z, std::size_t k, double t) {
    std::size_t m = z.order();
    if (k < 1 || k > m) throw OdeError("wronskian column index out of range");
    Eigen::MatrixXd W(m, m);
    for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = 0; c < m; ++c)
            W(r, c) = (c == k - 1) ? (r == m - 1 ? 1.0 : 0.0) : z.deriv(c, r, t);
    return W.determinant();
}

// z0n(x) = sum_k z_k(x) * Integral_{x0}^{x} (W_k/W)(t) h_n(t) h_g(t)^n dt / p_m(t)
class ParticularSolution {
public:
    ParticularSolution(std::shared_ptr<const HomogeneousBasis> z,
                       std::function<double(double)> forcing, double x0, Interval iv)
        : z_(std::move(z)), forcing_(std::move(forcing)) {
        std::size_t m = z_->order();
        for (std::size_t k = 1; k <= m; ++k) {
            auto zz = z_;
            auto fr = forcing_;
            auto integrand = [zz, fr, k, m](double t) {
                double W = wronskian(*zz, t);
                if (std::fabs(W) < 1e-12)
                    throw OdeError("Wronskian vanished at t=" + std::to_string(t));
                double Wk = wronskian_k(*zz, k, t);
                return Wk / W * fr(t) / zz->p_at(m, t);
            };
            integrals_.emplace_back(integrand, x0, iv.lo, iv.hi);
        }
    }

    double deriv(std::size_t j, double x) const {
        std::size_t m = z_->order();
        double s = 0.0;
        for (std::size_t k = 0; k < m; ++k)
            s += z_->deriv(k, j, x) * integrals_[k](x);
        if (j == m) s += forcing_(x) / z_->p_at(m, x);
        return s;
    }

    double value(double x) const { return deriv(0, x); }

private:
    std::shared_ptr<const HomogeneousBasis> z_;
    std::function<double(double)> forcing_;
    std::vector<ode_detail::CumulativeIntegral> integrals_;
};

struct LodeSolution {
    std::shared_ptr<const HomogeneousBasis> basis;
    std::vector<std::uint64_t> members;                       // enumerated B
    std::vector<std::shared_ptr<ParticularSolution>> z0;      // per member
    std::vector<double> c;                                    // boundary constants
    double S_B = 0.0;                                         // sum 1/n! over B
    double condition = 0.0;                                   // boundary system estimate
    double equation_residual = 0.0;                           // sup over report grid
    std::vector<double> boundary_residuals;
    LodeProblem problem;

    // y_n(x) = z0_n(x) + sum_i c_i z_i(x) and its derivatives
    double y_n_deriv(std::size_t member_idx, std::size_t j, double x) const {
        double v = z0[member_idx]->deriv(j, x);
        for (std::size_t i = 0; i < c.size(); ++i) v += c[i] * basis->deriv(i, j, x);
        return v;
    }
    double y_n(std::size_t member_idx, double x) const { return y_n_deriv(member_idx, 0, x); }

    double value(double x) const {
        double s = 0.0;
        for (std::size_t i = 0; i < members.size(); ++i)
            s += y_n(i, x) / factorial(members[i]);
        return s;
    }

    double deriv(std::size_t j, double x) const {
        double s = 0.0;
        for (std::size_t i = 0; i < members.size(); ++i)
            s += y_n_deriv(i, j, x) / factorial(members[i]);
        return s;
    }

    // the solution as a series value: g = 1, a_n = y_n
    Mtmf as_mtmf() const {
        Mtmf f;
        f.arity = 1;
        f.B = IndexSet::finite(members);
        f.g = Coefficient(Expr::constant(1.0));
        f.trunc = problem.trunc;
        auto self = *this;
        f.a = CoefficientFamily::closure([self](std::uint64_t n) -> Coefficient {
            auto it = std::find(self.members.begin(), self.members.end(), n);
            if (it == self.members.end()) return Coefficient(Expr::constant(0.0));
            std::size_t idx = static_cast<std::size_t>(it - self.members.begin());
            return Coefficient(
                [self, idx](std::span<const double> x, double) { return self.y_n(idx, x[0]); },
                "<y_" + std::to_string(n) + ">");
        });
        return f;
    }
};

namespace ode_detail {

inline std::vector<std::uint64_t> enumerate_members(const IndexSet& B, std::size_t cap) {
    std::vector<std::uint64_t> members =
        B.is_finite() ? B.enumerate_up_to(B.tag() == IndexSet::Tag::Range
                                              ? B.range_bound()
                                              : (B.elements().empty() ? 0
                                                                      : B.elements().back()))
                      : B.first_members(cap);
    if (members.size() > cap) members.resize(cap);
    return members;
}

}  // namespace ode_detail

inline LodeSolution general_solution(const LodeProblem& prob) {
    validate_problem(prob);
    LodeSolution sol;
    sol.problem = prob;
    sol.basis = std::make_shared<HomogeneousBasis>(prob);
    sol.members = ode_detail::enumerate_members(prob.B, prob.trunc.max_terms);
    if (sol.members.empty()) throw OdeError("index set B is empty");
    const std::size_t m = prob.m;
    const double a = prob.interval.lo, b = prob.interval.hi;
    for (std::uint64_t n : sol.members) {
        Coefficient hn = prob.h_n.at(n);
        Expr hg = prob.h_g;
        auto forcing = [hn, hg, n](double t) {
            double base = ode_detail::eval1(hg, t);
            return hn({&t, 1}, 0.0) * detail::ipow(base, n);
        };
        sol.z0.push_back(std::make_shared<ParticularSolution>(sol.basis, forcing, prob.x0,
                                                              prob.interval));
        sol.S_B += 1.0 / factorial(n);
    }
    // boundary system: sum_i c_i S_B C_j[z_i] = r_j - C_j[sum_n z0_n / n!]
    Eigen::MatrixXd A(m, m);
    Eigen::VectorXd rhs(m);
    for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t i = 0; i < m; ++i) {
            double cji = 0.0;
            for (std::size_t l = 0; l < m; ++l)
                cji += prob.M[j][l] * sol.basis->deriv(i, l, a) +
                       prob.N[j][l] * sol.basis->deriv(i, l, b);
            A(j, i) = sol.S_B * cji;
        }
        double cz0 = 0.0;
        for (std::size_t idx = 0; idx < sol.members.size(); ++idx)
            for (std::size_t l = 0; l < m; ++l)
                cz0 += (prob.M[j][l] * sol.z0[idx]->deriv(l, a) +
                        prob.N[j][l] * sol.z0[idx]->deriv(l, b)) /
                       factorial(sol.members[idx]);
        rhs(j) = (prob.bc_rhs.empty() ? 0.0 : prob.bc_rhs[j]) - cz0;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    double smin = svd.singularValues()(m - 1), smax = svd.singularValues()(0);
    sol.condition = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
    if (smin < 1e-10 * std::max(1.0, smax))
        throw OdeError("boundary system is singular (condition estimate " +
                       std::to_string(sol.condition) + ")");
    Eigen::VectorXd cvec = svd.solve(rhs);
    sol.c.assign(cvec.data(), cvec.data() + m);
    // acceptance gates: equation residual on a 201-point grid, boundary residuals
    double sup = 0.0;
    for (int i = 0; i <= 200; ++i) {
        double x = a + (b - a) * i / 200.0;
        double Ly = 0.0;
        for (std::size_t l = 0; l <= m; ++l) Ly += sol.basis->p_at(l, x) * sol.deriv(l, x);
        double h = 0.0;
        for (std::size_t idx = 0; idx < sol.members.size(); ++idx) {
            std::uint64_t n = sol.members[idx];
            h += prob.h_n.at(n)({&x, 1}, 0.0) *
                 detail::ipow(ode_detail::eval1(prob.h_g, x), n) / factorial(n);
        }
        sup = std::max(sup, std::fabs(Ly - h));
    }
    sol.equation_residual = sup;
    for (std::size_t j = 0; j < m; ++j) {
        double cj = 0.0;
        for (std::size_t l = 0; l < m; ++l)
            cj += prob.M[j][l] * sol.deriv(l, a) + prob.N[j][l] * sol.deriv(l, b);
        sol.boundary_residuals.push_back(
            std::fabs(cj - (prob.bc_rhs.empty() ? 0.0 : prob.bc_rhs[j])));
    }
    return sol;
}

// Green's kernel w_{n,m}(x,t): integrating w * h_n h_g^n over [x0, x]
// reproduces y_n(x).
inline double greens_kernel(const LodeSolution& sol, std::uint64_t n, double x, double t) {
    const LodeProblem& prob = sol.problem;
    double hn = prob.h_n.at(n)({&t, 1}, 0.0);
    double hg = detail::ipow(ode_detail::eval1(prob.h_g, t), n);
    if (hn * hg == 0.0)
        throw OdeError("Green's kernel undefined where h_n h_g^n = 0 (t=" +
                       std::to_string(t) + ")");
    if (x == prob.x0) throw OdeError("Green's kernel requires x != x0");
    double W = wronskian(*sol.basis, t);
    double pm = sol.basis->p_at(prob.m, t);
    double s = 0.0;
    for (std::size_t k = 0; k < prob.m; ++k) {
        double wk = wronskian_k(*sol.basis, k + 1, t);
        s += sol.basis->value(k, x) *
             (wk / (pm * W) + sol.c[k] / ((x - prob.x0) * hn * hg));
    }
    return s;
}

// Recovered series representation: g = h_g, a_n(x) = y_n(x)/h_g(x)^n plus
// an optional |h_g(x0)/h_g(x)|^n homogeneous-in-the-recovery term pinned
// by a caller-supplied u_n = a_n(x0).
struct RecoveredRepresentation {
    Expr g;
    std::vector<std::uint64_t> members;
    std::vector<NumericFn> a;  // per member
    std::vector<double> u;     // a_n(x0) actually used
};

inline RecoveredRepresentation recover_representation(
    const LodeSolution& sol, const std::optional<std::vector<double>>& u_override = {}) {
    const LodeProblem& prob = sol.problem;
    // refuse on base zero-crossings away from the expansion point
    const double a = prob.interval.lo, b = prob.interval.hi;
    for (int i = 0; i <= 1000; ++i) {
        double x = a + (b - a) * i / 1000.0;
        if (std::fabs(x - prob.x0) < (b - a) / 500.0) continue;
        if (std::fabs(ode_detail::eval1(prob.h_g, x)) < 1e-12)
            throw OdeError("base h_g vanishes near x=" + std::to_string(x) +
                           "; representation recovery refused");
    }
    RecoveredRepresentation rep;
    rep.g = prob.h_g;
    rep.members = sol.members;
    double hg0 = ode_detail::eval1(prob.h_g, prob.x0);
    for (std::size_t idx = 0; idx < sol.members.size(); ++idx) {
        std::uint64_t n = sol.members[idx];
        double consistent_u = 0.0;
        if (n == 0)
            consistent_u = sol.y_n(idx, prob.x0);
        else if (hg0 != 0.0)
            consistent_u = sol.y_n(idx, prob.x0) / detail::ipow(hg0, n);
        double un = consistent_u;
        if (u_override) {
            if (u_override->size() != sol.members.size())
                throw OdeError("u override must match the enumerated index set");
            un = (*u_override)[idx];
        }
        rep.u.push_back(un);
        auto self = sol;
        Expr hg = prob.h_g;
        double x0 = prob.x0;
        rep.a.push_back([self, idx, n, hg, hg0, un, x0](std::span<const double> xv,
                                                        double) -> double {
            double x = xv[0];
            double base = ode_detail::eval1(hg, x);
            double v = self.y_n(idx, x) / detail::ipow(base, n);
            if (n > 0 && hg0 != 0.0) {
                double phi = detail::ipow(std::fabs(hg0 / base), n);
                v += (un - self.y_n(idx, x0) / detail::ipow(hg0, n)) * phi;
            } else if (n == 0) {
                v = self.y_n(idx, x) + (un - self.y_n(idx, x0));
            }
            return v;
        });
    }
    return rep;
}

// Time-parameterized flavors: the per-n x-problems L_m[y_n] = h_g^n are
// solved once and shared across t; h_n(t) (or dh_n/dt) weights them.
class SpacetimeSolver {
public:
    SpacetimeSolver(LodeProblem prob) : prob_(std::move(prob)) {
        if (prob_.flavor == LodeFlavor::Static)
            throw OdeError("spacetime solver requires a time-variant flavor");
        LodeProblem per_n = prob_;
        per_n.flavor = LodeFlavor::Static;
        per_n.h_n = CoefficientFamily::generator(Expr::constant(1.0));
        base_ = std::make_shared<LodeSolution>(general_solution(per_n));
    }

    const LodeSolution& cached_solution() const { return *base_; }

    // weight applied to y_n at time t
    double weight(std::uint64_t n, double t) const {
        Coefficient hn = prob_.h_n.at(n);
        if (prob_.flavor == LodeFlavor::PdeT) {
            if (!hn.symbolic()) throw OdeError("pde_t flavor requires symbolic h_n(t)");
            return eval(diff(hn.expr(), kTimeAxis), {}, t);
        }
        return hn({}, t);
    }

    Mtmf at_time(double t) const {
        Mtmf f;
        f.arity = 1;
        f.B = IndexSet::finite(base_->members);
        f.g = Coefficient(Expr::constant(1.0));
        f.trunc = prob_.trunc;
        auto base = base_;
        auto self = *this;
        f.a = CoefficientFamily::closure([base, self, t](std::uint64_t n) -> Coefficient {
            auto it = std::find(base->members.begin(), base->members.end(), n);
            if (it == base->members.end()) return Coefficient(Expr::constant(0.0));
            std::size_t idx = static_cast<std::size_t>(it - base->members.begin());
            double w = self.weight(n, t);
            return Coefficient(
                [base, idx, w](std::span<const double> x, double) {
                    return w * base->y_n(idx, x[0]);
                },
                "<w*y_" + std::to_string(n) + ">");
        });
        return f;
    }

private:
    LodeProblem prob_;
    std::shared_ptr<LodeSolution> base_;
};

}  // namespace mtmf
