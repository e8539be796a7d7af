// End-to-end acceptance gates: one PASS/FAIL line per criterion, exit code
// is the number of failed criteria.

#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "mtmf/calculus.hpp"
#include "mtmf/geometry.hpp"
#include "mtmf/lie.hpp"
#include "mtmf/mtmf.hpp"
#include "mtmf/ode.hpp"
#include "mtmf/special.hpp"
#include "recurrences.hpp"

using namespace mtmf;

namespace {

int failures = 0;

void report(int idx, const std::string& label, bool ok, const std::string& detail) {
    std::printf("%2d. %-28s %s  (%s)\n", idx, label.c_str(), ok ? "PASS" : "FAIL",
                detail.c_str());
    if (!ok) ++failures;
}

std::vector<oracle::Poly> oracle_family(const PolynomialFamily& fam, std::uint64_t n_max) {
    using K = PolynomialFamily::Kind;
    switch (fam.kind) {
    case K::ChebyshevFirst: return oracle::chebyshev_first(n_max);
    case K::ChebyshevSecond: return oracle::chebyshev_second(n_max);
    case K::Hermite: return oracle::hermite(n_max);
    case K::Jacobi: return oracle::jacobi(fam.alpha, fam.beta, n_max);
    case K::Laguerre: return oracle::laguerre(n_max);
    case K::Legendre: return oracle::legendre(n_max);
    }
    return {};
}

std::vector<PolynomialFamily> all_families() {
    return {PolynomialFamily::chebyshev_first(), PolynomialFamily::chebyshev_second(),
            PolynomialFamily::hermite(),         PolynomialFamily::jacobi(0.5, 1.5),
            PolynomialFamily::laguerre(),        PolynomialFamily::legendre()};
}

void criterion_1() {
    double worst = 0.0;
    bool ok = true;
    for (const auto& fam : all_families()) {
        auto want = oracle_family(fam, 8);
        for (std::uint64_t n = 0; n <= 8 && ok; ++n) {
            auto got = poly_coefficients(rodrigues_poly(fam, n));
            if (got.size() != n + 1) {
                ok = false;
                break;
            }
            for (std::size_t k = 0; k <= n; ++k) {
                double w = want[n][k];
                double rel = std::fabs(got[k] - w) / std::max(1.0, std::fabs(w));
                worst = std::max(worst, rel);
            }
        }
    }
    ok = ok && worst <= 1e-12;
    report(1, "Rodrigues vs recurrence", ok,
           "six families, n<=8, worst rel err " + std::to_string(worst));
}

void criterion_2() {
    QuadratureSpec tols;
    tols.rel_tol = 1e-10;
    tols.abs_tol = 1e-11;
    double worst = 0.0;
    bool ok = true;
    try {
        for (const auto& fam : all_families()) {
            auto gram = orthogonality_matrix(fam, 6, tols);
            for (std::size_t m = 0; m <= 6; ++m)
                for (std::size_t n = 0; n <= 6; ++n)
                    if (m != n) worst = std::max(worst, std::fabs(gram[m][n]));
        }
    } catch (const std::exception&) {
        ok = false;
    }
    ok = ok && worst <= 1e-8;
    report(2, "orthogonality", ok, "worst off-diagonal " + std::to_string(worst));
}

void criterion_3() {
    const double pi = 3.14159265358979323846;
    double e2 = std::fabs(zeta(2.0) - pi * pi / 6.0);
    double e4 = std::fabs(zeta(4.0) - pi * pi * pi * pi / 90.0);
    double emv = std::fabs(zeta_mv({0.5, 1.25}) - zeta(1.75));
    bool ok = e2 <= 1e-8 && e4 <= 1e-8 && emv <= 1e-12;
    char buf[128];
    std::snprintf(buf, sizeof(buf), "zeta(2) err %.2e, zeta(4) err %.2e, mv err %.2e", e2, e4,
                  emv);
    report(3, "zeta values", ok, buf);
}

void criterion_4() {
    TruncationPolicy tight;
    tight.abs_tol = 1e-16;
    tight.max_terms = 4000;
    double worst21 = 0.0;
    for (double x : {0.1, 0.5, 0.9}) {
        double want = -std::log(1.0 - x) / x;
        worst21 = std::max(worst21,
                           std::fabs(hypergeometric({1.0, 1.0}, {2.0}, x, tight).value - want));
    }
    double worst00 = 0.0;
    for (double x : {-1.0, 0.3, 2.0})
        worst00 = std::max(worst00,
                           std::fabs(hypergeometric({}, {}, x, tight).value - std::exp(x)));
    bool ok = worst21 <= 1e-9 && worst00 <= 1e-12;
    char buf[128];
    std::snprintf(buf, sizeof(buf), "2F1 err %.2e, 0F0 err %.2e", worst21, worst00);
    report(4, "hypergeometric", ok, buf);
}

void criterion_5() {
    std::mt19937 rng(20240817);
    std::uniform_real_distribution<double> c(-1.0, 1.0);
    std::uniform_real_distribution<double> pt(-1.0, 1.0);
    std::uniform_int_distribution<int> deg(1, 4);
    std::uniform_int_distribution<int> cap(2, 6);
    double worst_rel = 0.0, worst_path = 0.0, worst_fd = 0.0;
    int points = 0;
    for (int trial = 0; trial < 12 && points < 50; ++trial) {
        int d = deg(rng);
        Expr g = Expr::constant(c(rng));
        for (int i = 1; i <= d; ++i)
            g = g + Expr::constant(c(rng)) * Expr::pow_int(Expr::variable(0), i);
        g = simplify(g);
        int N = cap(rng);
        std::vector<Coefficient> a;
        for (int n = 0; n <= N; ++n)
            a.emplace_back(
                simplify(Expr::constant(c(rng)) + Expr::constant(c(rng)) * Expr::variable(0)));
        Mtmf f;
        f.arity = 1;
        f.B = IndexSet::range(static_cast<std::uint64_t>(N));
        f.a = CoefficientFamily::explicit_list(a);
        f.g = Coefficient(g);
        Expr series = Expr::constant(0.0);
        for (int n = 0; n <= N; ++n)
            series =
                series + Expr::constant(1.0 / factorial(n)) * a[n].expr() * Expr::pow_int(g, n);
        series = simplify(series);
        for (unsigned k = 1; k <= 3; ++k) {
            Expr oracle = nth_derivative(series, 0, k);
            auto got = dk_general(f, 0, k);
            for (int rep = 0; rep < 2; ++rep) {
                double x = pt(rng);
                double want = eval(oracle, {x});
                worst_rel = std::max(worst_rel,
                                     std::fabs(got({x}) - want) / (1.0 + std::fabs(want)));
                ++points;
            }
        }
        // shift-path agreement for k = 1, 2 (separated form needs x-free a_n)
        Mtmf fc = f;
        std::vector<Coefficient> ac;
        for (int n = 0; n <= N; ++n) ac.emplace_back(Expr::constant(c(rng)));
        fc.a = CoefficientFamily::explicit_list(std::move(ac));
        SeparatedMtmf s(fc, static_cast<std::uint64_t>(N));
        Mtmf via1 = d1_separated(s, 0);
        Mtmf via2 = d2_separated(s, 0, 0);
        auto viak1 = dk_general(fc, 0, 1);
        auto viak2 = dk_general(fc, 0, 2);
        double x = pt(rng);
        worst_path = std::max(worst_path, std::fabs(evaluate(via1, {x}).value - viak1({x})));
        worst_path = std::max(worst_path, std::fabs(evaluate(via2, {x}).value - viak2({x})));
        // finite differences for k = 1, 2
        for (unsigned k = 1; k <= 2; ++k) {
            auto dk = dk_general(f, 0, k);
            double p = pt(rng);
            worst_fd = std::max(worst_fd, fd_check(f, dk, {&p, 1}, 0, k));
        }
    }
    bool ok = points >= 50 && worst_rel <= 1e-9 && worst_path <= 1e-10 && worst_fd <= 1e-6;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%d pts, sym rel %.2e, path %.2e, fd %.2e", points,
                  worst_rel, worst_path, worst_fd);
    report(5, "differentiation", ok, buf);
}

LodeProblem make_lode(std::size_t m, std::vector<std::string> p, Interval iv,
                      std::vector<std::string> h_n, std::string h_g,
                      std::vector<std::vector<double>> M, std::vector<std::vector<double>> N,
                      std::vector<double> rhs) {
    LodeProblem prob;
    prob.m = m;
    for (const auto& s : p) prob.p.push_back(parse(s, 1));
    prob.interval = iv;
    std::vector<std::uint64_t> members;
    std::vector<Coefficient> coeffs;
    for (std::size_t n = 0; n < h_n.size(); ++n) coeffs.emplace_back(parse(h_n[n], 1));
    for (std::size_t n = 0; n < h_n.size(); ++n)
        if (h_n[n] != "0") members.push_back(n);
    prob.B = IndexSet::finite(members);
    prob.h_n = CoefficientFamily::explicit_list(std::move(coeffs));
    prob.h_g = parse(h_g, 1);
    prob.M = std::move(M);
    prob.N = std::move(N);
    prob.bc_rhs = std::move(rhs);
    prob.x0 = iv.lo;
    return prob;
}

void criterion_6() {
    std::vector<LodeProblem> suite;
    // y'' + y = x, y(0) = y(1) = 0
    suite.push_back(make_lode(2, {"1", "0", "1"}, {0.0, 1.0}, {"0", "x1"}, "1",
                              {{1, 0}, {0, 0}}, {{0, 0}, {1, 0}}, {0, 0}));
    // y' - y = e^x, y(0) = 0
    suite.push_back(make_lode(1, {"-1", "1"}, {0.0, 1.0}, {"0", "1"}, "exp(x1)", {{1}}, {{0}},
                              {0}));
    // y'' - y = e^x, y(0) = 0, y'(0) = 1
    suite.push_back(make_lode(2, {"-1", "0", "1"}, {0.0, 1.0}, {"0", "1"}, "exp(x1)",
                              {{1, 0}, {0, 1}}, {{0, 0}, {0, 0}}, {0, 1}));
    // variable coefficients, m = 2, series right-hand side over B = {0,1,2}
    suite.push_back(make_lode(2, {"1", "x1", "1"}, {0.0, 2.0}, {"1", "x1", "sin(x1)"},
                              "1 + x1^2", {{1, 0}, {0, 1}}, {{0, 0}, {0, 0}}, {1, -1}));
    double worst_eq = 0.0, worst_bc = 0.0, worst_rec = 0.0;
    bool ok = true;
    try {
        for (const auto& prob : suite) {
            LodeSolution sol = general_solution(prob);
            worst_eq = std::max(worst_eq, sol.equation_residual);
            for (double r : sol.boundary_residuals) worst_bc = std::max(worst_bc, r);
            RecoveredRepresentation rep = recover_representation(sol);
            for (int i = 0; i <= 20; ++i) {
                double x = prob.interval.lo +
                           (prob.interval.hi - prob.interval.lo) * i / 20.0;
                double hg = eval(prob.h_g, {x});
                for (std::size_t idx = 0; idx < rep.members.size(); ++idx) {
                    double an = rep.a[idx]({&x, 1}, 0.0);
                    double zn = sol.y_n(idx, x);
                    worst_rec = std::max(
                        worst_rec, std::fabs(an * detail::ipow(hg, rep.members[idx]) - zn));
                }
            }
        }
    } catch (const std::exception&) {
        ok = false;
    }
    ok = ok && worst_eq <= 1e-6 && worst_bc <= 1e-8 && worst_rec <= 1e-5;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "residual %.2e, boundary %.2e, recovery %.2e", worst_eq,
                  worst_bc, worst_rec);
    report(6, "ODE suite", ok, buf);
}

void criterion_7() {
    Expr h = parse("1 + x2^2", 2);
    NlodeSolution sol7 = nlode_solve(h, 7);
    const double want[8] = {0.0, 1.0, 0.0, 2.0, 0.0, 16.0, 0.0, 272.0};
    double worst_a = 0.0;
    for (std::size_t n = 0; n < 8; ++n)
        worst_a = std::max(worst_a, std::fabs(sol7.a[n] - want[n]));
    NlodeSolution sol15 = nlode_solve(h, 15);
    double sup = nlode_check(h, sol15, 0.0, 0.5);
    bool ok = sol7.complete && sol15.complete && worst_a <= 1e-10 && sup <= 1e-6;
    char buf[128];
    std::snprintf(buf, sizeof(buf), "coeff err %.2e, N=15 sup err %.2e", worst_a, sup);
    report(7, "Lie/NLODE", ok, buf);
}

Mtmf random_poly_mtmf(std::mt19937& rng) {
    std::uniform_real_distribution<double> c(-1.0, 1.0);
    Mtmf f;
    f.arity = 1;
    f.B = IndexSet::range(3);
    std::vector<Coefficient> a;
    for (int n = 0; n <= 3; ++n)
        a.emplace_back(
            simplify(Expr::constant(c(rng)) + Expr::constant(c(rng)) * Expr::variable(0)));
    f.a = CoefficientFamily::explicit_list(std::move(a));
    f.g = Coefficient(
        simplify(Expr::constant(c(rng)) + Expr::constant(c(rng)) * Expr::variable(0)));
    return f;
}

void criterion_8() {
    QuadratureSpec q;
    q.box = {{0.0, 1.0}};
    std::mt19937 rng(808808);
    std::uniform_real_distribution<double> c(-1.0, 1.0);
    const double tol = 3e-8;  // 3x the quadrature tolerance scale
    bool symmetric = true;
    double worst_add = 0.0, worst_tri = 0.0, worst_self = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        Mtmf f = random_poly_mtmf(rng), g = random_poly_mtmf(rng), h = random_poly_mtmf(rng);
        if (inner_product(f, g, q) != inner_product(g, f, q)) symmetric = false;
        double alpha = c(rng), beta = c(rng);
        double lhs = inner_product(linear_combine(alpha, f, beta, g), h, q);
        double rhs = alpha * inner_product(f, h, q) + beta * inner_product(g, h, q);
        worst_add = std::max(worst_add, std::fabs(lhs - rhs));
        double dfg = distance(f, g, q), dgh = distance(g, h, q), dfh = distance(f, h, q);
        worst_tri = std::max(worst_tri, dfh - (dfg + dgh));
        worst_self = std::max(worst_self, distance(f, f, q));
    }
    bool ok = symmetric && worst_add <= tol && worst_tri <= tol && worst_self <= tol / 3.0;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "symmetry %s, additivity %.2e, triangle %.2e, self %.2e",
                  symmetric ? "exact" : "BROKEN", worst_add, worst_tri, worst_self);
    report(8, "metric structure", ok, buf);
}

void criterion_9() {
    QuadratureSpec q;
    q.box = {{0.0, 1.0}};
    std::mt19937 rng(999331);
    std::uniform_real_distribution<double> c(-2.0, 2.0);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        Expr h1 = simplify(Expr::constant(c(rng)) + Expr::constant(c(rng)) * Expr::variable(0) +
                           Expr::constant(c(rng)) * Expr::pow_int(Expr::variable(0), 2));
        Expr h2 = simplify(Expr::constant(c(rng)) + Expr::constant(c(rng)) * Expr::variable(0));
        double rho = inner_product(trivial_rep(h1, 1), trivial_rep(h2, 1), q);
        double l2 = integrate(simplify(h1 * h2), q).value;
        worst = std::max(worst, std::fabs(rho - l2));
    }
    bool ok = worst <= 1e-9;
    report(9, "L2 reduction", ok, "worst deviation " + std::to_string(worst));
}

void criterion_10() {
    Mtmf f = trivial_rep(Expr::variable(0), 1);
    std::vector<Interval> box = {{0.0, 1.0}};
    const unsigned idx[3] = {4, 6, 8};
    double sup[3][3];
    double worst_excess = -1.0;
    for (int ji = 0; ji < 3; ++ji)
        for (int ki = 0; ki < 3; ++ki) {
            Mtmf h = approx_simple(f, idx[ji], idx[ki], box);
            double s = 0.0;
            for (int i = 0; i <= 200; ++i) {
                double x = i / 200.0;
                s = std::max(s, std::fabs(evaluate(f, {x}).value - evaluate(h, {x}).value));
            }
            sup[ji][ki] = s;
            double bound = std::exp2(-static_cast<double>(idx[ki])) +
                           std::exp2(-static_cast<double>(idx[ji]));
            worst_excess = std::max(worst_excess, s - bound);
        }
    bool mono = true;
    for (int ji = 0; ji < 3; ++ji)
        for (int ki = 0; ki + 1 < 3; ++ki) {
            if (sup[ji][ki + 1] > sup[ji][ki] + 1e-15) mono = false;
            if (sup[ki + 1][ji] > sup[ki][ji] + 1e-15) mono = false;
        }
    bool ok = worst_excess <= 0.0 && mono;
    char buf[128];
    std::snprintf(buf, sizeof(buf), "max bound excess %.2e, monotone %s", worst_excess,
                  mono ? "yes" : "NO");
    report(10, "dense approximation", ok, buf);
}

}  // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    if (failures == 0)
        std::printf("all acceptance criteria passed\n");
    else
        std::printf("%d criteria FAILED\n", failures);
    return failures;
}
