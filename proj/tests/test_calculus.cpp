#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "mtmf/calculus.hpp"

using namespace mtmf;

static CoefficientFamily const_coeffs(std::initializer_list<double> cs) {
    std::vector<Coefficient> v;
    for (double c : cs) v.emplace_back(Expr::constant(c));
    return CoefficientFamily::explicit_list(std::move(v));
}

static SeparatedMtmf separated(Expr g, std::initializer_list<double> coeffs) {
    Mtmf f;
    f.arity = 1;
    f.B = IndexSet::range(coeffs.size() - 1);
    f.a = const_coeffs(coeffs);
    f.g = Coefficient(std::move(g));
    return SeparatedMtmf(std::move(f), coeffs.size() - 1);
}

TEST_CASE("shift operator") {
    auto a = const_coeffs({1.0, 2.0, 3.0, 4.0});
    auto tau = shift(a, 1);
    CHECK(tau.at(0)({}, 0.0) == 2.0);
    CHECK(tau.at(2)({}, 0.0) == 4.0);
    auto tau2 = shift(a, 2);
    CHECK(tau2.at(0)({}, 0.0) == 3.0);
    CHECK(tau2.at(1)({}, 0.0) == 4.0);
    auto tau0 = shift(a, 0);
    for (std::uint64_t n = 0; n < 4; ++n)
        CHECK(tau0.at(n)({}, 0.0) == a.at(n)({}, 0.0));
}

TEST_CASE("separated form validation") {
    Mtmf bad;
    bad.arity = 1;
    bad.B = IndexSet::range(2);
    bad.a = CoefficientFamily::explicit_list(
        {Coefficient(Expr::variable(0)), Coefficient(Expr::constant(1.0)),
         Coefficient(Expr::constant(1.0))});
    bad.g = Coefficient(Expr::variable(0));
    CHECK_THROWS_AS(SeparatedMtmf(bad, 2), CalculusError);
    Mtmf wrongB;
    wrongB.arity = 1;
    wrongB.B = IndexSet::positive();
    wrongB.a = const_coeffs({1.0, 1.0});
    wrongB.g = Coefficient(Expr::variable(0));
    CHECK_THROWS_AS(SeparatedMtmf(wrongB, 1), CalculusError);
}

TEST_CASE("first derivative via shift") {
    // g=x, a=1, B_2: f = 1 + x + x^2/2, f' = 1 + x
    auto s = separated(Expr::variable(0), {1.0, 1.0, 1.0});
    Mtmf d = d1_separated(s, 0);
    for (double x : {-1.0, 0.0, 0.5, 2.0})
        CHECK(evaluate(d, {x}).value == Catch::Approx(1.0 + x).margin(1e-12));
    // g=x^2, a=1, B_1: f = 1 + x^2, f' = 2x
    auto s2 = separated(parse("x1^2", 1), {1.0, 1.0});
    Mtmf d2m = d1_separated(s2, 0);
    for (double x : {-1.0, 0.3})
        CHECK(evaluate(d2m, {x}).value == Catch::Approx(2.0 * x).margin(1e-12));
    // N=0: derivative vanishes
    auto s0 = separated(Expr::variable(0), {5.0});
    CHECK(evaluate(d1_separated(s0, 0), {0.7}).value == 0.0);
    // shift identity: evaluate equals g_x * sum a_{k+1} g^k / k!
    auto s3 = separated(parse("x1^3 - x1", 1), {2.0, -1.0, 0.5, 3.0});
    Mtmf ds3 = d1_separated(s3, 0);
    for (double x : {-0.8, 0.2, 1.1}) {
        double g = x * x * x - x, gx = 3.0 * x * x - 1.0;
        double sum = -1.0 + 0.5 * g + 3.0 * g * g / 2.0;
        CHECK(evaluate(ds3, {x}).value == Catch::Approx(gx * sum).margin(1e-12));
    }
}

TEST_CASE("second derivative via shift") {
    // g=x, a=1, B_3: f = 1 + x + x^2/2 + x^3/6, f'' = 1 + x
    auto s = separated(Expr::variable(0), {1.0, 1.0, 1.0, 1.0});
    Mtmf d = d2_separated(s, 0, 0);
    for (double x : {-0.5, 0.0, 1.0})
        CHECK(evaluate(d, {x}).value == Catch::Approx(1.0 + x).margin(1e-12));
    // linear g: the g_xx term vanishes, d2 = g_x^2 T(tau^2 a)
    auto lin = separated(parse("3*x1", 1), {1.0, 2.0, 5.0});
    Mtmf dl = d2_separated(lin, 0, 0);
    for (double x : {-1.0, 0.4})
        CHECK(evaluate(dl, {x}).value == Catch::Approx(9.0 * 5.0).margin(1e-12));
    // mixed-partial symmetry in two variables
    Mtmf f2;
    f2.arity = 2;
    f2.B = IndexSet::range(3);
    f2.a = const_coeffs({1.0, 0.5, -2.0, 1.5});
    f2.g = Coefficient(parse("x1^2 + x1*x2", 2));
    SeparatedMtmf s2(f2, 3);
    Mtmf dij = d2_separated(s2, 0, 1);
    Mtmf dji = d2_separated(s2, 1, 0);
    for (double x : {-0.3, 0.8})
        for (double y : {-1.0, 0.6})
            CHECK(evaluate(dij, {x, y}).value ==
                  Catch::Approx(evaluate(dji, {x, y}).value).margin(1e-12));
}

TEST_CASE("dk_general matches direct symbolic differentiation") {
    // B={2}, a_2=1, g=x^2: f = x^4/2, f'' = 6x^2
    Mtmf f;
    f.arity = 1;
    f.B = IndexSet::finite({2});
    f.a = const_coeffs({0.0, 0.0, 1.0});
    f.g = Coefficient(parse("x1^2", 1));
    auto d2 = dk_general(f, 0, 2);
    for (double x : {-1.0, 0.5, 2.0})
        CHECK(d2({x}) == Catch::Approx(6.0 * x * x).margin(1e-12));
    // k=0 is the function itself
    auto d0 = dk_general(f, 0, 0);
    CHECK(d0({1.5}) == Catch::Approx(std::pow(1.5, 4) / 2.0).margin(1e-12));

    std::mt19937 rng(1234);
    std::uniform_real_distribution<double> c(-1.0, 1.0);
    std::uniform_real_distribution<double> pt(-1.0, 1.0);
    std::uniform_int_distribution<int> deg(1, 4);
    std::uniform_int_distribution<int> cap(2, 6);
    int points_checked = 0;
    for (int trial = 0; trial < 12 && points_checked < 50; ++trial) {
        // random polynomial g of degree <= 4, random a_n, N <= 6
        int d = deg(rng);
        Expr g = Expr::constant(c(rng));
        for (int i = 1; i <= d; ++i)
            g = g + Expr::constant(c(rng)) * Expr::pow_int(Expr::variable(0), i);
        g = simplify(g);
        int N = cap(rng);
        std::vector<Coefficient> a;
        for (int n = 0; n <= N; ++n)
            a.emplace_back(simplify(Expr::constant(c(rng)) +
                                    Expr::constant(c(rng)) * Expr::variable(0)));
        Mtmf rf;
        rf.arity = 1;
        rf.B = IndexSet::range(static_cast<std::uint64_t>(N));
        rf.a = CoefficientFamily::explicit_list(a);
        rf.g = Coefficient(g);
        // direct oracle: expand the truncated series and differentiate it
        Expr series = Expr::constant(0.0);
        for (int n = 0; n <= N; ++n)
            series = series + Expr::constant(1.0 / factorial(n)) * a[n].expr() *
                              Expr::pow_int(g, n);
        for (unsigned k = 1; k <= 3; ++k) {
            Expr oracle = nth_derivative(simplify(series), 0, k);
            auto got = dk_general(rf, 0, k);
            for (int rep = 0; rep < 2; ++rep) {
                double x = pt(rng);
                double want = eval(oracle, {x});
                double have = got({x});
                CHECK(std::fabs(have - want) <= 1e-9 * (1.0 + std::fabs(want)));
                ++points_checked;
            }
        }
    }
    CHECK(points_checked >= 50);
}

TEST_CASE("path agreement between the shift and general formulas") {
    std::mt19937 rng(777);
    std::uniform_real_distribution<double> c(-1.0, 1.0);
    std::uniform_real_distribution<double> pt(-1.0, 1.0);
    for (int trial = 0; trial < 8; ++trial) {
        Expr g = simplify(Expr::constant(c(rng)) + Expr::constant(c(rng)) * Expr::variable(0) +
                          Expr::constant(c(rng)) * Expr::pow_int(Expr::variable(0), 3));
        std::vector<double> coeffs;
        for (int n = 0; n <= 5; ++n) coeffs.push_back(c(rng));
        Mtmf f;
        f.arity = 1;
        f.B = IndexSet::range(5);
        std::vector<Coefficient> a;
        for (double v : coeffs) a.emplace_back(Expr::constant(v));
        f.a = CoefficientFamily::explicit_list(std::move(a));
        f.g = Coefficient(g);
        SeparatedMtmf s(f, 5);
        Mtmf via1 = d1_separated(s, 0);
        auto viak1 = dk_general(f, 0, 1);
        Mtmf via2 = d2_separated(s, 0, 0);
        auto viak2 = dk_general(f, 0, 2);
        for (int rep = 0; rep < 4; ++rep) {
            double x = pt(rng);
            CHECK(evaluate(via1, {x}).value == Catch::Approx(viak1({x})).margin(1e-10));
            CHECK(evaluate(via2, {x}).value == Catch::Approx(viak2({x})).margin(1e-10));
        }
    }
}

TEST_CASE("kth order ODE residual identity") {
    // k=1, g=x, a=1, N=3
    auto s = separated(Expr::variable(0), {1.0, 1.0, 1.0, 1.0});
    std::vector<double> grid;
    for (int i = 0; i <= 20; ++i) grid.push_back(i / 20.0);
    for (double r : residual_kth_ode(s, 0, 1, grid)) CHECK(std::fabs(r) <= 1e-10);
    // random polynomial g, N=4, k=2
    std::mt19937 rng(555);
    std::uniform_real_distribution<double> c(-1.0, 1.0);
    Expr g = simplify(Expr::constant(c(rng)) + Expr::constant(c(rng)) * Expr::variable(0) +
                      Expr::constant(c(rng)) * Expr::pow_int(Expr::variable(0), 2));
    auto s2 = separated(g, {c(rng), c(rng), c(rng), c(rng), c(rng)});
    for (double r : residual_kth_ode(s2, 0, 2, grid)) CHECK(std::fabs(r) <= 1e-8);
    CHECK_THROWS_AS(residual_kth_ode(separated(Expr::variable(0), {1.0, 1.0}), 0, 1, grid),
                    CalculusError);
}

TEST_CASE("finite difference cross-check") {
    // exponential series: derivative equals the function
    Mtmf e;
    e.arity = 1;
    e.B = IndexSet::range(40);
    e.a = CoefficientFamily::generator(Expr::constant(1.0));
    e.g = Coefficient(Expr::variable(0));
    auto d1 = dk_general(e, 0, 1);
    double x = 0.3;
    CHECK(fd_check(e, d1, {&x, 1}, 0, 1) <= 1e-6);
    // constant function: derivative 0, error 0
    Mtmf cst = trivial_rep(Expr::constant(3.0), 1);
    auto dc = dk_general(cst, 0, 1);
    CHECK(fd_check(cst, dc, {&x, 1}, 0, 1) == 0.0);
    // sin via trivial rep, k=2, at x=1: matches -sin(1)
    Mtmf s = trivial_rep(parse("sin(x1)", 1), 1);
    auto ds = dk_general(s, 0, 2);
    double one = 1.0;
    CHECK(ds({1.0}) == Catch::Approx(-std::sin(1.0)).margin(1e-12));
    CHECK(fd_check(s, ds, {&one, 1}, 0, 2) <= 1e-6);
}

TEST_CASE("budget guard refuses blow-ups") {
    setenv("MTMF_BUDGET", "3", 1);
    Mtmf f;
    f.arity = 1;
    f.B = IndexSet::range(20);
    f.a = CoefficientFamily::generator(Expr::constant(1.0));
    f.g = Coefficient(parse("x1^2 + x1", 1));
    CHECK_THROWS_AS(dk_general(f, 0, 3), CalculusError);
    unsetenv("MTMF_BUDGET");
    CHECK_NOTHROW(dk_general(f, 0, 3));
}
