#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "mtmf/geometry.hpp"

using namespace mtmf;

static QuadratureSpec unit_quad() {
    QuadratureSpec q;
    q.box = {{0.0, 1.0}};
    return q;
}

TEST_CASE("quadrature basics") {
    QuadratureSpec q = unit_quad();
    CHECK(integrate(parse("1", 1), q).value == Catch::Approx(1.0).margin(1e-12));
    CHECK(integrate(parse("x1^2", 1), q).value == Catch::Approx(1.0 / 3.0).margin(1e-12));
    QuadratureSpec q2;
    q2.box = {{0.0, 1.0}, {0.0, 1.0}};
    CHECK(integrate(parse("x1*x2", 2), q2).value == Catch::Approx(0.25).margin(1e-12));
    // a kinked integrand forces adaptive refinement
    CHECK(integrate(parse("abs(x1-0.3141)", 1), q).value ==
          Catch::Approx((0.3141 * 0.3141 + (1.0 - 0.3141) * (1.0 - 0.3141)) / 2.0).margin(1e-8));
}

TEST_CASE("inner product reference values") {
    QuadratureSpec q = unit_quad();
    Mtmf one = trivial_rep(Expr::constant(1.0), 1);
    CHECK(inner_product(one, one, q) == Catch::Approx(1.0).margin(1e-10));
    Mtmf x = trivial_rep(Expr::variable(0), 1);
    CHECK(inner_product(x, x, q) == Catch::Approx(1.0 / 3.0).margin(1e-10));
    // disjoint index sets: empty intersection, zero product
    Mtmf f0;
    f0.arity = 1;
    f0.B = IndexSet::finite({0});
    f0.a = CoefficientFamily::generator(Expr::constant(1.0));
    f0.g = Coefficient(Expr::variable(0));
    Mtmf f1 = trivial_rep(Expr::variable(0), 1);
    CHECK(inner_product(f0, f1, q) == 0.0);
}

TEST_CASE("norm and distance reference values") {
    QuadratureSpec q = unit_quad();
    Mtmf one = trivial_rep(Expr::constant(1.0), 1);
    Mtmf zero = trivial_rep(Expr::constant(0.0), 1);
    Mtmf x = trivial_rep(Expr::variable(0), 1);
    CHECK(norm(one, q) == Catch::Approx(1.0).margin(1e-10));
    CHECK(norm(zero, q) == Catch::Approx(0.0).margin(1e-10));
    CHECK(norm(x, q) == Catch::Approx(1.0 / std::sqrt(3.0)).margin(1e-10));
    CHECK(distance(zero, one, q) == Catch::Approx(1.0).margin(1e-10));
    CHECK(distance(x, x, q) == Catch::Approx(0.0).margin(1e-8));
}

static Mtmf random_poly_mtmf(std::mt19937& rng) {
    std::uniform_real_distribution<double> c(-1.0, 1.0);
    Mtmf f;
    f.arity = 1;
    f.B = IndexSet::range(3);
    std::vector<Coefficient> a;
    for (int n = 0; n <= 3; ++n) {
        Expr e = Expr::constant(c(rng)) + Expr::constant(c(rng)) * Expr::variable(0);
        a.emplace_back(simplify(e));
    }
    f.a = CoefficientFamily::explicit_list(std::move(a));
    f.g = Coefficient(simplify(Expr::constant(c(rng)) + Expr::constant(c(rng)) * Expr::variable(0)));
    return f;
}

TEST_CASE("metric structure on random triples") {
    QuadratureSpec q = unit_quad();
    std::mt19937 rng(31337);
    const double tol = 3e-8;
    for (int trial = 0; trial < 30; ++trial) {
        Mtmf f = random_poly_mtmf(rng), g = random_poly_mtmf(rng), h = random_poly_mtmf(rng);
        // symmetry is bit-exact by construction
        CHECK(inner_product(f, g, q) == inner_product(g, f, q));
        CHECK(inner_product(f, f, q) >= -1e-12);
        // additivity in the first slot under the canonical combiner
        std::uniform_real_distribution<double> c(-1.0, 1.0);
        double alpha = c(rng), beta = c(rng);
        double lhs = inner_product(linear_combine(alpha, f, beta, g), h, q);
        double rhs = alpha * inner_product(f, h, q) + beta * inner_product(g, h, q);
        CHECK(lhs == Catch::Approx(rhs).margin(tol));
        // metric axioms
        double dfg = distance(f, g, q), dgh = distance(g, h, q), dfh = distance(f, h, q);
        CHECK(dfh <= dfg + dgh + tol);
        CHECK(distance(f, g, q) == Catch::Approx(distance(g, f, q)).margin(tol));
        CHECK(distance(f, f, q) <= tol);
    }
}

TEST_CASE("trivial representations reduce to plain L2") {
    QuadratureSpec q = unit_quad();
    std::mt19937 rng(271828);
    std::uniform_real_distribution<double> c(-2.0, 2.0);
    for (int trial = 0; trial < 20; ++trial) {
        Expr h1 = simplify(Expr::constant(c(rng)) + Expr::constant(c(rng)) * Expr::variable(0) +
                           Expr::constant(c(rng)) * Expr::pow_int(Expr::variable(0), 2));
        Expr h2 = simplify(Expr::constant(c(rng)) + Expr::constant(c(rng)) * Expr::variable(0));
        double rho = inner_product(trivial_rep(h1, 1), trivial_rep(h2, 1), q);
        double l2 = integrate(simplify(h1 * h2), q).value;
        CHECK(rho == Catch::Approx(l2).margin(1e-9));
    }
}

TEST_CASE("gram_schmidt recovers the Legendre shape") {
    QuadratureSpec q;
    q.box = {{-1.0, 1.0}};
    std::vector<Mtmf> fs = {trivial_rep(parse("1", 1), 1), trivial_rep(parse("x1", 1), 1),
                            trivial_rep(parse("x1^2", 1), 1)};
    auto basis = gram_schmidt(fs, q);
    REQUIRE(basis.size() == 3);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            CHECK(inner_product(basis[i], basis[j], q) ==
                  Catch::Approx(i == j ? 1.0 : 0.0).margin(1e-8));
    // e2 ∝ normalized P2 = sqrt(5/8)(3x^2-1)
    double at = 0.6;
    double want = std::sqrt(5.0 / 8.0) * (3.0 * at * at - 1.0);
    double got = evaluate(basis[2], {at}).value;
    CHECK(std::fabs(std::fabs(got) - std::fabs(want)) < 1e-6);
    // span is preserved
    for (const Mtmf& f : fs) {
        auto pr = project(f, basis, q);
        CHECK(pr.residual_norm <= 1e-6);
    }
    // duplicated input is rank deficient
    std::vector<Mtmf> dup = {fs[0], fs[0]};
    CHECK_THROWS_AS(gram_schmidt(dup, q), GeometryError);
    // a single unit-norm input comes back unchanged up to sign
    Mtmf unit = trivial_rep(parse("sqrt(0.5)", 1), 1);
    auto single = gram_schmidt({unit}, q);
    CHECK(std::fabs(evaluate(single[0], {0.3}).value) ==
          Catch::Approx(std::sqrt(0.5)).margin(1e-8));
}

TEST_CASE("projection of x^2 onto the Legendre basis") {
    QuadratureSpec q;
    q.box = {{-1.0, 1.0}};
    auto basis = gram_schmidt({trivial_rep(parse("1", 1), 1), trivial_rep(parse("x1", 1), 1),
                               trivial_rep(parse("x1^2", 1), 1)},
                              q);
    auto pr = project(trivial_rep(parse("x1^2", 1), 1), basis, q);
    CHECK(pr.residual_norm <= 1e-6);
    CHECK(pr.coefficients[1] == Catch::Approx(0.0).margin(1e-8));  // odd component absent
    // orthogonal input: all coefficients near zero
    auto pr2 = project(trivial_rep(parse("x1^3 - 0.6*x1", 1), 1),
                       {basis[0], basis[2]}, q);
    CHECK(std::fabs(pr2.coefficients[0]) < 1e-8);
    CHECK(std::fabs(pr2.coefficients[1]) < 1e-8);
}
