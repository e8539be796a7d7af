#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "mtmf/special.hpp"
#include "recurrences.hpp"

using namespace mtmf;

TEST_CASE("pochhammer") {
    CHECK(pochhammer(3.7, 0) == 1.0);
    CHECK(pochhammer(2.0, 3) == 24.0);
    CHECK(pochhammer(-1.0, 3) == 0.0);
}

TEST_CASE("hypergeometric values") {
    TruncationPolicy tight;
    tight.abs_tol = 1e-16;
    tight.max_terms = 200;
    // 0F0(;;x) = e^x
    CHECK(hypergeometric({}, {}, 1.0, tight).value ==
          Catch::Approx(std::exp(1.0)).margin(1e-10));
    // 2F1(1,1;2;x) = -ln(1-x)/x
    for (double x : {0.1, 0.5}) {
        CHECK(hypergeometric({1.0, 1.0}, {2.0}, x, tight).value ==
              Catch::Approx(-std::log(1.0 - x) / x).margin(1e-10));
    }
    CHECK(hypergeometric({1.0, 1.0}, {2.0}, 0.5, tight).value ==
          Catch::Approx(2.0 * std::log(2.0)).margin(1e-10));
    // zero in the a-list truncates at the first term
    HypResult zero_a = hypergeometric({0.0, 1.5}, {2.0}, 0.7, tight);
    CHECK(zero_a.value == 1.0);
    CHECK(zero_a.terminated);
    // 1F1(1;1;x) = 0F0(;;x)
    for (double x : {-0.8, 0.0, 1.3})
        CHECK(hypergeometric({1.0}, {1.0}, x, tight).value ==
              Catch::Approx(hypergeometric({}, {}, x, tight).value).margin(1e-12));
    // divergence flag for p=q+1, |x|>=1
    CHECK(hypergeometric({1.0, 1.0}, {2.0}, 1.5, tight).diverged);
    CHECK_FALSE(hypergeometric({1.0, 1.0}, {2.0}, 0.5, tight).diverged);
    // denominator pole
    CHECK_THROWS_AS(hypergeometric({1.0}, {-2.0}, 0.5, tight), SpecialError);
    // series representation agrees with the scalar path
    Mtmf f = hypergeometric_mtmf({1.0, 1.0}, {2.0}, tight);
    CHECK(evaluate(f, {0.5}).value ==
          Catch::Approx(hypergeometric({1.0, 1.0}, {2.0}, 0.5, tight).value).margin(1e-10));
}

TEST_CASE("zeta values") {
    const double pi = 3.14159265358979323846;
    ZetaResult z2 = zeta_detailed(2.0);
    CHECK(z2.value == Catch::Approx(pi * pi / 6.0).margin(1e-8));
    CHECK(std::fabs(z2.value - pi * pi / 6.0) <= z2.error_bound + 1e-12);
    CHECK(zeta(4.0) == Catch::Approx(pi * pi * pi * pi / 90.0).margin(1e-8));
    CHECK(zeta_mv({0.5, 1.25}) == Catch::Approx(zeta(1.75)).margin(1e-12));
    CHECK_THROWS_AS(zeta(1.0), SpecialError);
    CHECK_THROWS_AS(zeta_mv({0.25, 0.25}), SpecialError);
    // monotone decreasing on (1, 10]
    double prev = zeta(1.1);
    for (double s = 1.3; s <= 10.0; s += 0.2) {
        double cur = zeta(s);
        CHECK(cur < prev);
        prev = cur;
    }
    // series representation at s=6 (terms n^-6 decay fast enough for 170 terms)
    Mtmf f = zeta_mtmf(1);
    CHECK(evaluate(f, {6.0}).value == Catch::Approx(zeta(6.0)).margin(1e-10));
    Mtmf f2 = zeta_mtmf(2);
    CHECK(evaluate(f2, {2.5, 3.5}).value == Catch::Approx(zeta(6.0)).margin(1e-10));
}

static std::vector<oracle::Poly> oracle_family(const PolynomialFamily& fam, std::uint64_t n_max) {
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

static std::vector<PolynomialFamily> all_families() {
    return {PolynomialFamily::chebyshev_first(), PolynomialFamily::chebyshev_second(),
            PolynomialFamily::hermite(),         PolynomialFamily::jacobi(0.5, 1.5),
            PolynomialFamily::laguerre(),        PolynomialFamily::legendre()};
}

TEST_CASE("Rodrigues output matches the recurrence oracle") {
    for (const auto& fam : all_families()) {
        auto want = oracle_family(fam, 8);
        for (std::uint64_t n = 0; n <= 8; ++n) {
            INFO(fam.name() << " n=" << n);
            auto got = poly_coefficients(rodrigues_poly(fam, n));
            REQUIRE(got.size() == n + 1);  // degree is exactly n
            REQUIRE(want[n].size() == n + 1);
            for (std::size_t k = 0; k <= n; ++k) {
                INFO("coefficient of x^" << k);
                double w = want[n][k];
                CHECK(std::fabs(got[k] - w) <= 1e-12 * std::max(1.0, std::fabs(w)));
            }
        }
    }
}

TEST_CASE("hand-checked polynomial values") {
    // Legendre P2 = (3x^2 - 1)/2
    auto p2 = poly_coefficients(rodrigues_poly(PolynomialFamily::legendre(), 2));
    CHECK(p2 == std::vector<double>{-0.5, 0.0, 1.5});
    // Hermite H3 = 8x^3 - 12x
    auto h3 = poly_coefficients(rodrigues_poly(PolynomialFamily::hermite(), 3));
    REQUIRE(h3.size() == 4);
    CHECK(h3[1] == Catch::Approx(-12.0));
    CHECK(h3[3] == Catch::Approx(8.0));
    // Laguerre L0 = 1
    auto l0 = poly_coefficients(rodrigues_poly(PolynomialFamily::laguerre(), 0));
    CHECK(l0 == std::vector<double>{1.0});
}

TEST_CASE("orthogonality matrices") {
    QuadratureSpec tols;
    tols.rel_tol = 1e-10;
    tols.abs_tol = 1e-11;
    for (const auto& fam : all_families()) {
        auto gram = orthogonality_matrix(fam, 6, tols);
        for (std::size_t m = 0; m <= 6; ++m)
            for (std::size_t n = 0; n <= 6; ++n) {
                INFO(fam.name() << " entry (" << m << "," << n << ")");
                if (m == n)
                    CHECK(gram[m][n] > 0.0);
                else
                    CHECK(std::fabs(gram[m][n]) <= 1e-8);
            }
    }
    // Legendre diagonal: 2/(2n+1)
    auto leg = orthogonality_matrix(PolynomialFamily::legendre(), 6, tols);
    for (std::size_t n = 0; n <= 6; ++n)
        CHECK(leg[n][n] == Catch::Approx(2.0 / (2.0 * n + 1.0)).margin(1e-8));
}

TEST_CASE("monomials") {
    Mtmf c = monomial({0, 0});
    CHECK(evaluate(c, {3.0, 4.0}).value == 1.0);
    Mtmf m = monomial({2, 1});
    CHECK(evaluate(m, {2.0, 3.0}).value == 12.0);
    Mtmf x = monomial({1});
    Mtmf t = trivial_rep(Expr::variable(0), 1);
    for (double v : {-1.5, 0.0, 2.0})
        CHECK(evaluate(x, {v}).value == evaluate(t, {v}).value);
}
