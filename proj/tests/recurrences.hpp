#pragma once

// Test-only oracle: classical orthogonal polynomials generated by their
// three-term recurrences, as dense coefficient vectors. Deliberately
// independent of the Rodrigues-formula construction under test.

#include <cstdint>
#include <vector>

namespace oracle {

using Poly = std::vector<double>;  // coefficients, ascending degree

inline Poly shift_mul_x(const Poly& p) {  // x * p
    Poly r(p.size() + 1, 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) r[i + 1] = p[i];
    return r;
}

inline Poly axpy(double a, const Poly& x, double b, const Poly& y) {  // a*x + b*y
    Poly r(std::max(x.size(), y.size()), 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) r[i] += a * x[i];
    for (std::size_t i = 0; i < y.size(); ++i) r[i] += b * y[i];
    return r;
}

inline Poly scale(double a, const Poly& p) { return axpy(a, p, 0.0, {}); }

// P_{k+1} = (A_k x + B_k) P_k + C_k P_{k-1}
template <class ABC>
inline std::vector<Poly> run_recurrence(std::uint64_t n_max, Poly p0, Poly p1, ABC abc) {
    std::vector<Poly> out = {p0};
    if (n_max == 0) return out;
    out.push_back(p1);
    for (std::uint64_t k = 1; k < n_max; ++k) {
        auto [A, B, C] = abc(k);
        Poly next = axpy(A, shift_mul_x(out[k]), B, out[k]);
        next = axpy(1.0, next, C, out[k - 1]);
        out.push_back(next);
    }
    return out;
}

struct ABC {
    double A, B, C;
};

inline std::vector<Poly> chebyshev_first(std::uint64_t n_max) {
    return run_recurrence(n_max, {1.0}, {0.0, 1.0},
                          [](std::uint64_t) { return ABC{2.0, 0.0, -1.0}; });
}

inline std::vector<Poly> chebyshev_second(std::uint64_t n_max) {
    return run_recurrence(n_max, {1.0}, {0.0, 2.0},
                          [](std::uint64_t) { return ABC{2.0, 0.0, -1.0}; });
}

inline std::vector<Poly> hermite(std::uint64_t n_max) {  // physicists' H_n
    return run_recurrence(n_max, {1.0}, {0.0, 2.0}, [](std::uint64_t k) {
        return ABC{2.0, 0.0, -2.0 * static_cast<double>(k)};
    });
}

inline std::vector<Poly> laguerre(std::uint64_t n_max) {
    return run_recurrence(n_max, {1.0}, {1.0, -1.0}, [](std::uint64_t k) {
        double n = static_cast<double>(k);
        return ABC{-1.0 / (n + 1.0), (2.0 * n + 1.0) / (n + 1.0), -n / (n + 1.0)};
    });
}

inline std::vector<Poly> legendre(std::uint64_t n_max) {
    return run_recurrence(n_max, {1.0}, {0.0, 1.0}, [](std::uint64_t k) {
        double n = static_cast<double>(k);
        return ABC{(2.0 * n + 1.0) / (n + 1.0), 0.0, -n / (n + 1.0)};
    });
}

inline std::vector<Poly> jacobi(double a, double b, std::uint64_t n_max) {
    Poly p1 = {(a - b) / 2.0, (a + b + 2.0) / 2.0};
    return run_recurrence(n_max, {1.0}, p1, [a, b](std::uint64_t k) {
        double n = static_cast<double>(k) + 1.0;  // producing P_n from P_{n-1}, P_{n-2}
        double s = 2.0 * n + a + b;
        double denom = 2.0 * n * (n + a + b) * (s - 2.0);
        double A = s * (s - 1.0) * (s - 2.0) / denom;
        double B = (s - 1.0) * (a * a - b * b) / denom;
        double C = -2.0 * (n + a - 1.0) * (n + b - 1.0) * s / denom;
        return ABC{A, B, C};
    });
}

}  // namespace oracle
