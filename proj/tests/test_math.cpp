#include <cmath>
#include <complex>

#include "doctest.h"
#include "qens/math/cerf.hpp"
#include "qens/math/quadrature.hpp"
#include "qens/math/rng.hpp"

namespace {

// test-only oracle: erf by long double Taylor series, reliable for |z| <~ 3.5
std::complex<double> erf_series(std::complex<double> zd) {
    const std::complex<long double> z(zd.real(), zd.imag());
    std::complex<long double> term = z, sum = z;
    for (int n = 1; n < 200; ++n) {
        term *= -z * z / static_cast<long double>(n);
        const std::complex<long double> add = term / static_cast<long double>(2 * n + 1);
        sum += add;
        if (std::abs(add) < 1e-22L * std::abs(sum)) break;
    }
    sum *= 1.1283791670955125738961589031215L;  // 2/sqrt(pi)
    return {static_cast<double>(sum.real()), static_cast<double>(sum.imag())};
}

}  // namespace

TEST_CASE("rng: deterministic streams, independent realizations") {
    qens::Rng a(42), b(42);
    for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
    qens::Rng r0 = qens::Rng::for_realization(7, 0);
    qens::Rng r1 = qens::Rng::for_realization(7, 1);
    int same = 0;
    for (int i = 0; i < 64; ++i) same += r0.next_u64() == r1.next_u64();
    CHECK(same == 0);
}

TEST_CASE("rng: normal sampler moments") {
    qens::Rng rng(2024);
    const int n = 1'000'000;
    double s = 0, s2 = 0, s3 = 0;
    for (int i = 0; i < n; ++i) {
        const double x = rng.normal();
        s += x;
        s2 += x * x;
        s3 += x * x * x;
    }
    CHECK(std::abs(s / n) < 4.0 / std::sqrt(static_cast<double>(n)));
    CHECK(s2 / n == doctest::Approx(1.0).epsilon(0.01));
    CHECK(std::abs(s3 / n) < 0.02);
}

TEST_CASE("cerf: real axis matches std::erf") {
    for (double x = -5.0; x <= 5.0; x += 0.17) {
        const auto v = qens::cerf({x, 0.0});
        CHECK(v.real() == doctest::Approx(std::erf(x)).epsilon(1e-12));
        CHECK(std::abs(v.imag()) < 1e-14);
    }
}

TEST_CASE("cerf: complex arguments against the series oracle") {
    double worst = 0.0;
    for (double x = -3.0; x <= 3.0; x += 0.5)
        for (double y = -3.0; y <= 3.0; y += 0.5) {
            const std::complex<double> z{x, y};
            const auto got = qens::cerf(z);
            const auto ref = erf_series(z);
            const double denom = std::max(std::abs(ref), 1e-30);
            worst = std::max(worst, std::abs(got - ref) / denom);
        }
    CHECK(worst < 1e-10);
}

TEST_CASE("erfcx: identity exp(z^2) erfc(z) and large-argument asymptote") {
    for (double x : {0.5, 1.0, 2.0, 4.0, 8.0}) {
        const auto v = qens::erfcx({x, 0.0});
        CHECK(v.real() == doctest::Approx(std::exp(x * x) * std::erfc(x)).epsilon(1e-11));
    }
    // erfcx(z) ~ 1/(sqrt(pi) z) far out
    const std::complex<double> big{120.0, 35.0};
    const auto v = qens::erfcx(big);
    const auto asym = 1.0 / (std::sqrt(M_PI) * big);
    CHECK(std::abs(v - asym) / std::abs(asym) < 1e-3);
}

TEST_CASE("faddeeva: w(0) = 1 and the standard identity on the imaginary axis") {
    CHECK(std::abs(qens::faddeeva_w({0.0, 0.0}) - std::complex<double>(1.0, 0.0)) < 1e-13);
    // w(iy) = erfcx(y), real for y > 0
    for (double y : {0.3, 1.0, 2.5}) {
        const auto w = qens::faddeeva_w({0.0, y});
        CHECK(w.real() == doctest::Approx(std::exp(y * y) * std::erfc(y)).epsilon(1e-11));
        CHECK(std::abs(w.imag()) < 1e-13);
    }
}

TEST_CASE("quadrature: smooth reference integrals") {
    const auto a = qens::integrate_adaptive([](double x) { return x * x; }, 0.0, 1.0);
    CHECK(a.value == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    const auto b = qens::integrate_adaptive([](double x) { return 1.0 / (1.0 + x * x); }, -1.0, 1.0);
    CHECK(b.value == doctest::Approx(M_PI / 2.0).epsilon(1e-12));
    const auto c = qens::integrate_adaptive([](double x) { return std::cos(10.0 * x) * std::cos(10.0 * x); },
                                            0.0, 2.0 * M_PI);
    CHECK(c.value == doctest::Approx(M_PI).epsilon(1e-10));
}
