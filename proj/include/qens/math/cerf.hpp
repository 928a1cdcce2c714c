#ifndef QENS_MATH_CERF_HPP
#define QENS_MATH_CERF_HPP

#include <array>
#include <cmath>
#include <complex>

namespace qens {

// Faddeeva function w(z) = exp(-z^2) erfc(-iz) for Im(z) >= 0.
// Weideman's rational approximation (SIAM Rev. 36, 1994) with N = 64 terms,
// coefficients computed once in long double; Laplace continued fraction for
// large |z|. Relative error < 1e-12 over the upper half plane.
namespace detail {

inline constexpr int kWeidemanN = 64;

inline const std::array<double, kWeidemanN>& weideman_coeffs() {
    static const std::array<double, kWeidemanN> coeffs = [] {
        constexpr int N = kWeidemanN;
        constexpr int M = 2 * N;  // samples at theta_k = k pi / M, k = -M..M-1
        const long double pi = 3.14159265358979323846264338328L;
        const long double L  = std::sqrt(static_cast<long double>(N) / std::sqrt(2.0L));
        // f_k = (L^2 + t_k^2) exp(-t_k^2), t_k = L tan(theta_k / 2); even in k
        // (f(-M) = 0 at theta = -pi), so the DFT collapses to a cosine sum.
        std::array<long double, M> f{};  // f[k] for k = 0..M-1
        f[0] = L * L;
        for (int k = 1; k < M; ++k) {
            const long double t = L * std::tan(pi * k / (2.0L * M));
            f[k] = (L * L + t * t) * std::exp(-t * t);
        }
        std::array<double, N> a{};
        for (int n = 1; n <= N; ++n) {
            long double acc = f[0];
            for (int k = 1; k < M; ++k)
                acc += 2.0L * f[k] * std::cos(pi * k * n / static_cast<long double>(M));
            a[N - n] = static_cast<double>(acc / (2 * M));
        }
        return a;
    }();
    return coeffs;
}

template <class C>
C faddeeva_upper(C z) {
    using R = typename C::value_type;
    const R  abs2 = std::norm(z);
    const C  i{0, 1};
    const R  inv_sqrt_pi = R(0.5641895835477562869480794515608L);
    if (abs2 > R(64 * 64)) {
        // Laplace continued fraction, excellent far from the real axis origin
        C r{0, 0};
        for (int k = 12; k >= 1; --k) r = (k * R(0.5)) / (z - r);
        return i * inv_sqrt_pi / (z - r);
    }
    const auto& a = weideman_coeffs();
    const R  L = std::sqrt(R(kWeidemanN) / std::sqrt(R(2)));
    const C  d = L - i * z;
    const C  Z = (L + i * z) / d;
    C p{a[0], 0};
    for (int n = 1; n < kWeidemanN; ++n) p = p * Z + a[n];
    return R(2) * p / (d * d) + inv_sqrt_pi / d;
}

}  // namespace detail

// w(z); reflection w(-z) = 2 exp(-z^2) - w(z) extends to the lower half plane
// (may overflow there, as the function itself does).
inline std::complex<double> faddeeva_w(std::complex<double> z) {
    if (z.imag() >= 0.0) return detail::faddeeva_upper(z);
    const std::complex<double> e = std::exp(-z * z);
    return 2.0 * e - detail::faddeeva_upper(-z);
}

// erfcx(z) = exp(z^2) erfc(z), stable for Re(z) >= 0.
inline std::complex<double> erfcx(std::complex<double> z) {
    if (z.real() >= 0.0) return detail::faddeeva_upper(std::complex<double>(-z.imag(), z.real()));
    return 2.0 * std::exp(z * z) - erfcx(-z);
}

inline std::complex<double> cerfc(std::complex<double> z) {
    return std::exp(-z * z) * erfcx(z);
}

inline std::complex<double> cerf(std::complex<double> z) {
    // small-|z| series avoids the cancellation in 1 - erfc
    if (std::norm(z) < 1e-8) {
        const std::complex<double> z2 = z * z;
        return 1.1283791670955125739 * z * (1.0 - z2 / 3.0 + z2 * z2 / 10.0);
    }
    if (z.real() >= 0.0) return 1.0 - cerfc(z);
    return cerfc(-z) - 1.0;
}

}  // namespace qens

#endif
