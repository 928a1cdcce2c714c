#include "qens/cascade_analytic.hpp"

#include <cmath>

#include "qens/math/cerf.hpp"
#include "qens/math/quadrature.hpp"

namespace qens::cascade {

EnsembleShape EnsembleShape::cylinder(double h, double a, double density, double wavelength) {
    const double k3 = 2.0 * M_PI / wavelength;
    const double n  = density * M_PI * a * a * h;
    return EnsembleShape(k3 * h, k3 * a, n);
}

namespace {

double mu_integrand(double x, double H, double A) {
    const double u_hi = 1.0 - x;  // -> 0 at x = +1
    const double u_lo = 1.0 + x;  // -> 0 at x = -1
    if (u_hi < 1e-9) return H * H * A * A / 8.0;
    if (u_lo < 1e-9) {
        const double s = std::sin(H);
        return A * A * s * s / 8.0;
    }
    const double s  = std::sin(0.5 * H * u_hi);
    const double j1 = std::cyl_bessel_j(1, A * std::sqrt(1.0 - x * x));
    return (1.0 + x * x) * s * s * j1 * j1 / (u_hi * u_hi * (1.0 - x * x));
}

}  // namespace

double mu_bar(const EnsembleShape& shape, double rel_tol) {
    const double H = shape.height_h, A = shape.radius_a, N = shape.atom_number;
    if (N <= 1.0) return 0.0;
    const auto integral = integrate_adaptive([H, A](double x) { return mu_integrand(x, H, A); },
                                             -1.0, 1.0, rel_tol, 0.0, 4000);
    return 6.0 * (N - 1.0) / (N * A * A * H * H) * integral.value;
}

Complex two_photon_spectrum(double dws, double dwi, const PumpPulse& pulse, const CollectiveDecay& decay) {
    const double s = dws + dwi;
    const double g = std::exp(-s * s * pulse.tau * pulse.tau / 8.0);
    return g / Complex(0.5 * decay.gamma3N(), -dwi);
}

MatXc spectrum_on_grid(const SpectralGrid& grid, const PumpPulse& pulse, const CollectiveDecay& decay) {
    const int n = grid.n_points;
    MatXc f(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) f(i, j) = two_photon_spectrum(grid.omega(i), grid.omega(j), pulse, decay);
    const double dw = grid.step();
    const double norm2 = f.squaredNorm() * dw * dw;
    f /= std::sqrt(norm2);
    return f;
}

Complex signal_amplitude(double t, double dws, const PumpPulse& pulse, const CollectiveDecay& decay) {
    const double tau = pulse.tau;
    const Complex a(0.5 * decay.gamma3N(), dws);             // Gamma3N/2 + i dws
    const Complex p(-0.5 * decay.gamma3N(), decay.delta_omega_i);
    const Complex w = (4.0 * t - a * tau * tau) / (2.0 * std::sqrt(2.0) * tau);
    const double pref = std::sqrt(M_PI / 2.0) / (2.0 * M_PI * tau);
    // 1 + erf(w) = 2 - exp(-w^2) erfcx(w) = exp(-w^2) erfcx(-w), combined with
    // the Gaussian prefactor exp(a^2 tau^2/8) via a^2 tau^2/8 - w^2 = a t - 2 t^2/tau^2
    const Complex gauss_t = std::exp(a * t - 2.0 * t * t / (tau * tau));
    if (w.real() >= 0.0)
        return pref * std::exp(p * t) * (2.0 * std::exp(a * a * tau * tau / 8.0) - gauss_t * erfcx(w));
    return pref * std::exp(p * t) * gauss_t * erfcx(-w);
}

Complex signal_amplitude_source(double t, double dws, const PumpPulse& pulse, const CollectiveDecay& decay) {
    const double tau = pulse.tau;
    const Complex phase = std::exp(Complex(0.0, (dws + decay.delta_omega_i) * t));
    return phase * std::exp(-2.0 * t * t / (tau * tau)) / (M_PI * tau * tau);
}

double g2(double dt, const CollectiveDecay& decay) {
    if (dt < 0.0) return 0.0;
    return std::exp(-decay.gamma3N() * dt);
}

}  // namespace qens::cascade
