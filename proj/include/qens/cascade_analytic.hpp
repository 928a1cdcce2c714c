#ifndef QENS_CASCADE_ANALYTIC_HPP
#define QENS_CASCADE_ANALYTIC_HPP

#include <stdexcept>

#include "qens/types.hpp"

namespace qens::cascade {

// Cylindrical ensemble in units of the idler transition wavelength.
struct EnsembleShape {
    double height_h;     // k3 * h
    double radius_a;     // k3 * a
    double atom_number;  // N
    EnsembleShape(double H, double A, double N) : height_h(H), radius_a(A), atom_number(N) {
        if (H <= 0.0 || A <= 0.0 || N < 1.0) throw std::invalid_argument("EnsembleShape: H, A > 0 and N >= 1");
    }
    // h, a in meters; density in atoms/m^3; wavelength in meters
    static EnsembleShape cylinder(double h, double a, double density, double wavelength);
};

struct CollectiveDecay {
    double gamma3  = 1.0;  // natural idler decay rate
    double n_mu    = 0.0;  // N mu_bar
    double delta_omega_i = 0.0;  // collective shift, supplied by the caller
    double gamma3N() const { return (n_mu + 1.0) * gamma3; }
};

struct PumpPulse {
    double tau;  // Gaussian width, Omega(t) = area/(sqrt(pi) tau) exp(-t^2/tau^2)
    double area_a = 1.0;
    double area_b = 1.0;
    double delta1 = 0.0;
    double delta2 = 0.0;
    explicit PumpPulse(double tau_) : tau(tau_) {
        if (tau <= 0.0) throw std::invalid_argument("PumpPulse: tau > 0");
    }
    // adiabatic elimination assumes tau >~ 1/|Delta_1|, 1/|Delta_2|
    bool adiabatic() const {
        const double lim = std::max(delta1 == 0.0 ? 0.0 : 1.0 / std::abs(delta1),
                                    delta2 == 0.0 ? 0.0 : 1.0 / std::abs(delta2));
        return tau >= lim;
    }
};

// Geometric superradiance factor for a cylinder (Bessel-kernel integral over
// x in (-1,1); endpoint singularities are removable and evaluated as limits).
double mu_bar(const EnsembleShape& shape, double rel_tol = 1e-10);

// Un-normalized two-photon spectral kernel
// f(dws, dwi) = exp(-(dws+dwi)^2 tau^2 / 8) / (Gamma3N/2 - i dwi).
Complex two_photon_spectrum(double dws, double dwi, const PumpPulse& pulse, const CollectiveDecay& decay);

// Discretized |f|^2-normalized amplitude on a uniform square grid (rows:
// signal frequency, cols: idler frequency, both w_min..w_max, n points).
struct SpectralGrid {
    double w_min, w_max;
    int n_points;
    SpectralGrid(double lo, double hi, int n) : w_min(lo), w_max(hi), n_points(n) {
        if (!(lo < hi) || n < 64) throw std::invalid_argument("SpectralGrid: w_min < w_max, n_points >= 64");
    }
    double step() const { return (w_max - w_min) / (n_points - 1); }
    double omega(int i) const { return w_min + i * step(); }
};
MatXc spectrum_on_grid(const SpectralGrid& grid, const PumpPulse& pulse, const CollectiveDecay& decay);

// Phased-ensemble amplitude after signal emission, with the (1 + erf) factor
// folded into a scaled complementary error function so large detunings and
// times stay finite.
Complex signal_amplitude(double t, double dws, const PumpPulse& pulse, const CollectiveDecay& decay);

// source term of dC/dt = (-Gamma3N/2 + i dw_i) C + source(t); test hook for
// the defining ODE of signal_amplitude
Complex signal_amplitude_source(double t, double dws, const PumpPulse& pulse, const CollectiveDecay& decay);

// normalized signal-idler delay correlation: exp(-Gamma3N dt) for dt >= 0
double g2(double dt, const CollectiveDecay& decay);

}  // namespace qens::cascade

#endif
