#ifndef QENS_CONVERSION_HPP
#define QENS_CONVERSION_HPP

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "qens/types.hpp"

namespace qens::conversion {

// Diamond-scheme parameters. Rates, Rabi frequencies and detunings in units
// of gamma03; Rabi frequencies follow the half-standard convention.
struct DiamondParams {
    double omega_a = 33.0;
    double omega_b = 20.0;
    double delta1  = 39.0;
    double delta_b = 2.0;
    double delta_wi = -21.0;
    double opd = 150.0;       // rho * sigma * L
    double length_m = 6e-3;
    double gamma01 = 27.7 / 26.24;
    double gamma03 = 1.0;
    double gamma12 = 1.0 / 2.76;
    double gamma32 = 1.0 / 5.38;
    double gs_over_gi = 1.035;
    double gamma03_per_ns = 1.0 / 27.7;  // physical gamma03, for time scaling
    double gamma2() const { return gamma12 + gamma32; }
};

// Self/cross coupling of the linearized signal-idler propagation
// dE/dz = [[beta_s, kappa_s], [kappa_i, alpha_i]] E; entries in 1/m.
struct CouplingCoefficients {
    Complex beta_s, alpha_i, kappa_s, kappa_i;
    Complex q() const { return 0.5 * (beta_s - alpha_i); }
    Complex w() const { return std::sqrt(q() * q() + kappa_s * kappa_i); }
};

// Zeroth-order steady state of the pump-a driven 0-1 transition:
// populations sigma11, sigma00 and coherence sigma01.
struct SteadyStateAtoms {
    double sigma11, sigma00;
    Complex sigma01;
};
SteadyStateAtoms steady_state_atoms(double omega_a, double delta1, double gamma01);

CouplingCoefficients coupling_coefficients(const DiamondParams& params, double delta_wi);
inline CouplingCoefficients coupling_coefficients(const DiamondParams& params) {
    return coupling_coefficients(params, params.delta_wi);
}

enum class Direction { down, up };

struct ConversionResult {
    double eta;  // conversion efficiency
    double T;    // transmission of the input field
};

// Closed-form two-mode propagator over length L; the w -> 0 limit is handled
// by series expansion of sinh(wL)/w.
ConversionResult parametric_solution(const CouplingCoefficients& coeffs, double L, Direction direction);

struct OptimizeOptions {
    int n_starts = 32;
    std::uint64_t seed = 20100; // documented default; any fixed value reproduces the run
    double omega_max = 100.0;   // Omega in (0, omega_max]
    double delta_max = 100.0;   // Delta in [-delta_max, delta_max]
    int max_iterations = 400;
    std::vector<Eigen::Matrix<double, 5, 1>> extra_starts;  // e.g. best of a smaller opd
};

struct OptimizeResult {
    Eigen::Matrix<double, 5, 1> best;  // (omega_a, omega_b, delta1, delta_b, delta_wi)
    double eta_max = 0.0;
    std::vector<std::pair<Eigen::Matrix<double, 5, 1>, double>> starts;  // per-start optima
};

// Multi-start Nelder-Mead over (omega_a, omega_b, delta1, delta_b, delta_wi).
OptimizeResult optimize_efficiency(double opd, Direction direction, const OptimizeOptions& options = {},
                                   const DiamondParams& base = {});

// smoothed square pulse: 0 -> 1 across [t_r - t_s/2, t_r + t_s/2] with profile
// (1 + sin(pi (t - t_r)/t_s))/2, unit plateau, mirrored fall centred at
// t_r + duration; cw means constant amplitude
struct PulseShape {
    enum class Kind { cw, smoothed_square } kind = Kind::cw;
    double amplitude = 1.0;
    double t_rise_ns = 0.0;
    double t_span_ns = 0.0;
    double duration_ns = 0.0;
    double operator()(double t_ns) const;
    static PulseShape cw(double amplitude) { return {Kind::cw, amplitude, 0, 0, 0}; }
    static PulseShape smoothed_square(double amplitude, double t_rise_ns, double t_span_ns, double duration_ns) {
        if (t_span_ns <= 0.0) throw std::invalid_argument("PulseShape: rise span must be > 0");
        return {Kind::smoothed_square, amplitude, t_rise_ns, t_span_ns, duration_ns};
    }
};

struct PulseGrid {
    double dt_tc = 0.5;    // time step in cooperation times
    double dz_tc = 1e-3;   // space step in cooperation lengths
    double t_end_ns = 0.0; // 0: derive from the probe shape
};

struct PulseConversionResult {
    double eta_d = 0.0;
    VecX t_ns;
    VecXc e_signal_out;  // E_s(L, t)
    VecXc e_idler_in;    // E_i(0, t) as discretized
    VecXc e_idler_out;   // E_i(L, t)
    double tc_ns = 0.0;
};

// Semi-implicit midpoint integration of the co-propagating Maxwell-Bloch
// set for a weak idler probe; eta_d integrates output signal over input
// idler power. Deterministic: normally-ordered noise terms vanish because
// sigma22, sigma33, sigma23 have zero steady state under pump-b alone.
PulseConversionResult pulse_conversion(const DiamondParams& params, const PulseShape& pump_a,
                                       const PulseShape& pump_b, const PulseShape& probe_idler,
                                       const PulseGrid& grid);

// cooperation time in ns for a given optical depth and medium length
double cooperation_time_ns(const DiamondParams& params);

}  // namespace qens::conversion

#endif
