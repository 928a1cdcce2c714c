#ifndef QENS_CASCADE_SIM_HPP
#define QENS_CASCADE_SIM_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "qens/math/rng.hpp"
#include "qens/sde.hpp"
#include "qens/types.hpp"

namespace qens::cascade_sim {

// Pump/level parameters of the cascade source. Rabi frequencies, detunings
// and rates in units of gamma03; geometry in SI.
struct CascadeScheme {
    double omega_a = 0.4;  // peak of the square pump-a pulse
    double omega_b = 1.0;  // cw
    double delta1 = 1.0;
    double delta2 = 0.0;
    double gamma01 = 1.0;
    double gamma03 = 1.0;
    double gamma12 = 0.156;
    double gamma32 = 0.156;
    double gs_over_gi = 0.775;
    double gamma03_per_ns = 1.0 / 26.0;
    double density_per_cm3 = 5e8;
    double length_m = 3e-3;
    double radius_m = 0.25e-3;
    double wavelength_m = 780e-9;
    double pump_a_duration_ns = 50.0;
    double gamma2() const { return gamma12 + gamma32; }
};

// Arecchi-Courtens cooperation units; Tc^-2 = N|g_i|^2 = gamma03 c rho sigma/2
// with sigma = 3 lambda^2 / (4 pi).
struct ScaledUnits {
    double tc_ns;
    double lc_m;
    double n_atoms;
    double cooperation_number;  // N Lc / L
    double opd;                 // rho sigma L / 2, the convention of the density table
    double length_tc;           // L / Lc
};
ScaledUnits scaled_units(const CascadeScheme& scheme);

struct SimGrid {
    int m_t = 101;
    double dt_tc = 0.9;
    double dz_tc = 1.5e-4;  // target; actual dz divides L/Lc evenly
};

// One z-node of the stochastic field: 15 atomic variables (canonical
// indices 5..19, stored at index-5) plus the four field amplitudes.
struct CellState {
    Eigen::Matrix<Complex, 15, 1> a = Eigen::Matrix<Complex, 15, 1>::Zero();
    Complex es_p{}, es_m{}, ei_p{}, ei_m{};
};

// variable indices: 1..4 fields, 5..19 atomic
enum Var : int {
    v_ei_p = 1, v_ei_m = 2, v_es_p = 3, v_es_m = 4,
    v_p01 = 5, v_p12 = 6, v_p02 = 7, v_p13 = 8, v_p03 = 9, v_p32 = 10,
    v_p33 = 11, v_p22 = 12, v_p11 = 13, v_p32d = 14, v_p03d = 15,
    v_p13d = 16, v_p02d = 17, v_p12d = 18, v_p01d = 19,
};

// dimensionless parameter block used by drift/noise at one time
struct ScaledScheme {
    double oa, ob;  // instantaneous Rabi frequencies (in 1/Tc)
    double d1, d2, g01, g03, g12, g32, g2;
    double r2;  // |gs/gi|^2
};
ScaledScheme scale_scheme(const CascadeScheme& scheme, double omega_a_now);

// Ito drift of the 15 atomic variables.
Eigen::Matrix<Complex, 15, 1> ito_drift(const CellState& c, const ScaledScheme& s);

// Stratonovich correction terms (to be multiplied by 1/(Nc dt dz)).
Eigen::Matrix<Complex, 15, 1> stratonovich_correction(const CellState& c, const ScaledScheme& s);

inline constexpr int kNoiseCount = 117;

// one diffusion-matrix entry D_ij in the canonical key order of the noise
// channel tables
Complex diffusion_entry(int i, int j, const CellState& c, const ScaledScheme& s);

// Langevin noise amplitudes F_1..F_19 built from 117 unit normals via the
// non-square factorization: sqrt(D) xi on the diagonal, sqrt(D/2)(xi + i xi')
// with conjugate reuse across channel partners. F_1 = F_2 = 0.
std::array<Complex, 20> noise_vector(const CellState& c, const ScaledScheme& s,
                                     const double* randoms /* kNoiseCount */);

// channel tables (exposed for the moment tests)
struct DiagChannel { int var; int xi; };
struct PairChannel { int owner; int partner; int xi_re; int xi_im; };
const std::vector<DiagChannel>& diagonal_channels();
const std::vector<PairChannel>& pair_channels();

// Einstein-relation spot check of diffusion entries on a state: the drift
// tables plus operator reordering against the Fokker-Planck table.
struct EinsteinEntry {
    std::string name;
    Complex einstein_value;
    Complex table_value;
    double rel_error;
};
struct EinsteinReport {
    std::vector<EinsteinEntry> entries;
    double max_rel_error = 0.0;
    bool ok(double tol = 1e-10) const { return max_rel_error <= tol; }
};
EinsteinReport einstein_check(const CellState& c, const ScaledScheme& s);
EinsteinReport einstein_check_random(std::uint64_t seed, int n_states);

// Generic shooting solver: residual(guess) is driven to zero componentwise by
// secant iteration from two starting guesses.
struct ShootingFailure : std::runtime_error {
    VecXc residuals;
    ShootingFailure(const std::string& msg, VecXc r) : std::runtime_error(msg), residuals(std::move(r)) {}
};
struct ShootingResult {
    VecXc guess;
    VecXc residual;
    int iterations;
};
ShootingResult shooting_solve(const std::function<VecXc(const VecXc&)>& residual, const VecXc& guess1,
                              const VecXc& guess2, double tol = 1e-8, int max_iter = 100);

struct CascadeObservables {
    VecX t_ns;
    // <E- E+> at the exit faces (signal z=0, idler z=L): means, standard
    // errors, imaginary parts as convergence diagnostics
    VecX i_signal, i_signal_se, i_signal_im, i_signal_im_se;
    VecX i_idler, i_idler_se, i_idler_im, i_idler_im_se;
    MatX g_re, g_im, g_se;  // G_{s,i}(t_s, t_i)
    VecX p11_re, p11_im, p11_im_se;
    VecX p22_re, p33_re;
    std::int64_t n_divergent = 0;
    std::int64_t n_realizations = 0;
};

// Positive-P ensemble run; realizations above the amplitude cap are rejected
// and counted. Raises if more than 1% of the ensemble diverges. Optional
// checkpoint file makes long runs resumable (moments + realization count).
CascadeObservables simulate_ensemble(const CascadeScheme& scheme, const SimGrid& grid,
                                     const sde::EnsembleConfig& ensemble,
                                     const std::string& checkpoint_path = "");

struct ExponentialFit {
    double t_f;      // characteristic time
    double ci_low;   // 95% confidence bounds
    double ci_high;
    int n_points;
};
// least-squares fit of g ~ exp(-t/T_f) between the curve peak and the point
// where it first drops below `tail_fraction` of the peak
ExponentialFit fit_superradiant_time(const VecX& t, const VecX& g, double tail_fraction = 0.25);

}  // namespace qens::cascade_sim

#endif
