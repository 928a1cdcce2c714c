#ifndef QENS_SDE_HPP
#define QENS_SDE_HPP

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

#include "qens/math/rng.hpp"
#include "qens/types.hpp"

namespace qens::sde {

// dx_i = A_i(t,x) dt + sum_j B_ij(t,x) dW_j. Interpretation (Ito vs
// Stratonovich) is up to the caller; integrate_midpoint solves the
// Stratonovich form.
struct SdeSystem {
    int dimension = 0;
    int n_noise   = 0;
    std::function<VecXc(double, const VecXc&)> drift;
    std::function<MatXc(double, const VecXc&)> noise;  // dimension x n_noise
};

struct TimeGrid {
    double t0 = 0.0;
    double dt = 0.0;
    int n_steps = 0;
    TimeGrid(double t0_, double dt_, int n_steps_) : t0(t0_), dt(dt_), n_steps(n_steps_) {
        if (dt <= 0.0 || n_steps < 1) throw std::invalid_argument("TimeGrid: dt > 0, n_steps >= 1 required");
    }
    // node k as t0 + k*dt, never a running sum
    double node(int k) const { return t0 + k * dt; }
};

struct EnsembleConfig {
    int n_realizations = 1;
    std::uint64_t master_seed = 0;
};

struct StepFailure : std::runtime_error {
    int step;
    explicit StepFailure(int s)
        : std::runtime_error("midpoint fixed-point iteration failed to converge at step " + std::to_string(s)),
          step(s) {}
};

// Wiener increments over one step: entries ~ Normal(0, dt).
VecX wiener_increments(int n_noise, double dt, Rng& rng);

// Stratonovich drift A - (1/2) sum_jk B_jk dB_ik/dx_j; noise unchanged.
// Derivatives by central differences with real step h = 1e-6 max(1,|x|_inf)
// (valid for noise matrices analytic in the state).
SdeSystem ito_to_stratonovich(const SdeSystem& system);

// Semi-implicit midpoint scheme: x_m iterated to a fixed point of
// x_m = x_n + [A(t_m, x_m) dt + B(t_n, x_m) dW]/2, then x_{n+1} = 2 x_m - x_n.
// One noise draw per channel per step, drawn at interval start.
MatXc integrate_midpoint(const SdeSystem& system, const VecXc& state0, const TimeGrid& grid,
                         Rng& rng, double tol = 1e-12, int max_iter = 50);

struct EnsembleMean {
    VecX t;
    VecXc mean;
    VecX se_re;  // standard error of the real part, per node
    VecX se_im;
};

// Kubo oscillator dz = i xi(t) z dt (Stratonovich), z(0) = 1; exact first
// moment exp(-t/2). Modulus is conserved realization-by-realization.
EnsembleMean kubo_ensemble_mean(const EnsembleConfig& config, const TimeGrid& grid);

// single Kubo realization, for tests and plotting
VecXc kubo_realization(std::uint64_t master_seed, int realization, const TimeGrid& grid);

}  // namespace qens::sde

#endif
