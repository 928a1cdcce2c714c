#include "qens/sde.hpp"

#include <cmath>

#include "qens/util/parallel.hpp"

namespace qens::sde {

VecX wiener_increments(int n_noise, double dt, Rng& rng) {
    if (dt <= 0.0) throw std::invalid_argument("wiener_increments: dt must be > 0");
    VecX dw(n_noise);
    const double s = std::sqrt(dt);
    for (int i = 0; i < n_noise; ++i) dw[i] = s * rng.normal();
    return dw;
}

SdeSystem ito_to_stratonovich(const SdeSystem& system) {
    SdeSystem out = system;
    const auto drift = system.drift;
    const auto noise = system.noise;
    const int dim = system.dimension;
    const int nn  = system.n_noise;
    out.drift = [drift, noise, dim, nn](double t, const VecXc& x) -> VecXc {
        VecXc corr = VecXc::Zero(dim);
        const double h = 1e-6 * std::max(1.0, x.cwiseAbs().maxCoeff());
        const MatXc b0 = noise(t, x);
        for (int j = 0; j < dim; ++j) {
            VecXc xp = x, xm = x;
            xp[j] += h;
            xm[j] -= h;
            const MatXc db = (noise(t, xp) - noise(t, xm)) / (2.0 * h);
            for (int k = 0; k < nn; ++k) corr += b0(j, k) * db.col(k);
        }
        return drift(t, x) - 0.5 * corr;
    };
    return out;
}

MatXc integrate_midpoint(const SdeSystem& system, const VecXc& state0, const TimeGrid& grid,
                         Rng& rng, double tol, int max_iter) {
    if (tol <= 0.0 || max_iter < 1) throw std::invalid_argument("integrate_midpoint: tol > 0, max_iter >= 1");
    const int dim = system.dimension;
    MatXc traj(grid.n_steps + 1, dim);
    traj.row(0) = state0.transpose();
    VecXc x = state0;
    for (int n = 0; n < grid.n_steps; ++n) {
        const double tn = grid.node(n);
        const double tm = tn + 0.5 * grid.dt;
        const VecX dw = wiener_increments(system.n_noise, grid.dt, rng);
        VecXc m = x;
        bool converged = false;
        for (int it = 0; it < max_iter; ++it) {
            VecXc next = x + 0.5 * (system.drift(tm, m) * grid.dt + system.noise(tn, m) * dw.cast<Complex>());
            const double delta = (next - m).cwiseAbs().maxCoeff();
            m = next;
            if (delta < tol) {
                converged = true;
                break;
            }
        }
        if (!converged) throw StepFailure(n);
        x = 2.0 * m - x;
        traj.row(n + 1) = x.transpose();
    }
    return traj;
}

namespace {

SdeSystem kubo_system() {
    SdeSystem sys;
    sys.dimension = 1;
    sys.n_noise   = 1;
    sys.drift = [](double, const VecXc&) { return VecXc::Zero(1); };
    sys.noise = [](double, const VecXc& z) {
        MatXc b(1, 1);
        b(0, 0) = I * z[0];
        return b;
    };
    return sys;
}

}  // namespace

VecXc kubo_realization(std::uint64_t master_seed, int realization, const TimeGrid& grid) {
    Rng rng = Rng::for_realization(master_seed, static_cast<std::uint64_t>(realization));
    VecXc z0(1);
    z0[0] = 1.0;
    return integrate_midpoint(kubo_system(), z0, grid, rng).col(0);
}

EnsembleMean kubo_ensemble_mean(const EnsembleConfig& config, const TimeGrid& grid) {
    const int nodes = grid.n_steps + 1;
    const int r_total = config.n_realizations;
    // chunked, index-ordered reduction: bit-identical for any thread count
    ChunkedAccumulator<VecXc> sum(r_total, VecXc::Zero(nodes));
    ChunkedAccumulator<VecX> sum_re2(r_total, VecX::Zero(nodes));
    ChunkedAccumulator<VecX> sum_im2(r_total, VecX::Zero(nodes));
    parallel_for_realizations(r_total, [&](int r) {
        const VecXc z = kubo_realization(config.master_seed, r, grid);
        sum.add(r, z);
        sum_re2.add(r, z.real().cwiseProduct(z.real()));
        sum_im2.add(r, z.imag().cwiseProduct(z.imag()));
    });
    const VecXc total = sum.reduce();
    const VecX re2 = sum_re2.reduce();
    const VecX im2 = sum_im2.reduce();

    EnsembleMean out;
    out.t.resize(nodes);
    for (int k = 0; k < nodes; ++k) out.t[k] = grid.node(k);
    out.mean = total / static_cast<double>(r_total);
    out.se_re.resize(nodes);
    out.se_im.resize(nodes);
    for (int k = 0; k < nodes; ++k) {
        const double mr = out.mean[k].real();
        const double mi = out.mean[k].imag();
        const double var_r = std::max(0.0, re2[k] / r_total - mr * mr);
        const double var_i = std::max(0.0, im2[k] / r_total - mi * mi);
        out.se_re[k] = std::sqrt(var_r / r_total);
        out.se_im[k] = std::sqrt(var_i / r_total);
    }
    return out;
}

}  // namespace qens::sde
