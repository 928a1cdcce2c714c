// Acceptance suite: one pass/fail line per criterion, tolerances pinned in
// code. Exit status is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "qens/cascade_analytic.hpp"
#include "qens/cascade_sim.hpp"
#include "qens/conversion.hpp"
#include "qens/dlcz.hpp"
#include "qens/few_atom.hpp"
#include "qens/schmidt.hpp"
#include "qens/sde.hpp"

using namespace qens;

namespace {

struct Criterion {
    bool pass = true;
    std::string detail;
    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + what;
        } else {
            detail += (detail.empty() ? "" : "; ") + what;
        }
    }
};

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// ---------------------------------------------------------------- 1: Kubo
Criterion criterion_kubo() {
    Criterion c;
    const sde::TimeGrid grid(0.0, 0.01, 500);
    const sde::EnsembleConfig cfg{1024, 20100};
    const auto m = sde::kubo_ensemble_mean(cfg, grid);
    double worst_re = 0.0, worst_im = 0.0;
    for (int k = 0; k < m.t.size(); ++k) {
        const double dev = std::abs(m.mean[k].real() - std::exp(-0.5 * m.t[k]));
        worst_re = std::max(worst_re, dev - 3.0 * m.se_re[k]);
        worst_im = std::max(worst_im, std::abs(m.mean[k].imag()) - 3.0 * m.se_im[k]);
    }
    c.require(worst_re <= 0.0, "Re<z> within 3 SE at every node (worst slack " + fmt(worst_re) + ")");
    c.require(worst_im <= 0.0, "Im<z> within 3 SE (worst slack " + fmt(worst_im) + ")");
    return c;
}

// ------------------------------------------------------------- 2: Schmidt
Criterion criterion_schmidt() {
    Criterion c;
    auto lambdas_at = [](double tau, double nmu1) {
        cascade::PumpPulse pulse(tau);
        cascade::CollectiveDecay decay{1.0, nmu1 - 1.0, 0.0};
        const cascade::SpectralGrid grid(-1200.0, 1200.0, 2000);
        const MatXc f = cascade::spectrum_on_grid(grid, pulse, decay);
        return schmidt::decompose(f, grid.step(), false).lambdas;
    };
    const VecX l = lambdas_at(0.25, 5.0);
    c.require(std::abs(l[0] - 0.80) <= 0.02, "lambda1 = " + fmt(l[0]) + " in 0.80 +- 0.02");
    c.require(std::abs(l.sum() - 1.0) <= 1e-8, "sum lambda = 1 +- 1e-8 (off by " + fmt(l.sum() - 1.0) + ")");
    // the published figure quotes base-2 entropies; entropy() is in nats
    const double s1 = schmidt::entropy(lambdas_at(0.1, 5.0)) / std::log(2.0);
    const double s2 = schmidt::entropy(lambdas_at(0.5, 5.0)) / std::log(2.0);
    const double s3 = schmidt::entropy(lambdas_at(0.5, 10.0)) / std::log(2.0);
    c.require(std::abs(s1 - 0.684) <= 0.05, "S(0.1,5) = " + fmt(s1) + " ebits vs 0.684 +- 0.05");
    c.require(std::abs(s2 - 2.041) <= 0.05, "S(0.5,5) = " + fmt(s2) + " ebits vs 2.041 +- 0.05");
    c.require(std::abs(s3 - 2.886) <= 0.05, "S(0.5,10) = " + fmt(s3) + " ebits vs 2.886 +- 0.05");
    return c;
}

// ---------------------------------------------------------------- 3: DLCZ
Criterion criterion_dlcz() {
    Criterion c;
    dlcz::SwapInput pure;
    pure.lambdas = VecX::Ones(1);
    pure.eta_r = 1.0;
    const auto nrpd = dlcz::swap_metrics(pure, {dlcz::DetectorKind::NRPD, 1.0, 1.0});
    c.require(std::abs(nrpd.fidelity - 2.0 / 3.0) <= 1e-12, "F = 2/3");
    c.require(std::abs(nrpd.herald - 0.75) <= 1e-12, "P_H = 3/4");
    c.require(std::abs(nrpd.success - 0.5) <= 1e-12, "P_S = 1/2");
    VecX mixed(3);
    mixed << 0.8, 0.15, 0.05;
    for (double eta_t : {0.3, 0.8}) {
        dlcz::SwapInput in;
        in.lambdas = mixed;
        in.eta_r = 0.7;
        const auto a = dlcz::swap_metrics(in, {dlcz::DetectorKind::NRPD, eta_t, 1.0});
        const auto b = dlcz::swap_metrics(in, {dlcz::DetectorKind::PNRD, eta_t, 1.0});
        c.require(std::abs(a.success - b.success) <= 1e-12, "P_S detector independent");
    }
    pure.eta_r = 1e-9;
    const auto limit = dlcz::swap_metrics(pure, {dlcz::DetectorKind::NRPD, 1.0, 1.0});
    c.require(std::abs(limit.fidelity - 1.0) <= 1e-5, "eta_r -> 0 pure: F -> 1");
    c.require(std::abs(dlcz::pme_success(VecX::Ones(1), 1e-9, 1.0) - 0.5) <= 1e-6, "PME max 1/2");
    c.require(std::abs(dlcz::teleport_success(0.5, VecX::Ones(1), 1e-9, 1.0,
                                              {dlcz::DetectorKind::NRPD, 1.0, 1.0}) -
                       0.25) <= 1e-6,
              "teleport max 1/4");
    return c;
}

// --------------------------------------------- 4: conversion closed forms
Criterion criterion_conversion_closed() {
    Criterion c;
    conversion::DiamondParams p;  // the published optimum at opd = 150
    const auto coeffs = conversion::coupling_coefficients(p);
    const auto down = conversion::parametric_solution(coeffs, p.length_m, conversion::Direction::down);
    const auto up = conversion::parametric_solution(coeffs, p.length_m, conversion::Direction::up);
    c.require(down.eta >= 0.90 && down.eta <= 0.94, "eta_d = " + fmt(down.eta) + " in [0.90, 0.94]");
    c.require(std::abs(up.eta - down.eta) < 1e-3, "eta_u - eta_d = " + fmt(up.eta - down.eta));
    // low-absorption points (intensity absorption coefficient 2|Re| below
    // 1e-2/L): eta + T = 1 +- 1e-2
    int checked = 0;
    double worst = 0.0;
    for (double wi = -400.0; wi <= 400.0; wi += 1.0) {
        const auto cc = conversion::coupling_coefficients(p, wi);
        if (2.0 * std::abs(cc.alpha_i.real()) * p.length_m > 1e-2 ||
            2.0 * std::abs(cc.beta_s.real()) * p.length_m > 1e-2)
            continue;
        const auto r = conversion::parametric_solution(cc, p.length_m, conversion::Direction::down);
        worst = std::max(worst, std::abs(r.eta + r.T - 1.0));
        ++checked;
    }
    c.require(checked > 0 && worst <= 1e-2,
              "eta + T = 1 +- 1e-2 at " + std::to_string(checked) + " low-absorption points (worst " + fmt(worst) + ")");
    // closed form against an RK4 propagation oracle
    Eigen::Matrix2cd a;
    a << coeffs.beta_s, coeffs.kappa_s, coeffs.kappa_i, coeffs.alpha_i;
    Eigen::Vector2cd x{0.0, 1.0};
    const int steps = 20000;
    const double h = p.length_m / steps;
    for (int i = 0; i < steps; ++i) {
        const Eigen::Vector2cd k1 = a * x;
        const Eigen::Vector2cd k2 = a * (x + 0.5 * h * k1);
        const Eigen::Vector2cd k3 = a * (x + 0.5 * h * k2);
        const Eigen::Vector2cd k4 = a * (x + h * k3);
        x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    const double ode_err = std::abs(std::norm(x[0]) - down.eta) / down.eta;
    c.require(ode_err < 1e-8, "closed form vs ODE oracle rel err " + fmt(ode_err));
    return c;
}

// -------------------------------------------------- 5: conversion optimum
Criterion criterion_optimizer() {
    Criterion c;
    const double opds[] = {1.0, 10.0, 50.0, 150.0, 300.0, 600.0};
    double prev = -1.0;
    conversion::OptimizeResult last;
    bool monotone = true;
    std::string etas;
    conversion::OptimizeOptions opt;
    opt.n_starts = 32;
    opt.seed = 20100;
    for (const double opd : opds) {
        conversion::OptimizeOptions o = opt;
        if (prev >= 0.0) {
            o.extra_starts.push_back(last.best);  // continue from the smaller depth
            Eigen::Matrix<double, 5, 1> scaled = last.best;
            scaled *= 1.3;
            o.extra_starts.push_back(scaled);
        }
        const auto res = conversion::optimize_efficiency(opd, conversion::Direction::down, o);
        etas += (etas.empty() ? "" : ", ") + fmt(res.eta_max);
        if (prev >= 0.0 && res.eta_max < prev - 1e-9) monotone = false;
        prev = res.eta_max;
        last = res;
    }
    c.require(monotone, "eta_max non-decreasing over opd {1,10,50,150,300,600}: " + etas);
    c.require(prev > 0.95, "eta_max(600) = " + fmt(prev) + " > 0.95");
    // detuning sign flip at the found optimum
    conversion::DiamondParams p;
    p.opd = 600.0;
    p.omega_a = last.best[0];
    p.omega_b = last.best[1];
    p.delta1 = last.best[2];
    p.delta_b = last.best[3];
    p.delta_wi = last.best[4];
    const double eta1 =
        conversion::parametric_solution(conversion::coupling_coefficients(p), p.length_m,
                                        conversion::Direction::down)
            .eta;
    p.delta1 = -p.delta1;
    p.delta_b = -p.delta_b;
    p.delta_wi = -p.delta_wi;
    const double eta2 =
        conversion::parametric_solution(conversion::coupling_coefficients(p), p.length_m,
                                        conversion::Direction::down)
            .eta;
    c.require(std::abs(eta1 - eta2) <= 1e-8, "sign-flip symmetry off by " + fmt(std::abs(eta1 - eta2)));
    return c;
}

// ------------------------------------------------------ 6: pulsed solver
Criterion criterion_pulse() {
    Criterion c;
    conversion::DiamondParams p;
    const auto pump_b = conversion::PulseShape::cw(p.omega_b);
    auto run = [&](double probe_dur, double dt, double dz, double pump_rise, double pump_span,
                   double probe_rise, double probe_span) {
        const double pump_dur = probe_dur + 2.0 * (probe_rise + probe_span);
        const auto pump_a = conversion::PulseShape::smoothed_square(p.omega_a, pump_rise, pump_span, pump_dur);
        const auto probe = conversion::PulseShape::smoothed_square(0.1, probe_rise, probe_span, probe_dur);
        conversion::PulseGrid grid;
        grid.dt_tc = dt;
        grid.dz_tc = dz;
        return conversion::pulse_conversion(p, pump_a, pump_b, probe, grid);
    };
    const auto long_pulse = run(100.0, 0.5, 1e-3, 10.0, 10.0, 20.0, 20.0);
    c.require(std::abs(long_pulse.eta_d - 0.92) <= 0.02,
              "100 ns probe: eta_d = " + fmt(long_pulse.eta_d) + " vs 0.92 +- 0.02");
    const auto refined = run(100.0, 0.25, 5e-4, 10.0, 10.0, 20.0, 20.0);
    const double drift = std::abs(refined.eta_d - long_pulse.eta_d) / long_pulse.eta_d;
    c.require(drift < 0.01, "grid halving moves eta_d by " + fmt(100.0 * drift) + "%");
    const auto short_pulse = run(15.0, 0.5, 1e-3, 10.0, 5.0, 15.0, 10.0);
    c.require(short_pulse.eta_d < long_pulse.eta_d,
              "15 ns probe eta_d = " + fmt(short_pulse.eta_d) + " below the 100 ns value");
    // modulation of the output intensity at the generalized Rabi frequency
    const int n = static_cast<int>(short_pulse.t_ns.size());
    VecX intensity(n);
    double mean = 0.0;
    for (int i = 0; i < n; ++i) mean += (intensity[i] = std::norm(short_pulse.e_signal_out[i]));
    mean /= n;
    const double dt_ns = short_pulse.t_ns[1] - short_pulse.t_ns[0];
    const double expected = std::sqrt(p.delta1 * p.delta1 + 4.0 * p.omega_a * p.omega_a) * p.gamma03_per_ns;
    double best_f = 0.0, best_p = 0.0;
    for (double f = 0.3 * expected; f <= 2.0 * expected; f += expected * 5e-4) {
        Complex acc = 0.0;
        for (int i = 0; i < n; ++i)
            acc += (intensity[i] - mean) * std::exp(Complex(0.0, -f * i * dt_ns));
        if (std::norm(acc) > best_p) {
            best_p = std::norm(acc);
            best_f = f;
        }
    }
    c.require(std::abs(best_f - expected) <= 0.10 * expected,
              "modulation peak at " + fmt(best_f) + " rad/ns vs sqrt(D1^2+4Oa^2) = " + fmt(expected));
    return c;
}

// ------------------------------------------------- 7: cascade stochastic
Criterion criterion_cascade() {
    Criterion c;
    cascade_sim::CascadeScheme scheme;  // rho = 5e8 cm^-3 row of the density table
    cascade_sim::SimGrid grid;          // 101 x 44, dt 0.9 Tc, dz 1.5e-4 Lc
    const sde::EnsembleConfig base{10000, 908};
    const auto obs = cascade_sim::simulate_ensemble(scheme, grid, base);

    int ts = 0, ti = 0;
    obs.g_re.maxCoeff(&ts, &ti);
    const int tail = obs.g_re.cols() - ts;
    VecX tau(tail), slice(tail);
    for (int k = 0; k < tail; ++k) {
        tau[k] = obs.t_ns[ts + k] - obs.t_ns[ts];
        slice[k] = obs.g_re(ts, ts + k);
    }
    const auto fit = cascade_sim::fit_superradiant_time(tau, slice);
    c.require(std::abs(fit.t_f - 24.6) <= 0.30 * 24.6,
              "fitted T_f = " + fmt(fit.t_f) + " ns within 30% of 24.6 ns");

    // causality: below the diagonal G is statistically zero
    int total = 0, outliers = 0;
    for (int i = 0; i < obs.g_re.rows(); ++i)
        for (int j = 0; j < i; ++j) {
            ++total;
            if (std::abs(obs.g_re(i, j)) > 3.0 * obs.g_se(i, j)) ++outliers;
        }
    const double frac = total ? static_cast<double>(outliers) / total : 0.0;
    c.require(frac <= 0.01,
              "G(t_s, t_i < t_s) within 3 SE at " + fmt(100.0 * (1.0 - frac)) + "% of nodes");

    // imaginary parts of populations shrink like 1/sqrt(R)
    const auto obs4 = cascade_sim::simulate_ensemble(scheme, grid, {40000, 908});
    double im1 = 0.0, im4 = 0.0;
    for (int k = 0; k < obs.t_ns.size(); ++k) {
        im1 += std::abs(obs.p11_im[k]);
        im4 += std::abs(obs4.p11_im[k]);
    }
    const double ratio = im4 / std::max(im1, 1e-300);
    c.require(ratio >= 0.3 && ratio <= 0.8, "Im<p11> R->4R ratio = " + fmt(ratio));

    // property-based substitution for the dense-medium rows: noise moments on
    // frozen states for every tabulated channel, Einstein check at 1e-10
    Rng state_rng(1331);
    const auto s = cascade_sim::scale_scheme(scheme, scheme.omega_a);
    bool moments_ok = true;
    for (int rep = 0; rep < 2 && moments_ok; ++rep) {
        cascade_sim::CellState st;
        for (int i = 0; i < 15; ++i) st.a[i] = Complex(state_rng.normal(), state_rng.normal());
        st.es_p = Complex(state_rng.normal(), state_rng.normal());
        st.es_m = Complex(state_rng.normal(), state_rng.normal());
        st.ei_p = Complex(state_rng.normal(), state_rng.normal());
        st.ei_m = Complex(state_rng.normal(), state_rng.normal());
        const int n = 100000;
        Rng rng(55 + rep);
        const auto& diags = cascade_sim::diagonal_channels();
        const auto& pairs = cascade_sim::pair_channels();
        std::vector<Complex> sum_d(diags.size(), 0.0), sum_p(pairs.size(), 0.0);
        std::vector<double> m2_d(diags.size(), 0.0), m2_p(pairs.size(), 0.0);
        std::array<double, cascade_sim::kNoiseCount> xi{};
        for (int k = 0; k < n; ++k) {
            for (int q = 0; q < cascade_sim::kNoiseCount; ++q) xi[q] = rng.normal();
            const auto f = cascade_sim::noise_vector(st, s, xi.data());
            for (std::size_t i = 0; i < diags.size(); ++i) {
                const Complex prod = f[diags[i].var] * f[diags[i].var];
                sum_d[i] += prod;
                m2_d[i] += std::norm(prod);
            }
            for (std::size_t i = 0; i < pairs.size(); ++i) {
                const Complex prod = f[pairs[i].owner] * f[pairs[i].partner];
                sum_p[i] += prod;
                m2_p[i] += std::norm(prod);
            }
        }
        auto ok = [&](Complex mean, double m2, Complex expect) {
            const double sigma = std::sqrt(std::max(m2 - std::norm(mean), 0.0) / n);
            return std::abs(mean - expect) <= 3.0 * sigma + 1e-12;
        };
        for (std::size_t i = 0; i < diags.size(); ++i)
            moments_ok &= ok(sum_d[i] / double(n), m2_d[i] / n,
                             cascade_sim::diffusion_entry(diags[i].var, diags[i].var, st, s));
        for (std::size_t i = 0; i < pairs.size(); ++i)
            moments_ok &= ok(sum_p[i] / double(n), m2_p[i] / n,
                             cascade_sim::diffusion_entry(pairs[i].owner, pairs[i].partner, st, s));
    }
    c.require(moments_ok, "noise moments reproduce every diffusion group within 3 sigma");

    const auto einstein = cascade_sim::einstein_check_random(2023, 1000);
    c.require(einstein.ok(1e-10),
              "Einstein relation on D(13,8), D(13,13), D(5,5): max rel err " + fmt(einstein.max_rel_error));
    c.require(obs.n_divergent * 100 <= obs.n_realizations, "divergent trajectories " +
                                                               std::to_string(obs.n_divergent));

    // qualitative density dependence: the fitted decay shortens at the next
    // density row (rho = 5e9, dt 2.8 Tc, dz 4.5e-4 Lc)
    cascade_sim::CascadeScheme denser = scheme;
    denser.density_per_cm3 = 5e9;
    cascade_sim::SimGrid grid2;
    grid2.dt_tc = 2.8;
    grid2.dz_tc = 4.5e-4;
    const auto obs2 = cascade_sim::simulate_ensemble(denser, grid2, {4000, 908});
    obs2.g_re.maxCoeff(&ts, &ti);
    const int tail2 = obs2.g_re.cols() - ts;
    VecX tau2(tail2), slice2(tail2);
    for (int k = 0; k < tail2; ++k) {
        tau2[k] = obs2.t_ns[ts + k] - obs2.t_ns[ts];
        slice2[k] = obs2.g_re(ts, ts + k);
    }
    const auto fit2 = cascade_sim::fit_superradiant_time(tau2, slice2);
    c.require(fit2.t_f < fit.t_f,
              "T_f shortens with density: " + fmt(fit2.t_f) + " ns at 5e9 vs " + fmt(fit.t_f) + " ns at 5e8");
    return c;
}

// ------------------------------------------------------------ 8: few atom
// The stated double-excitation target is a known erratum in its source: the
// quoted 1.6e-3 equals |sqrt(N) Omega_a/(2 Delta_1)|^2, a single-excitation
// quantity, and the same source gives the independent-atom double-excitation
// probability as 9.4e-7 for this drive. The clause is asserted exactly as
// stated and reported red, with both populations printed.
Criterion criterion_few_atom_p2s() {
    Criterion c;
    const auto near = few_atom::steady_populations(few_atom::AtomGeometry::square(3.0), 0.2, 5.0, 120.0, 1e-3);
    c.require(std::abs(near.p2s - 1.6e-3) <= 0.2 * 1.6e-3,
              "P2s = " + fmt(near.p2s) + " vs 1.6e-3 +- 20% (P1s = " + fmt(near.p1s) +
                  " matches that figure; P2s sits at the independent-atom scale)");
    return c;
}

Criterion criterion_few_atom() {
    Criterion c;
    const auto wide = few_atom::steady_populations(few_atom::AtomGeometry::square(5.0), 0.2, 5.0, 120.0, 1e-3);
    const double pe = 0.2 * 0.2 / (4.0 * 25.0 + 1.0);
    const double p1_0 = 4.0 * pe * std::pow(1.0 - pe, 3);
    const double ratio = wide.p1s / p1_0;
    c.require(ratio >= 0.95 && ratio <= 1.05, "d = 5 lambda: P1s/P1(0) = " + fmt(ratio));
    const auto series = few_atom::evolve_lindblad(few_atom::AtomGeometry::square(3.0), 0.2, 5.0, 20.0, 1e-3);
    c.require(series.max_trace_drift < 1e-8, "trace drift = " + fmt(series.max_trace_drift));
    return c;
}

// ------------------------------------------------------- 9: mu-bar oracle
Criterion criterion_mu() {
    Criterion c;
    const double density = 8e10 * 1e6, lambda = 795e-9;
    const struct { double h_mm, a_mm; } shapes[] = {{3.0, 0.25}, {1.0, 0.1}, {0.5, 0.05}, {2.0, 0.5}, {4.0, 0.03}};
    double worst = 0.0;
    for (const auto& sh : shapes) {
        const auto s = cascade::EnsembleShape::cylinder(sh.h_mm * 1e-3, sh.a_mm * 1e-3, density, lambda);
        const double fast = cascade::mu_bar(s);
        long double acc = 0.0L;
        const int n = 1000000;
        const double dx = 2.0 / n;
        for (int i = 0; i < n; ++i) {
            const double x = -1.0 + (i + 0.5) * dx;
            const double si = std::sin(0.5 * s.height_h * (1.0 - x));
            const double j1 = std::cyl_bessel_j(1, s.radius_a * std::sqrt(1.0 - x * x));
            acc += (1.0 + x * x) * si * si * j1 * j1 / ((1.0 - x) * (1.0 - x) * (1.0 - x * x)) * dx;
        }
        const double slow = 6.0 * (s.atom_number - 1.0) / (s.atom_number * s.radius_a * s.radius_a *
                                                           s.height_h * s.height_h) *
                            static_cast<double>(acc);
        worst = std::max(worst, std::abs(fast - slow) / slow);
    }
    c.require(worst < 1e-6, "quadrature vs Riemann oracle, worst rel err " + fmt(worst));
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    struct Entry {
        const char* id;
        const char* name;
        Criterion (*fn)();
    };
    const Entry entries[] = {
        {"1", "1 Kubo oscillator ensemble", criterion_kubo},
        {"2", "2 Schmidt eigenvalues and entropies", criterion_schmidt},
        {"3", "3 DLCZ closed forms", criterion_dlcz},
        {"4", "4 conversion closed form", criterion_conversion_closed},
        {"5", "5 conversion optimizer", criterion_optimizer},
        {"6", "6 pulsed conversion", criterion_pulse},
        {"7", "7 cascade stochastic desk scale", criterion_cascade},
        {"8a", "8a few-atom double-excitation value as stated (source erratum)", criterion_few_atom_p2s},
        {"8b", "8b few-atom independent-atom limit and trace preservation", criterion_few_atom},
        {"9", "9 mu-bar quadrature oracle", criterion_mu},
    };
    // optional filters: --only <id> runs one criterion, --skip <id> drops one
    std::string only, skip;
    for (int i = 1; i + 1 < argc; i += 2) {
        if (std::string(argv[i]) == "--only") only = argv[i + 1];
        if (std::string(argv[i]) == "--skip") skip = argv[i + 1];
    }
    int failures = 0, ran = 0;
    for (const auto& e : entries) {
        if (!only.empty() && only != e.id) continue;
        if (!skip.empty() && skip == e.id) continue;
        ++ran;
        const auto start = std::chrono::steady_clock::now();
        Criterion c;
        try {
            c = e.fn();
        } catch (const std::exception& ex) {
            c.pass = false;
            c.detail = std::string("exception: ") + ex.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s criterion %s [%.1f s] %s\n", c.pass ? "PASS" : "FAIL", e.name, secs,
                    c.detail.c_str());
        std::fflush(stdout);
        if (!c.pass) ++failures;
    }
    std::printf("%d of %d criteria passed\n", ran - failures, ran);
    return failures;
}
