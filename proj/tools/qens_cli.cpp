// qens command-line front end: one subcommand per module, config-file or
// flag driven, CSV/JSON outputs, and the golden-value regression runner.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "qens/cascade_analytic.hpp"
#include "qens/cascade_sim.hpp"
#include "qens/conversion.hpp"
#include "qens/dlcz.hpp"
#include "qens/few_atom.hpp"
#include "qens/io.hpp"
#include "qens/schmidt.hpp"
#include "qens/sde.hpp"

namespace {

using ParamMap = std::map<std::string, std::string>;
using qens::io::ResultBundle;
using qens::Complex;
using qens::VecX;
using qens::VecXc;

double as_double(const ParamMap& p, const std::string& key) {
    const auto it = p.find(key);
    std::size_t pos = 0;
    const double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("parameter " + key + ": not a number");
    return v;
}

std::int64_t as_int(const ParamMap& p, const std::string& key) {
    const auto it = p.find(key);
    return std::stoll(it->second);
}

std::string as_str(const ParamMap& p, const std::string& key) { return p.at(key); }

void echo_params(ResultBundle& out, const ParamMap& p) { out.params = p; }

// ------------------------------------------------------------ subcommands

void run_kubo(const ParamMap& p, ResultBundle& out) {
    using namespace qens;
    const int realizations = static_cast<int>(as_int(p, "realizations"));
    const double dt = as_double(p, "dt");
    const double t_end = as_double(p, "t_end");
    const sde::TimeGrid grid(0.0, dt, static_cast<int>(std::llround(t_end / dt)));
    const sde::EnsembleConfig cfg{realizations, static_cast<std::uint64_t>(as_int(p, "seed"))};
    const sde::EnsembleMean m = sde::kubo_ensemble_mean(cfg, grid);

    const int nodes = static_cast<int>(m.t.size());
    VecX exact(nodes), zre(nodes), zim(nodes);
    double worst_re = 0.0, worst_im = 0.0;
    for (int k = 0; k < nodes; ++k) {
        exact[k] = std::exp(-0.5 * m.t[k]);
        const double se_re = std::max(m.se_re[k], 1e-300);
        const double se_im = std::max(m.se_im[k], 1e-300);
        zre[k] = std::abs(m.mean[k].real() - exact[k]) / se_re;
        zim[k] = std::abs(m.mean[k].imag()) / se_im;
        if (k > 0) {  // at t = 0 all realizations equal 1 exactly; se = 0
            worst_re = std::max(worst_re, zre[k]);
            worst_im = std::max(worst_im, zim[k]);
        }
    }
    out.scalar("max_re_deviation_se", worst_re);
    out.scalar("max_im_deviation_se", worst_im);
    out.scalar("mean_final_re", m.mean[nodes - 1].real());
    qens::io::Table t;
    t.name = "kubo";
    t.columns = {"t", "re_mean", "im_mean", "se_re", "se_im", "exact"};
    VecX re(nodes), im(nodes);
    for (int k = 0; k < nodes; ++k) re[k] = m.mean[k].real(), im[k] = m.mean[k].imag();
    t.data = {m.t, re, im, m.se_re, m.se_im, exact};
    out.tables.push_back(std::move(t));
}

void run_mu(const ParamMap& p, ResultBundle& out) {
    using namespace qens::cascade;
    const double h = as_double(p, "height_mm") * 1e-3;
    const double a = as_double(p, "radius_mm") * 1e-3;
    const double density = as_double(p, "density_cm3") * 1e6;
    const double lambda = as_double(p, "wavelength_nm") * 1e-9;
    const EnsembleShape shape = EnsembleShape::cylinder(h, a, density, lambda);
    const double mu = mu_bar(shape);
    out.scalar("mu_bar", mu);
    out.scalar("n_atoms", shape.atom_number);
    out.scalar("n_mu", shape.atom_number * mu);
    out.scalar("enhancement", shape.atom_number * mu + 1.0);
}

void run_spectrum(const ParamMap& p, ResultBundle& out) {
    using namespace qens;
    using namespace qens::cascade;
    PumpPulse pulse(as_double(p, "tau"));
    CollectiveDecay decay{1.0, as_double(p, "nmu1") - 1.0, 0.0};
    const int n = static_cast<int>(as_int(p, "n_points"));
    const double w_max = as_double(p, "w_max");
    const SpectralGrid grid(-w_max, w_max, n);
    const MatXc f = spectrum_on_grid(grid, pulse, decay);
    const double dw = grid.step();
    out.scalar("norm_check", f.squaredNorm() * dw * dw);
    // signal-idler delay correlation markers
    out.scalar("g2_at_inverse_enhancement", g2(1.0 / (decay.gamma3 * as_double(p, "nmu1")), decay));
    out.scalar("g2_negative_delay", g2(-1.0, decay));
    // slices through the signal and idler peaks for plotting
    const int mid = n / 2;
    VecX w(n), fs(n), fi(n);
    for (int i = 0; i < n; ++i) {
        w[i] = grid.omega(i);
        fs[i] = std::abs(f(i, mid));
        fi[i] = std::abs(f(mid, i));
    }
    qens::io::Table t;
    t.name = "slices";
    t.columns = {"omega", "abs_f_signal_axis", "abs_f_idler_axis"};
    t.data = {w, fs, fi};
    out.tables.push_back(std::move(t));
}

void run_schmidt(const ParamMap& p, ResultBundle& out) {
    using namespace qens;
    using namespace qens::cascade;
    PumpPulse pulse(as_double(p, "tau"));
    CollectiveDecay decay{1.0, as_double(p, "nmu1") - 1.0, 0.0};
    const int n = static_cast<int>(as_int(p, "n_points"));
    const double w_max = as_double(p, "w_max");
    const bool with_modes = as_int(p, "modes") != 0;
    const SpectralGrid grid(-w_max, w_max, n);
    const MatXc f = spectrum_on_grid(grid, pulse, decay);
    const auto modes = schmidt::decompose(f, grid.step(), with_modes);
    out.scalar("lambda1", modes.lambdas[0]);
    out.scalar("sum_lambda", modes.lambdas.sum());
    const double s_nats = schmidt::entropy(modes.lambdas);
    out.scalar("entropy", s_nats);
    out.scalar("entropy_bits", s_nats / std::log(2.0));
    const int keep = std::min<int>(64, modes.lambdas.size());
    qens::io::Table t;
    t.name = "lambdas";
    t.columns = {"n", "lambda"};
    VecX idx(keep), lam(keep);
    for (int i = 0; i < keep; ++i) idx[i] = i + 1, lam[i] = modes.lambdas[i];
    t.data = {idx, lam};
    out.tables.push_back(std::move(t));
    if (with_modes) {
        qens::io::Table mt;
        mt.name = "modes";
        mt.columns = {"omega", "psi1_re", "psi1_im", "phi1_re", "phi1_im"};
        VecX w(n), a(n), b(n), c(n), d(n);
        for (int i = 0; i < n; ++i) {
            w[i] = grid.omega(i);
            a[i] = modes.signal_modes(i, 0).real();
            b[i] = modes.signal_modes(i, 0).imag();
            c[i] = modes.idler_modes(i, 0).real();
            d[i] = modes.idler_modes(i, 0).imag();
        }
        mt.data = {w, a, b, c, d};
        out.tables.push_back(std::move(mt));
    }
}

void run_dlcz(const ParamMap& p, ResultBundle& out) {
    using namespace qens;
    dlcz::SwapInput in;
    if (as_int(p, "pure") != 0) {
        in.lambdas = VecX::Ones(1);
    } else {
        cascade::PumpPulse pulse(as_double(p, "tau"));
        cascade::CollectiveDecay decay{1.0, as_double(p, "nmu1") - 1.0, 0.0};
        const cascade::SpectralGrid grid(-as_double(p, "w_max"), as_double(p, "w_max"),
                                         static_cast<int>(as_int(p, "n_points")));
        const MatXc f = cascade::spectrum_on_grid(grid, pulse, decay);
        in.lambdas = schmidt::decompose(f, grid.step(), false).lambdas;
    }
    in.eta_r = as_double(p, "eta_r");
    dlcz::DetectorModel det;
    det.eta_t = as_double(p, "eta_t");
    const std::string kind = as_str(p, "detector");
    if (kind == "nrpd") det.kind = dlcz::DetectorKind::NRPD;
    else if (kind == "pnrd") det.kind = dlcz::DetectorKind::PNRD;
    else throw std::invalid_argument("detector must be nrpd or pnrd");
    const auto m = dlcz::swap_metrics(in, det);
    out.scalar("fidelity", m.fidelity);
    out.scalar("herald", m.herald);
    out.scalar("success", m.success);
    out.scalar("pme_success", dlcz::pme_success(in.lambdas, in.eta_r, det.eta_t));
    out.scalar("teleport_success",
               dlcz::teleport_success(std::sqrt(as_double(p, "d0_sq")), in.lambdas, in.eta_r, det.eta_t, det));
    out.scalar("lambda1", in.lambdas.maxCoeff());
}

qens::conversion::DiamondParams diamond_from(const ParamMap& p) {
    qens::conversion::DiamondParams d;
    d.omega_a = as_double(p, "omega_a");
    d.omega_b = as_double(p, "omega_b");
    d.delta1 = as_double(p, "delta1");
    d.delta_b = as_double(p, "delta_b");
    d.delta_wi = as_double(p, "delta_wi");
    d.opd = as_double(p, "opd");
    d.length_m = as_double(p, "length_mm") * 1e-3;
    return d;
}

void run_convert(const ParamMap& p, ResultBundle& out) {
    using namespace qens::conversion;
    const DiamondParams d = diamond_from(p);
    const Direction dir = as_str(p, "direction") == "up" ? Direction::up : Direction::down;
    const auto c = coupling_coefficients(d);
    const auto r = parametric_solution(c, d.length_m, dir);
    out.scalar("eta", r.eta);
    out.scalar("transmission", r.T);
    out.scalar("eta_plus_T", r.eta + r.T);
    out.scalar("beta_s_L_re", (c.beta_s * d.length_m).real());
    out.scalar("beta_s_L_im", (c.beta_s * d.length_m).imag());
    out.scalar("alpha_i_L_re", (c.alpha_i * d.length_m).real());
    out.scalar("alpha_i_L_im", (c.alpha_i * d.length_m).imag());
    out.scalar("kappa_s_L_im", (c.kappa_s * d.length_m).imag());
    const int n_scan = static_cast<int>(as_int(p, "scan_points"));
    if (n_scan > 1) {
        const double lo = as_double(p, "scan_from"), hi = as_double(p, "scan_to");
        VecX wi(n_scan), eta(n_scan), tr(n_scan);
        for (int i = 0; i < n_scan; ++i) {
            wi[i] = lo + (hi - lo) * i / (n_scan - 1);
            try {
                const auto ci = coupling_coefficients(d, wi[i]);
                const auto ri = parametric_solution(ci, d.length_m, dir);
                eta[i] = ri.eta;
                tr[i] = ri.T;
            } catch (const std::domain_error&) {
                eta[i] = tr[i] = std::nan("");
            }
        }
        qens::io::Table t;
        t.name = "scan";
        t.columns = {"delta_wi", "eta", "transmission"};
        t.data = {wi, eta, tr};
        out.tables.push_back(std::move(t));
    }
}

void run_convert_opt(const ParamMap& p, ResultBundle& out) {
    using namespace qens::conversion;
    OptimizeOptions opt;
    opt.n_starts = static_cast<int>(as_int(p, "starts"));
    opt.seed = static_cast<std::uint64_t>(as_int(p, "seed"));
    DiamondParams base;
    base.length_m = as_double(p, "length_mm") * 1e-3;
    const auto res = optimize_efficiency(as_double(p, "opd"), Direction::down, opt, base);
    out.scalar("eta_max", res.eta_max);
    out.scalar("best_omega_a", res.best[0]);
    out.scalar("best_omega_b", res.best[1]);
    out.scalar("best_delta1", res.best[2]);
    out.scalar("best_delta_b", res.best[3]);
    out.scalar("best_delta_wi", res.best[4]);
    qens::io::Table t;
    t.name = "starts";
    t.columns = {"omega_a", "omega_b", "delta1", "delta_b", "delta_wi", "eta"};
    const int m = static_cast<int>(res.starts.size());
    VecX c0(m), c1(m), c2(m), c3(m), c4(m), c5(m);
    for (int i = 0; i < m; ++i) {
        c0[i] = res.starts[i].first[0];
        c1[i] = res.starts[i].first[1];
        c2[i] = res.starts[i].first[2];
        c3[i] = res.starts[i].first[3];
        c4[i] = res.starts[i].first[4];
        c5[i] = res.starts[i].second;
    }
    t.data = {c0, c1, c2, c3, c4, c5};
    out.tables.push_back(std::move(t));
}

void run_convert_pulse(const ParamMap& p, ResultBundle& out) {
    using namespace qens::conversion;
    const DiamondParams d = diamond_from(p);
    const double probe_dur = as_double(p, "probe_duration_ns");
    const double probe_rise = as_double(p, "probe_rise_ns");
    const double probe_span = as_double(p, "probe_span_ns");
    const double pump_rise = as_double(p, "pump_rise_ns");
    const double pump_span = as_double(p, "pump_span_ns");
    const double pump_dur = probe_dur + 2.0 * (probe_rise + probe_span);
    const auto pump_a = PulseShape::smoothed_square(d.omega_a, pump_rise, pump_span, pump_dur);
    const auto pump_b = PulseShape::cw(d.omega_b);
    const auto probe = PulseShape::smoothed_square(as_double(p, "probe_amplitude"), probe_rise,
                                                   probe_span, probe_dur);
    PulseGrid grid;
    grid.dt_tc = as_double(p, "dt_tc");
    grid.dz_tc = as_double(p, "dz_tc");
    const auto r = pulse_conversion(d, pump_a, pump_b, probe, grid);
    out.scalar("eta_d", r.eta_d);
    out.scalar("tc_ns", r.tc_ns);
    const int n = static_cast<int>(r.t_ns.size());
    VecX sig(n), idl_in(n), idl_out(n);
    for (int i = 0; i < n; ++i) {
        sig[i] = std::norm(r.e_signal_out[i]);
        idl_in[i] = std::norm(r.e_idler_in[i]);
        idl_out[i] = std::norm(r.e_idler_out[i]);
    }
    qens::io::Table t;
    t.name = "pulse";
    t.columns = {"t_ns", "signal_out_intensity", "idler_in_intensity", "idler_out_intensity"};
    t.data = {r.t_ns, sig, idl_in, idl_out};
    out.tables.push_back(std::move(t));
}

void run_fewatom(const ParamMap& p, ResultBundle& out) {
    using namespace qens::few_atom;
    const double side = as_double(p, "side_lambda");
    AtomGeometry geom = as_str(p, "geometry") == "line"
                            ? AtomGeometry::line(static_cast<int>(as_int(p, "n")), side)
                            : AtomGeometry::square(side);
    const double omega_a = as_double(p, "omega_a");
    const double delta1 = as_double(p, "delta1");
    const double dt = as_double(p, "dt");
    const double t_end = as_double(p, "t_end");
    if (t_end > 0.0) {
        const auto series = evolve_lindblad(geom, omega_a, delta1, t_end, dt);
        qens::io::Table t;
        t.name = "populations";
        t.columns = {"t", "p1s", "p1ns", "p2s", "p2ns"};
        t.data = {series.t, series.p1s, series.p1ns, series.p2s, series.p2ns};
        out.tables.push_back(std::move(t));
        out.scalar("trace_drift", series.max_trace_drift);
        out.scalar("p1s_final", series.p1s[series.p1s.size() - 1]);
        out.scalar("p2s_final", series.p2s[series.p2s.size() - 1]);
    }
    const auto steady = steady_populations(geom, omega_a, delta1, as_double(p, "t_max"), dt);
    const int n = geom.n();
    const double pe = omega_a * omega_a / (4.0 * delta1 * delta1 + 1.0);
    const double pg = 1.0 - pe;
    const double p1_0 = n * pe * std::pow(pg, n - 1);
    const double p2_0 = 0.5 * n * (n - 1) * pe * pe * std::pow(pg, n - 2);
    out.scalar("p1s", steady.p1s);
    out.scalar("p1ns", steady.p1ns);
    out.scalar("p2s", steady.p2s);
    out.scalar("p2ns", steady.p2ns);
    out.scalar("p1_independent", p1_0);
    out.scalar("p2_independent", p2_0);
    out.scalar("p1s_ratio", steady.p1s / p1_0);
    out.scalar("p2s_ratio", steady.p2s / p2_0);
    out.scalar("steady_converged", steady.converged ? 1.0 : 0.0);
}

void run_cascade(const ParamMap& p, ResultBundle& out) {
    using namespace qens::cascade_sim;
    CascadeScheme scheme;
    scheme.density_per_cm3 = as_double(p, "density_cm3");
    scheme.omega_a = as_double(p, "omega_a");
    scheme.omega_b = as_double(p, "omega_b");
    scheme.delta1 = as_double(p, "delta1");
    scheme.delta2 = as_double(p, "delta2");
    scheme.pump_a_duration_ns = as_double(p, "pump_ns");
    SimGrid grid;
    grid.m_t = static_cast<int>(as_int(p, "m_t"));
    grid.dt_tc = as_double(p, "dt_tc");
    grid.dz_tc = as_double(p, "dz_tc");
    qens::sde::EnsembleConfig cfg{static_cast<int>(as_int(p, "realizations")),
                                  static_cast<std::uint64_t>(as_int(p, "seed"))};
    const auto obs = simulate_ensemble(scheme, grid, cfg, as_str(p, "checkpoint"));

    // G cross-section through its maximum, fitted to an exponential decay
    int ts = 0, ti = 0;
    obs.g_re.maxCoeff(&ts, &ti);
    const int tail = obs.g_re.cols() - ts;
    VecX tau(tail), slice(tail);
    for (int k = 0; k < tail; ++k) {
        tau[k] = obs.t_ns[ts + k] - obs.t_ns[ts];
        slice[k] = obs.g_re(ts, ts + k);
    }
    const auto fit = fit_superradiant_time(tau, slice);
    out.scalar("t_f_ns", fit.t_f);
    out.scalar("t_f_ci_low", fit.ci_low);
    out.scalar("t_f_ci_high", fit.ci_high);
    const auto units = scaled_units(scheme);
    const auto shape = qens::cascade::EnsembleShape::cylinder(scheme.length_m, scheme.radius_m,
                                                              scheme.density_per_cm3 * 1e6,
                                                              scheme.wavelength_m);
    const double nmu = shape.atom_number * qens::cascade::mu_bar(shape);
    out.scalar("t1_ns", 1.0 / scheme.gamma03_per_ns / (nmu + 1.0));
    out.scalar("n_mu", nmu);
    out.scalar("opd", units.opd);
    out.scalar("tc_ns", units.tc_ns);
    out.scalar("n_divergent", static_cast<double>(obs.n_divergent));
    out.scalar("g_peak_ts_ns", obs.t_ns[ts]);

    qens::io::Table t;
    t.name = "intensities";
    t.columns = {"t_ns", "i_signal", "i_signal_se", "i_signal_im", "i_idler", "i_idler_se", "i_idler_im",
                 "p11_re", "p11_im", "p22_re", "p33_re"};
    t.data = {obs.t_ns, obs.i_signal, obs.i_signal_se, obs.i_signal_im, obs.i_idler, obs.i_idler_se,
              obs.i_idler_im, obs.p11_re, obs.p11_im, obs.p22_re, obs.p33_re};
    out.tables.push_back(std::move(t));
    qens::io::Table gt;
    gt.name = "gslice";
    gt.columns = {"tau_ns", "g_re", "g_se"};
    gt.data = {tau, slice, [&] {
                   VecX se(tail);
                   for (int k = 0; k < tail; ++k) se[k] = obs.g_se(ts, ts + k);
                   return se;
               }()};
    out.tables.push_back(std::move(gt));
}

void run_einstein_check(const ParamMap& p, ResultBundle& out) {
    using namespace qens::cascade_sim;
    const auto report = einstein_check_random(static_cast<std::uint64_t>(as_int(p, "seed")),
                                              static_cast<int>(as_int(p, "n_states")));
    out.scalar("max_rel_error", report.max_rel_error);
    for (const auto& e : report.entries) out.scalar("rel_error " + e.name, e.rel_error);
    if (!report.ok()) {
        std::string bad;
        for (const auto& e : report.entries)
            if (e.rel_error > 1e-10) bad += (bad.empty() ? "" : ", ") + e.name;
        throw std::runtime_error("einstein check failed for " + bad);
    }
}

// ---------------------------------------------------------------- registry

struct Subcommand {
    std::string name;
    std::string description;
    ParamMap defaults;
    std::function<void(const ParamMap&, ResultBundle&)> run;
};

std::vector<Subcommand> registry() {
    return {
        {"kubo", "Kubo oscillator ensemble against the exact first moment",
         {{"realizations", "1024"}, {"dt", "0.01"}, {"t_end", "5"}, {"seed", "12345"}},
         run_kubo},
        {"fewatom", "few-atom master equation populations",
         {{"geometry", "square"}, {"n", "4"}, {"side_lambda", "3"}, {"omega_a", "0.2"}, {"delta1", "5"},
          {"dt", "0.001"}, {"t_end", "0"}, {"t_max", "200"}},
         run_fewatom},
        {"mu", "geometric superradiance factor for a cylindrical cloud",
         {{"height_mm", "3"}, {"radius_mm", "0.25"}, {"density_cm3", "8e10"}, {"wavelength_nm", "795"}},
         run_mu},
        {"spectrum", "two-photon spectral amplitude on a grid",
         {{"tau", "0.25"}, {"nmu1", "5"}, {"w_max", "1200"}, {"n_points", "512"}},
         run_spectrum},
        {"schmidt", "Schmidt decomposition of the biphoton amplitude",
         {{"tau", "0.25"}, {"nmu1", "5"}, {"w_max", "1200"}, {"n_points", "2000"}, {"modes", "0"}},
         run_schmidt},
        {"dlcz", "entanglement swapping / PME / teleportation metrics",
         {{"pure", "0"}, {"tau", "0.25"}, {"nmu1", "5"}, {"w_max", "1200"}, {"n_points", "512"},
          {"eta_r", "1"}, {"eta_t", "1"}, {"detector", "nrpd"}, {"d0_sq", "0.5"}},
         run_dlcz},
        {"convert", "closed-form conversion efficiency and transmission",
         {{"omega_a", "33"}, {"omega_b", "20"}, {"delta1", "39"}, {"delta_b", "2"}, {"delta_wi", "-21"},
          {"opd", "150"}, {"length_mm", "6"}, {"direction", "down"}, {"scan_points", "0"},
          {"scan_from", "-80"}, {"scan_to", "80"}},
         run_convert},
        {"convert-opt", "multi-start optimization of the conversion efficiency",
         {{"opd", "150"}, {"starts", "32"}, {"seed", "20100"}, {"length_mm", "6"}},
         run_convert_opt},
        {"convert-pulse", "pulsed Maxwell-Bloch conversion run",
         {{"omega_a", "33"}, {"omega_b", "20"}, {"delta1", "39"}, {"delta_b", "2"}, {"delta_wi", "-21"},
          {"opd", "150"}, {"length_mm", "6"}, {"probe_duration_ns", "100"}, {"probe_rise_ns", "20"},
          {"probe_span_ns", "20"}, {"pump_rise_ns", "10"}, {"pump_span_ns", "10"},
          {"probe_amplitude", "0.1"}, {"dt_tc", "0.5"}, {"dz_tc", "0.001"}},
         run_convert_pulse},
        {"cascade", "positive-P stochastic cascade emission ensemble",
         {{"density_cm3", "5e8"}, {"realizations", "10000"}, {"seed", "777"}, {"m_t", "101"},
          {"dt_tc", "0.9"}, {"dz_tc", "0.00015"}, {"omega_a", "0.4"}, {"omega_b", "1"}, {"delta1", "1"},
          {"delta2", "0"}, {"pump_ns", "50"}, {"checkpoint", ""}},
         run_cascade},
        {"einstein-check", "diffusion-matrix transcription check",
         {{"seed", "4242"}, {"n_states", "1000"}},
         run_einstein_check},
    };
}

ParamMap load_config(const std::string& path, const std::string& section, const ParamMap& schema) {
    std::ifstream in(path);
    if (!in.good()) throw std::invalid_argument("cannot read config file " + path);
    ParamMap out;
    std::string line, current;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line.erase(hash);
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']') {
            current = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!current.empty() && current != section) continue;
        if (!schema.count(key))
            throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": unknown key '" + key +
                                        "' for subcommand " + section);
        out[key] = value;
    }
    return out;
}

int run_golden(const std::string& suite_path, const std::string& out_prefix) {
    std::ifstream in(suite_path);
    if (!in.good()) {
        std::cerr << "golden: cannot read suite " << suite_path << "\n";
        return 1;
    }
    nlohmann::json suite;
    try {
        in >> suite;
        if (!suite.is_array()) throw std::runtime_error("suite must be a JSON array");
    } catch (const std::exception& e) {
        std::cerr << "golden: malformed suite: " << e.what() << "\n";
        return 1;
    }
    const auto subs = registry();
    nlohmann::json report = nlohmann::json::array();
    int failures = 0;
    std::map<std::string, ResultBundle> cache;  // identical param sets run once
    for (const auto& entry : suite) {
        std::string name, sub, metric;
        double expected = 0, tol = 0;
        try {
            name = entry.at("name").get<std::string>();
            sub = entry.at("subcommand").get<std::string>();
            metric = entry.at("metric").get<std::string>();
            expected = entry.at("expected").get<double>();
            tol = entry.at("tol").get<double>();
        } catch (const std::exception& e) {
            std::cerr << "golden: malformed entry: " << e.what() << "\n";
            return 1;
        }
        const auto it = std::find_if(subs.begin(), subs.end(), [&](const auto& s) { return s.name == sub; });
        if (it == subs.end()) {
            std::cerr << "golden: unknown subcommand " << sub << "\n";
            return 1;
        }
        ParamMap params = it->defaults;
        if (entry.count("params"))
            for (const auto& [k, v] : entry.at("params").items()) {
                if (!params.count(k)) {
                    std::cerr << "golden: unknown key " << k << " for " << sub << "\n";
                    return 1;
                }
                params[k] = v.is_string() ? v.get<std::string>() : nlohmann::json(v).dump();
            }
        std::string key = sub;
        for (const auto& [k, v] : params) key += "|" + k + "=" + v;
        double value = 0.0;
        bool pass = false;
        std::string error;
        try {
            if (!cache.count(key)) {
                ResultBundle b;
                b.subcommand = sub;
                echo_params(b, params);
                it->run(params, b);
                cache[key] = std::move(b);
            }
            const auto& b = cache[key];
            const auto sit = std::find_if(b.scalars.begin(), b.scalars.end(),
                                          [&](const auto& s) { return s.name == metric; });
            if (sit == b.scalars.end()) throw std::runtime_error("metric " + metric + " not produced");
            value = sit->value;
            pass = std::abs(value - expected) <= tol;
        } catch (const std::exception& e) {
            error = e.what();
        }
        if (!pass) ++failures;
        std::cout << (pass ? "PASS " : "FAIL ") << name << ": " << metric << " = " << value
                  << " expected " << expected << " +- " << tol;
        if (!error.empty()) std::cout << " (error: " << error << ")";
        std::cout << "\n";
        nlohmann::json r;
        r["name"] = name;
        r["metric"] = metric;
        r["value"] = value;
        r["expected"] = expected;
        r["tol"] = tol;
        r["pass"] = pass;
        if (!error.empty()) r["error"] = error;
        if (entry.count("provenance")) r["provenance"] = entry.at("provenance");
        report.push_back(r);
    }
    if (!out_prefix.empty()) qens::io::write_file_atomic(out_prefix + ".report.json", report.dump(2) + "\n");
    std::cout << (failures == 0 ? "golden: all entries passed\n"
                                : "golden: " + std::to_string(failures) + " entries failed\n");
    return failures == 0 ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cascade/diamond atomic-ensemble simulation toolkit"};
    app.require_subcommand(1);

    struct Pending {
        const Subcommand* sub;
        std::map<std::string, std::string>* overrides;
        std::string* config;
        std::string* out_prefix;
        bool* stamp;
    };
    auto subs = registry();
    std::vector<std::map<std::string, std::string>> overrides(subs.size());
    std::vector<std::string> configs(subs.size()), prefixes(subs.size());
    std::vector<bool> stamps(subs.size(), false);
    std::vector<Pending> pending;

    for (std::size_t i = 0; i < subs.size(); ++i) {
        auto* cmd = app.add_subcommand(subs[i].name, subs[i].description);
        for (const auto& [key, def] : subs[i].defaults) {
            cmd->add_option_function<std::string>(
                   "--" + key, [&overrides, i, key = key](const std::string& v) { overrides[i][key] = v; },
                   "default: " + (def.empty() ? std::string("(none)") : def));
        }
        cmd->add_option("--config", configs[i], "INI-style config file (sections per subcommand)");
        cmd->add_option("--out", prefixes[i], "output path prefix (default: qens_<subcommand>)");
        cmd->add_flag_callback("--stamp", [&stamps, i] { stamps[i] = true; },
                               "include a wall-clock timestamp in outputs");
    }
    std::string golden_suite, golden_out;
    auto* golden_cmd = app.add_subcommand("golden", "run a golden-value regression suite");
    golden_cmd->add_option("suite", golden_suite, "suite JSON file")->required();
    golden_cmd->add_option("--out", golden_out, "report path prefix");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (golden_cmd->parsed()) return run_golden(golden_suite, golden_out);

    for (std::size_t i = 0; i < subs.size(); ++i) {
        auto* cmd = app.get_subcommand(subs[i].name);
        if (!cmd->parsed()) continue;
        ParamMap params = subs[i].defaults;
        try {
            if (!configs[i].empty())
                for (const auto& [k, v] : load_config(configs[i], subs[i].name, subs[i].defaults))
                    params[k] = v;
            for (const auto& [k, v] : overrides[i]) params[k] = v;
        } catch (const std::exception& e) {
            std::cerr << "qens: " << e.what() << "\n";
            return 1;
        }
        ResultBundle bundle;
        bundle.subcommand = subs[i].name;
        echo_params(bundle, params);
        if (params.count("seed")) bundle.seed = static_cast<std::uint64_t>(as_int(params, "seed"));
        if (stamps[i]) {
            char buf[64];
            const std::time_t now = std::time(nullptr);
            std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
            bundle.timestamp = buf;
        }
        try {
            subs[i].run(params, bundle);
        } catch (const std::exception& e) {
            std::cerr << "qens " << subs[i].name << ": " << e.what() << "\n";
            return 2;
        }
        const std::string prefix = prefixes[i].empty() ? "qens_" + subs[i].name : prefixes[i];
        try {
            qens::io::write_bundle(bundle, prefix);
        } catch (const std::exception& e) {
            std::cerr << "qens: " << e.what() << "\n";
            return 2;
        }
        for (const auto& s : bundle.scalars)
            std::cout << s.name << " = " << s.value << (s.uncertainty ? " +- " + std::to_string(*s.uncertainty) : "")
                      << "\n";
    }
    return 0;
}
