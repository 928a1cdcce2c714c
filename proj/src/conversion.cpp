#include "qens/conversion.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qens/math/rng.hpp"

namespace qens::conversion {

SteadyStateAtoms steady_state_atoms(double omega_a, double delta1, double gamma01) {
    SteadyStateAtoms s;
    const double oa2 = omega_a * omega_a;
    s.sigma11 = oa2 / (delta1 * delta1 + 0.25 * gamma01 * gamma01 + 2.0 * oa2);
    s.sigma00 = 1.0 - s.sigma11;
    s.sigma01 = I * omega_a * (1.0 - 2.0 * s.sigma11) / Complex(0.5 * gamma01, -delta1);
    return s;
}

CouplingCoefficients coupling_coefficients(const DiamondParams& p, double delta_wi) {
    if (p.opd <= 0.0 || p.length_m <= 0.0 || p.gamma01 <= 0.0 || p.gamma03 <= 0.0)
        throw std::invalid_argument("coupling_coefficients: opd, length and decay rates must be > 0");
    const double oa = p.omega_a, ob = p.omega_b;
    const double oa2 = oa * oa, ob2 = ob * ob;
    const double g2 = p.gamma2();
    const double dws = delta_wi - p.delta1 + p.delta_b;  // energy conservation
    const double d2  = p.delta1 + dws;

    const Complex t02(0.5 * g2, -d2);
    const Complex t13(0.5 * (p.gamma01 + p.gamma03), p.delta1 - delta_wi);
    const Complex t12(0.5 * (p.gamma01 + g2), -dws);
    const Complex t03(0.5 * p.gamma03, -delta_wi);

    const Complex d = t12 * t03 + t12 * (oa2 / t13 + ob2 / t02) + t03 * (oa2 / t02 + ob2 / t13) +
                      (oa2 - ob2) * (oa2 - ob2) / (t02 * t13);
    const double scale = std::abs(t12 * t03) + (oa2 + ob2) + 1.0;
    if (std::abs(d) < 1e-14 * scale) throw std::domain_error("coupling_coefficients: singular denominator D");

    const SteadyStateAtoms s = steady_state_atoms(oa, p.delta1, p.gamma01);
    const Complex s01  = s.sigma01;
    const Complex s01d = std::conj(s01);

    const Complex bs = s.sigma11 * (t03 + oa2 / t13 + ob2 / t02) -
                       (I * oa * s01 / t02) * (t03 + (oa2 - ob2) / t13);
    const Complex ks = s.sigma00 * (oa * ob / t02 + oa * ob / t13) +
                       (I * ob * s01d / t13) * (t03 + (ob2 - oa2) / t02);
    const Complex ki = s.sigma11 * (oa * ob / t02 + oa * ob / t13) +
                       (I * ob * s01 / t02) * (t12 + (ob2 - oa2) / t13);
    const Complex ai = s.sigma00 * (t12 + oa2 / t02 + ob2 / t13) -
                       (I * oa * s01d / t13) * (t12 + (oa2 - ob2) / t02);

    // N |g_i|^2 / c = gamma03 * opd / (2 L); the g_s/g_i ratio carries the
    // signal-side coupling strength
    const double unit = p.gamma03 * p.opd / (2.0 * p.length_m);
    const double r = p.gs_over_gi;
    CouplingCoefficients c;
    c.beta_s  = -unit * r * r * bs / d;
    c.kappa_s = -unit * r * ks / d;
    c.kappa_i = -unit * r * ki / d;
    c.alpha_i = -unit * ai / d;
    return c;
}

namespace {

// sinh(wL)/w with a series branch for small |wL|
Complex sinhc_over(const Complex w, double L) {
    const Complex wl = w * L;
    if (std::abs(wl) < 1e-4) {
        const Complex x2 = wl * wl;
        return L * (1.0 + x2 / 6.0 + x2 * x2 / 120.0);
    }
    return std::sinh(wl) / w;
}

}  // namespace

ConversionResult parametric_solution(const CouplingCoefficients& c, double L, Direction direction) {
    const Complex q = c.q();
    const Complex w = c.w();
    const Complex envelope = std::exp(0.5 * (c.alpha_i + c.beta_s) * L);
    const Complex s = sinhc_over(w, L);
    const Complex ch = std::cosh(w * L);
    ConversionResult out;
    if (direction == Direction::down) {
        out.eta = std::norm(envelope * c.kappa_s * s);
        out.T   = std::norm(envelope * (ch - q * s));
    } else {
        out.eta = std::norm(envelope * c.kappa_i * s);
        out.T   = std::norm(envelope * (ch + q * s));
    }
    return out;
}

namespace {

double efficiency_at(const DiamondParams& base, double opd, Direction dir,
                     const Eigen::Matrix<double, 5, 1>& x) {
    DiamondParams p = base;
    p.opd = opd;
    p.omega_a = x[0];
    p.omega_b = x[1];
    p.delta1  = x[2];
    p.delta_b = x[3];
    p.delta_wi = x[4];
    try {
        const auto c = coupling_coefficients(p, p.delta_wi);
        const double eta = parametric_solution(c, p.length_m, dir).eta;
        return std::isfinite(eta) ? eta : 0.0;
    } catch (const std::domain_error&) {
        return 0.0;
    }
}

using Vec5 = Eigen::Matrix<double, 5, 1>;

Vec5 clamp_params(Vec5 x, const OptimizeOptions& opt) {
    x[0] = std::clamp(x[0], 1e-3, opt.omega_max);
    x[1] = std::clamp(x[1], 1e-3, opt.omega_max);
    for (int i = 2; i < 5; ++i) x[i] = std::clamp(x[i], -opt.delta_max, opt.delta_max);
    return x;
}

// Nelder-Mead with box clamping; maximizes f
std::pair<Vec5, double> nelder_mead(const std::function<double(const Vec5&)>& f, Vec5 x0,
                                    const OptimizeOptions& opt) {
    constexpr int n = 5;
    std::array<Vec5, n + 1> pts;
    std::array<double, n + 1> val;
    pts[0] = clamp_params(x0, opt);
    val[0] = f(pts[0]);
    for (int i = 0; i < n; ++i) {
        Vec5 p = pts[0];
        p[i] += (i < 2 ? 2.0 : 5.0);
        pts[i + 1] = clamp_params(p, opt);
        val[i + 1] = f(pts[i + 1]);
    }
    auto order = [&] {
        for (int i = 0; i <= n; ++i)
            for (int j = i + 1; j <= n; ++j)
                if (val[j] > val[i]) {
                    std::swap(val[i], val[j]);
                    std::swap(pts[i], pts[j]);
                }
    };
    for (int it = 0; it < opt.max_iterations; ++it) {
        order();  // val[0] best
        if (std::abs(val[0] - val[n]) < 1e-12) break;
        Vec5 centroid = Vec5::Zero();
        for (int i = 0; i < n; ++i) centroid += pts[i];
        centroid /= n;
        const Vec5 xr = clamp_params(centroid + (centroid - pts[n]), opt);
        const double fr = f(xr);
        if (fr > val[0]) {
            const Vec5 xe = clamp_params(centroid + 2.0 * (centroid - pts[n]), opt);
            const double fe = f(xe);
            if (fe > fr) {
                pts[n] = xe;
                val[n] = fe;
            } else {
                pts[n] = xr;
                val[n] = fr;
            }
        } else if (fr > val[n - 1]) {
            pts[n] = xr;
            val[n] = fr;
        } else {
            const Vec5 xc = clamp_params(centroid - 0.5 * (centroid - pts[n]), opt);
            const double fc = f(xc);
            if (fc > val[n]) {
                pts[n] = xc;
                val[n] = fc;
            } else {
                for (int i = 1; i <= n; ++i) {
                    pts[i] = clamp_params(pts[0] + 0.5 * (pts[i] - pts[0]), opt);
                    val[i] = f(pts[i]);
                }
            }
        }
    }
    order();
    return {pts[0], val[0]};
}

}  // namespace

OptimizeResult optimize_efficiency(double opd, Direction direction, const OptimizeOptions& options,
                                   const DiamondParams& base) {
    if (opd <= 0.0) throw std::invalid_argument("optimize_efficiency: opd must be > 0");
    auto objective = [&](const Vec5& x) { return efficiency_at(base, opd, direction, x); };

    std::vector<Vec5> starts = options.extra_starts;
    Rng rng(options.seed);
    while (static_cast<int>(starts.size()) < options.n_starts + static_cast<int>(options.extra_starts.size())) {
        Vec5 x;
        x[0] = rng.uniform() * options.omega_max;
        x[1] = rng.uniform() * options.omega_max;
        for (int i = 2; i < 5; ++i) x[i] = (2.0 * rng.uniform() - 1.0) * options.delta_max;
        starts.push_back(clamp_params(x, options));
    }

    OptimizeResult out;
    out.eta_max = -1.0;
    for (const auto& s : starts) {
        auto [x, v] = nelder_mead(objective, s, options);
        out.starts.emplace_back(x, v);
        if (v > out.eta_max) {
            out.eta_max = v;
            out.best = x;
        }
    }
    return out;
}

double PulseShape::operator()(double t) const {
    if (kind == Kind::cw) return amplitude;
    const double half = 0.5 * t_span_ns;
    const double t_fall = t_rise_ns + duration_ns;
    if (t <= t_rise_ns - half || t >= t_fall + half) return 0.0;
    if (t < t_rise_ns + half)
        return amplitude * 0.5 * (1.0 + std::sin(M_PI * (t - t_rise_ns) / t_span_ns));
    if (t > t_fall - half)
        return amplitude * 0.5 * (1.0 - std::sin(M_PI * (t - t_fall) / t_span_ns));
    return amplitude;
}

double cooperation_time_ns(const DiamondParams& p) {
    // Tc^-2 = N |g_i|^2 = (gamma03 c / 2L) opd, with gamma03 in 1/ns and c in m/ns
    const double gamma03_ns = p.gamma03_per_ns;
    const double c_m_ns = 0.299792458;
    return std::sqrt(2.0 * p.length_m / (gamma03_ns * c_m_ns * p.opd));
}

PulseConversionResult pulse_conversion(const DiamondParams& p, const PulseShape& pump_a,
                                       const PulseShape& pump_b, const PulseShape& probe_idler,
                                       const PulseGrid& grid) {
    // the solver linearizes nothing, but the closed forms it is compared to
    // do; keep the probe well below the pumps
    if (probe_idler.amplitude > 0.2 * std::min(pump_a.amplitude, pump_b.amplitude))
        throw std::invalid_argument("pulse_conversion: probe must be weak compared to the pumps");
    const double tc_ns = cooperation_time_ns(p);
    const double lc_m  = 0.299792458 * tc_ns;
    const double l_tilde = p.length_m / lc_m;
    const double g_tc = p.gamma03_per_ns * tc_ns;  // gamma03 in 1/Tc units

    const int mz = std::max(2, static_cast<int>(std::lround(l_tilde / grid.dz_tc)) + 1);
    const double dz = l_tilde / (mz - 1);
    double t_end_ns = grid.t_end_ns;
    if (t_end_ns <= 0.0)
        t_end_ns = probe_idler.t_rise_ns + probe_idler.duration_ns + probe_idler.t_span_ns + 20.0;
    const int mt = static_cast<int>(std::ceil(t_end_ns / tc_ns / grid.dt_tc)) + 1;
    const double dt = grid.dt_tc;

    // scaled constants (rates are gamma03 units -> multiply by g_tc)
    const double ga01 = p.gamma01 * g_tc, ga03 = p.gamma03 * g_tc;
    const double ga2 = p.gamma2() * g_tc;
    const double d1 = p.delta1 * g_tc, db = p.delta_b * g_tc, dwi = p.delta_wi * g_tc;
    const double dws = dwi - d1 + db;
    const double d2 = d1 + dws;
    const double ratio2 = p.gs_over_gi * p.gs_over_gi;

    enum { s01, s12, s02, s11, s22, s33, s13, s03, s32d, n_atom };
    using Node = Eigen::Matrix<Complex, n_atom, 1>;
    std::vector<Node> atoms(mz, Node::Zero());
    VecXc es = VecXc::Zero(mz), ei = VecXc::Zero(mz);

    auto drift = [&](const Node& a, Complex es_p, Complex ei_p, double oa, double ob) -> Node {
        const Complex es_m = std::conj(es_p), ei_m = std::conj(ei_p);
        const Complex c01 = a[s01], c12 = a[s12], c02 = a[s02], c13 = a[s13], c03 = a[s03], c32d = a[s32d];
        const Complex c01d = std::conj(c01), c12d = std::conj(c12), c02d = std::conj(c02),
                      c13d = std::conj(c13), c03d = std::conj(c03), c32 = std::conj(c32d);
        const Complex p11 = a[s11], p22 = a[s22], p33 = a[s33];
        const Complex p00 = 1.0 - p11 - p22 - p33;
        Node d;
        d[s01] = (I * d1 - 0.5 * ga01) * c01 + I * oa * (p00 - p11) + I * c02 * es_m - I * c13d * ei_p;
        d[s12] = (I * dws - 0.5 * (ga01 + ga2)) * c12 - I * oa * c02 + I * (p11 - p22) * es_p + I * ob * c13;
        d[s02] = (I * d2 - 0.5 * ga2) * c02 - I * oa * c12 + I * c01 * es_p + I * ob * c03 - I * c32 * ei_p;
        d[s11] = -ga01 * p11 + p.gamma12 * g_tc * p22 + I * oa * (c01d - c01) - I * c12d * es_p + I * c12 * es_m;
        d[s22] = -ga2 * p22 + I * c12d * es_p - I * c12 * es_m + I * ob * (c32d - c32);
        d[s33] = -ga03 * p33 + p.gamma32 * g_tc * p22 - I * ob * (c32d - c32) + I * c03d * ei_p - I * c03 * ei_m;
        d[s13] = (I * (dwi - d1) - 0.5 * (ga01 + ga03)) * c13 - I * oa * c03 - I * c32d * es_p + I * ob * c12 +
                 I * c01d * ei_p;
        d[s03] = (I * dwi - 0.5 * ga03) * c03 - I * oa * c13 + I * ob * c02 + I * (p00 - p33) * ei_p;
        d[s32d] = (-I * db - 0.5 * (ga03 + ga2)) * c32d - I * c13 * es_m + I * ob * (p22 - p33) + I * c02d * ei_p;
        return d;
    };

    PulseConversionResult out;
    out.tc_ns = tc_ns;
    out.t_ns.resize(mt);
    out.e_signal_out.resize(mt);
    out.e_idler_in.resize(mt);
    out.e_idler_out.resize(mt);

    // z-sweep of the slaved field equations from a given atomic slice
    auto solve_fields = [&](const std::vector<Node>& a, double t_ns) {
        es[0] = 0.0;
        ei[0] = probe_idler(t_ns) * g_tc;  // weak probe, Rabi units of gamma03
        for (int k = 0; k + 1 < mz; ++k) {
            const Complex src_s = 0.5 * (a[k][s12] + a[k + 1][s12]) * ratio2;
            const Complex src_i = 0.5 * (a[k][s03] + a[k + 1][s03]);
            es[k + 1] = es[k] + dz * I * src_s;
            ei[k + 1] = ei[k] + dz * I * src_i;
        }
    };

    std::vector<Node> mid(mz);
    double num = 0.0, den = 0.0;
    for (int n = 0; n < mt; ++n) {
        const double t_ns = n * dt * tc_ns;
        solve_fields(atoms, t_ns);
        out.t_ns[n] = t_ns;
        out.e_signal_out[n] = es[mz - 1];
        out.e_idler_in[n] = ei[0];
        out.e_idler_out[n] = ei[mz - 1];
        num += std::norm(es[mz - 1]);
        den += std::norm(ei[0]);
        if (!std::isfinite(num) || num > 1e12)
            throw std::runtime_error("pulse_conversion: field blow-up, refine the grid");

        // joint midpoint iteration: atoms and the fields slaved to them are
        // advanced together at the half step
        const double t_mid = t_ns + 0.5 * dt * tc_ns;
        const double oa = pump_a(t_mid) * g_tc;
        const double ob = pump_b(t_mid) * g_tc;
        mid = atoms;
        for (int it = 0; it < 4; ++it) {
            solve_fields(mid, t_mid);
            for (int k = 0; k < mz; ++k)
                mid[k] = atoms[k] + 0.5 * dt * drift(mid[k], es[k], ei[k], oa, ob);
        }
        for (int k = 0; k < mz; ++k) atoms[k] = 2.0 * mid[k] - atoms[k];
    }
    // scaled fields carry their own coupling strengths (E~s absorbs g_s, E~i
    // absorbs g_i); the physical photon ratio removes the leftover (gs/gi)^2
    out.eta_d = den > 0.0 ? num / (den * ratio2) : 0.0;
    return out;
}

}  // namespace qens::conversion
