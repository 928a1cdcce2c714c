#include "qens/cascade_sim.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "json.hpp"

#include "qens/util/parallel.hpp"

namespace qens::cascade_sim {

ScaledUnits scaled_units(const CascadeScheme& s) {
    const double sigma = 3.0 * s.wavelength_m * s.wavelength_m / (4.0 * M_PI);
    const double rho_m3 = s.density_per_cm3 * 1e6;
    const double gamma_ns = s.gamma03_per_ns;
    const double c_m_ns = 0.299792458;
    ScaledUnits u;
    u.tc_ns = 1.0 / std::sqrt(0.5 * gamma_ns * c_m_ns * rho_m3 * sigma);
    u.lc_m = c_m_ns * u.tc_ns;
    u.n_atoms = rho_m3 * M_PI * s.radius_m * s.radius_m * s.length_m;
    u.cooperation_number = u.n_atoms * u.lc_m / s.length_m;
    u.opd = 0.5 * rho_m3 * sigma * s.length_m;
    u.length_tc = s.length_m / u.lc_m;
    return u;
}

ScaledScheme scale_scheme(const CascadeScheme& s, double omega_a_now) {
    const double tc = scaled_units(s).tc_ns * s.gamma03_per_ns;  // gamma03 in 1/Tc
    ScaledScheme r;
    r.oa = omega_a_now * tc;
    r.ob = s.omega_b * tc;
    r.d1 = s.delta1 * tc;
    r.d2 = s.delta2 * tc;
    r.g01 = s.gamma01 * tc;
    r.g03 = s.gamma03 * tc;
    r.g12 = s.gamma12 * tc;
    r.g32 = s.gamma32 * tc;
    r.g2 = r.g12 + r.g32;
    r.r2 = s.gs_over_gi * s.gs_over_gi;
    return r;
}

namespace {

// atomic variable slots (canonical index - 5)
enum Slot : int {
    sp01 = 0, sp12 = 1, sp02 = 2, sp13 = 3, sp03 = 4, sp32 = 5, sp33 = 6,
    sp22 = 7, sp11 = 8, sp32d = 9, sp03d = 10, sp13d = 11, sp02d = 12,
    sp12d = 13, sp01d = 14,
};

inline Complex var_value(const CellState& c, int var_index) {
    switch (var_index) {
        case v_ei_p: return c.ei_p;
        case v_ei_m: return c.ei_m;
        case v_es_p: return c.es_p;
        case v_es_m: return c.es_m;
        default: return c.a[var_index - 5];
    }
}

}  // namespace

Eigen::Matrix<Complex, 15, 1> ito_drift(const CellState& c, const ScaledScheme& s) {
    const Complex p01 = c.a[sp01], p12 = c.a[sp12], p02 = c.a[sp02], p13 = c.a[sp13], p03 = c.a[sp03],
                  p32 = c.a[sp32], p33 = c.a[sp33], p22 = c.a[sp22], p11 = c.a[sp11], p32d = c.a[sp32d],
                  p03d = c.a[sp03d], p13d = c.a[sp13d], p02d = c.a[sp02d], p12d = c.a[sp12d],
                  p01d = c.a[sp01d];
    const Complex a0 = 1.0 - p11 - p22 - p33;
    const Complex es_p = c.es_p, es_m = c.es_m, ei_p = c.ei_p, ei_m = c.ei_m;
    const double oa = s.oa, ob = s.ob;

    Eigen::Matrix<Complex, 15, 1> d;
    d[sp01] = (I * s.d1 - 0.5 * s.g01) * p01 + I * oa * (a0 - p11) + I * ob * p02 - I * p13d * ei_p;
    d[sp12] = (I * (s.d2 - s.d1) - 0.5 * (s.g01 + s.g2)) * p12 - I * oa * p02 + I * ob * (p11 - p22) +
              I * p13 * es_p;
    d[sp02] = (I * s.d2 - 0.5 * s.g2) * p02 - I * oa * p12 + I * ob * p01 + I * p03 * es_p - I * p32 * ei_p;
    d[sp13] = (-I * s.d1 - 0.5 * (s.g01 + s.g03)) * p13 - I * oa * p03 - I * ob * p32d + I * p12 * es_m +
              I * p01d * ei_p;
    d[sp03] = -0.5 * s.g03 * p03 - I * oa * p13 + I * p02 * es_m + I * (a0 - p33) * ei_p;
    d[sp32] = (I * s.d2 - 0.5 * (s.g03 + s.g2)) * p32 + I * ob * p13d - I * (p22 - p33) * es_p - I * p02 * ei_m;
    d[sp33] = -s.g03 * p33 + s.g32 * p22 - I * p32d * es_p + I * p32 * es_m + I * p03d * ei_p - I * p03 * ei_m;
    d[sp22] = -s.g2 * p22 + I * ob * p12d - I * ob * p12 + I * p32d * es_p - I * p32 * es_m;
    d[sp11] = -s.g01 * p11 + s.g12 * p22 + I * oa * (p01d - p01) - I * ob * p12d + I * ob * p12;
    d[sp32d] = (-I * s.d2 - 0.5 * (s.g03 + s.g2)) * p32d - I * ob * p13 + I * (p22 - p33) * es_m +
               I * p02d * ei_p;
    d[sp03d] = -0.5 * s.g03 * p03d + I * oa * p13d - I * p02d * es_p - I * (a0 - p33) * ei_m;
    d[sp13d] = (I * s.d1 - 0.5 * (s.g01 + s.g03)) * p13d + I * oa * p03d + I * ob * p32 - I * p12d * es_p -
               I * p01 * ei_m;
    d[sp02d] = (-I * s.d2 - 0.5 * s.g2) * p02d + I * oa * p12d - I * ob * p01d - I * p03d * es_m +
               I * p32d * ei_m;
    d[sp12d] = (-I * (s.d2 - s.d1) - 0.5 * (s.g01 + s.g2)) * p12d + I * oa * p02d - I * ob * (p11 - p22) -
               I * p13d * es_m;
    d[sp01d] = (-I * s.d1 - 0.5 * s.g01) * p01d - I * oa * (a0 - p11) - I * ob * p02d + I * p13 * ei_m;
    return d;
}

Eigen::Matrix<Complex, 15, 1> stratonovich_correction(const CellState& c, const ScaledScheme& s) {
    Eigen::Matrix<Complex, 15, 1> corr = Eigen::Matrix<Complex, 15, 1>::Zero();
    corr[sp01] = 0.5 * I * s.oa;
    corr[sp01d] = -0.5 * I * s.oa;
    corr[sp12] = I * s.ob;
    corr[sp12d] = -I * s.ob;
    corr[sp03] = I * c.ei_p;
    corr[sp03d] = -I * c.ei_m;
    corr[sp32] = 0.5 * I * c.es_p;
    corr[sp32d] = -0.5 * I * c.es_m;
    corr[sp11] = 0.25 * (-5.0 * s.g01 + s.g12);
    corr[sp22] = -0.25 * s.g2;
    corr[sp33] = 0.25 * (-3.0 * s.g03 + s.g32);
    return corr;
}

Complex diffusion_entry(int i, int j, const CellState& c, const ScaledScheme& s) {
    const Complex p01 = c.a[sp01], p12 = c.a[sp12], p02 = c.a[sp02], p13 = c.a[sp13], p03 = c.a[sp03],
                  p32 = c.a[sp32], p33 = c.a[sp33], p22 = c.a[sp22], p11 = c.a[sp11], p32d = c.a[sp32d],
                  p03d = c.a[sp03d], p13d = c.a[sp13d], p02d = c.a[sp02d], p12d = c.a[sp12d],
                  p01d = c.a[sp01d];
    const Complex es_p = c.es_p, es_m = c.es_m, ei_p = c.ei_p, ei_m = c.ei_m;
    const double oa = s.oa, ob = s.ob;
    switch (i * 100 + j) {
        // group (i) and its daggered mirror
        case 505: return -2.0 * I * oa * p01;
        case 519: return s.g12 * p22;
        case 506: return I * (oa * p12 + p32 * ei_p);
        case 507: return -I * oa * p02;
        case 508: return I * (oa * p13 + (p33 - p11) * ei_p);
        case 509: return -I * (oa * p03 + p01 * ei_p);
        case 514: return -I * p12d * ei_p;
        case 513: return I * p13d * ei_p;
        case 511: return -I * p13d * ei_p;
        case 1919: return 2.0 * I * oa * p01d;
        case 1918: return -I * (oa * p12d + p32d * ei_m);
        case 1917: return I * oa * p02d;
        case 1916: return -I * (oa * p13d + (p33 - p11) * ei_m);
        case 1915: return I * (oa * p03d + p01d * ei_m);
        case 1910: return I * p12 * ei_m;
        case 1913: return -I * p13 * ei_m;
        case 1911: return I * p13 * ei_m;
        // group (ii) and mirror
        case 606: return -2.0 * I * ob * p12;
        case 608: return -I * ob * p13;
        case 610: return -I * ob * p32;
        case 613: return -I * oa * p02 + s.g01 * p12;
        case 616: return -I * p02 * ei_m + s.g01 * p32;
        case 618: return s.g01 * p22;
        case 1818: return 2.0 * I * ob * p12d;
        case 1808: return I * p02d * ei_p + s.g01 * p32d;
        case 1816: return I * ob * p13d;
        case 1814: return I * ob * p32d;
        case 1813: return I * oa * p02d + s.g01 * p12d;
        // group (iii) and mirror
        case 708: return -I * p12 * ei_p;
        case 709: return -I * p02 * ei_p;
        case 1716: return I * p12d * ei_m;
        case 1715: return I * p02d * ei_m;
        // group (iv) and mirror
        case 809: return -I * p13 * ei_p;
        case 810: return I * ob * (p22 - p33);
        case 811: return I * ob * p32d;
        case 812: return -I * ob * p32d;
        case 813: return -I * oa * p03 + I * p01d * ei_p + s.g01 * p13;
        case 816: return I * p03d * ei_p - I * p03 * ei_m + s.g01 * p33 + s.g32 * p22;
        case 803: return s.r2 * I * p12;
        case 1615: return I * p13d * ei_m;
        case 1614: return -I * ob * (p22 - p33);
        case 1613: return I * oa * p03d - I * p01 * ei_m + s.g01 * p13d;
        case 1612: return I * ob * p32;
        case 1611: return -I * ob * p32;
        case 1604: return -s.r2 * I * p12d;
        // group (v) and mirror
        case 909: return -2.0 * I * p03 * ei_p;
        case 910: return I * p32 * ei_p;
        case 915: return s.g32 * p22;
        case 903: return s.r2 * I * p02;
        case 1515: return 2.0 * I * p03d * ei_m;
        case 1514: return -I * p32d * ei_m;
        case 1504: return -s.r2 * I * p02d;
        // group (vi) and mirror
        case 1010: return -2.0 * I * p32 * es_p;
        case 1011: return I * (ob * p13d - p02 * ei_m) + s.g03 * p32;
        case 1013: return -I * ob * p13d;
        case 1014: return I * ob * p12d - I * ob * p12 + s.g03 * p22;
        case 1414: return 2.0 * I * p32d * es_m;
        case 1413: return I * ob * p13;
        case 1411: return -I * (ob * p13 - p02d * ei_p) + s.g03 * p32d;
        // groups (vii)-(ix)
        case 1111:
            return I * p32d * es_p - I * p32 * es_m + I * p03d * ei_p - I * p03 * ei_m + s.g32 * p22 +
                   s.g03 * p33;
        case 1211: return I * p32 * es_m - I * p32d * es_p - s.g32 * p22;
        case 1212:
            return I * ob * p12d - I * ob * p12 - I * p32 * es_m + I * p32d * es_p + s.g2 * p22;
        case 1312: return -I * ob * p12d + I * ob * p12 - s.g12 * p22;
        case 1313:
            return I * oa * (p01d - p01) + I * ob * (p12d - p12) + s.g01 * p11 + s.g12 * p22;
        default:
            throw std::logic_error("diffusion_entry: unknown entry (" + std::to_string(i) + "," +
                                   std::to_string(j) + ")");
    }
}

const std::vector<DiagChannel>& diagonal_channels() {
    static const std::vector<DiagChannel> table = {
        {5, 1}, {19, 2}, {6, 3}, {18, 4}, {9, 5}, {15, 6}, {10, 7}, {14, 8}, {13, 9}, {12, 10}, {11, 11},
    };
    return table;
}

const std::vector<PairChannel>& pair_channels() {
    static const std::vector<PairChannel> table = {
        {5, 19, 12, 13},   {5, 6, 14, 15},    {5, 7, 16, 17},    {5, 8, 18, 19},    {5, 9, 20, 21},
        {5, 14, 22, 23},   {5, 13, 24, 25},   {5, 11, 26, 27},   {19, 18, 28, 29},  {19, 17, 30, 31},
        {19, 16, 32, 33},  {19, 15, 34, 35},  {19, 10, 36, 37},  {19, 13, 38, 39},  {19, 11, 40, 41},
        {6, 18, 42, 43},   {6, 8, 44, 45},    {6, 16, 46, 47},   {6, 10, 48, 49},   {6, 13, 50, 51},
        {18, 8, 52, 53},   {18, 16, 54, 55},  {18, 14, 56, 57},  {18, 13, 58, 59},  {7, 8, 60, 61},
        {7, 9, 62, 63},    {17, 16, 64, 65},  {17, 15, 66, 67},  {8, 16, 68, 69},   {8, 9, 70, 71},
        {8, 10, 72, 73},   {8, 13, 74, 75},   {8, 12, 76, 77},   {8, 11, 78, 79},   {8, 3, 80, 81},
        {16, 15, 82, 83},  {16, 14, 84, 85},  {16, 13, 86, 87},  {16, 12, 88, 89},  {16, 11, 90, 91},
        {16, 4, 92, 93},   {9, 15, 94, 95},   {9, 10, 96, 97},   {9, 3, 98, 99},    {15, 14, 100, 101},
        {15, 4, 102, 103}, {10, 14, 104, 105}, {10, 13, 106, 107}, {10, 11, 108, 109}, {14, 13, 110, 111},
        {14, 11, 112, 113}, {13, 12, 114, 115}, {12, 11, 116, 117},
    };
    return table;
}

std::array<Complex, 20> noise_vector(const CellState& c, const ScaledScheme& s, const double* xi) {
    std::array<Complex, 20> f{};
    for (const auto& ch : diagonal_channels()) {
        const Complex amp = std::sqrt(diffusion_entry(ch.var, ch.var, c, s));
        f[ch.var] += amp * xi[ch.xi - 1];
    }
    for (const auto& ch : pair_channels()) {
        const Complex amp = std::sqrt(0.5 * diffusion_entry(ch.owner, ch.partner, c, s));
        const double xr = xi[ch.xi_re - 1], xim = xi[ch.xi_im - 1];
        f[ch.owner] += amp * Complex(xr, xim);
        f[ch.partner] += amp * Complex(xr, -xim);
    }
    return f;
}

// ----------------------------------------------------------------- Einstein

namespace {

struct LevelPair { int bra, ket; };  // sigma_{bra,ket} = |bra><ket|

LevelPair levels_of(int idx) {
    switch (idx) {
        case v_p01: return {0, 1};
        case v_p12: return {1, 2};
        case v_p02: return {0, 2};
        case v_p13: return {1, 3};
        case v_p03: return {0, 3};
        case v_p32: return {3, 2};
        case v_p33: return {3, 3};
        case v_p22: return {2, 2};
        case v_p11: return {1, 1};
        case v_p32d: return {2, 3};
        case v_p03d: return {3, 0};
        case v_p13d: return {3, 1};
        case v_p02d: return {2, 0};
        case v_p12d: return {2, 1};
        case v_p01d: return {1, 0};
        default: throw std::logic_error("levels_of: not an atomic variable");
    }
}

// -1 marks sigma_00 = 1 - p11 - p22 - p33
int index_of_levels(int a, int b) {
    if (a == 0 && b == 0) return -1;
    for (int idx = 5; idx <= 19; ++idx) {
        const LevelPair lp = levels_of(idx);
        if (lp.bra == a && lp.ket == b) return idx;
    }
    throw std::logic_error("index_of_levels: unreachable");
}

Complex eval_symbol(int idx, const CellState& c) {
    if (idx == 0) return 1.0;  // identity
    if (idx == -1) return 1.0 - c.a[sp11] - c.a[sp22] - c.a[sp33];
    return var_value(c, idx);
}

// [sigma_ab, sigma_cd] = delta_bc sigma_ad - delta_da sigma_cb
Complex commutator_value(int lhs, int rhs, const CellState& c) {
    if (lhs <= 0 || rhs <= 0) return 0.0;  // identity / sigma00-expansion terms commute enough:
    const LevelPair l = levels_of(lhs), r = levels_of(rhs);
    Complex v = 0.0;
    if (l.ket == r.bra) v += eval_symbol(index_of_levels(l.bra, r.ket), c);
    if (r.ket == l.bra) v -= eval_symbol(index_of_levels(r.bra, l.ket), c);
    return v;
}

struct DriftTerm {
    Complex coeff;
    int sym;    // 0 identity, -1 sigma00, 5..19 atomic
    int field;  // 0 none, else field variable index 1..4
};

// drift term tables for the entries under check (sigma00 expanded explicitly)
std::vector<DriftTerm> drift_terms(int var, const ScaledScheme& s) {
    const Complex ioa = I * s.oa, iob = I * s.ob;
    switch (var) {
        case v_p11:
            return {{-s.g01, v_p11, 0}, {s.g12, v_p22, 0},   {ioa, v_p01d, 0},
                    {-ioa, v_p01, 0},   {-iob, v_p12d, 0},   {iob, v_p12, 0}};
        case v_p13:
            return {{Complex(-0.5 * (s.g01 + s.g03), -s.d1), v_p13, 0},
                    {-ioa, v_p03, 0},
                    {-iob, v_p32d, 0},
                    {I, v_p12, v_es_m},
                    {I, v_p01d, v_ei_p}};
        case v_p01:
            return {{Complex(-0.5 * s.g01, s.d1), v_p01, 0},
                    {ioa, 0, 0},          // i Omega_a * 1
                    {-2.0 * ioa, v_p11, 0},
                    {-ioa, v_p22, 0},
                    {-ioa, v_p33, 0},
                    {iob, v_p02, 0},
                    {-I, v_p13d, v_ei_p}};
        default:
            throw std::logic_error("drift_terms: entry not tabulated");
    }
}

// normal order puts larger canonical indices to the left
bool in_normal_order(int left, int right) { return left >= right; }

Complex field_factor(int field, const CellState& c) { return field == 0 ? Complex(1.0) : var_value(c, field); }

Complex einstein_entry(int x, int y, const Complex& quantum_part, const CellState& c, const ScaledScheme& s) {
    Complex v = quantum_part;
    for (const DriftTerm& t : drift_terms(y, s)) {  // x^ A_y with x^ on the left
        if (t.sym <= 0) continue;
        if (!in_normal_order(x, t.sym)) v += t.coeff * field_factor(t.field, c) * commutator_value(x, t.sym, c);
    }
    for (const DriftTerm& t : drift_terms(x, s)) {  // A_x y^ with y^ on the right
        if (t.sym <= 0) continue;
        if (!in_normal_order(t.sym, y)) v += t.coeff * field_factor(t.field, c) * commutator_value(t.sym, y, c);
    }
    return v;
}

}  // namespace

EinsteinReport einstein_check(const CellState& c, const ScaledScheme& s) {
    EinsteinReport report;
    auto push = [&](const std::string& name, Complex einstein, Complex table) {
        const double scale = std::max({std::abs(einstein), std::abs(table), 1e-30});
        const double rel = std::abs(einstein - table) / scale;
        report.entries.push_back({name, einstein, table, rel});
        report.max_rel_error = std::max(report.max_rel_error, rel);
    };
    // quantum (normally ordered) parts obtained from the generalized Einstein
    // relation with the single-atom operator algebra
    const Complex q_13_8 = s.g01 * c.a[sp13];
    const Complex q_13_13 = s.g01 * c.a[sp11] + s.g12 * c.a[sp22];
    const Complex q_5_5 = 0.0;
    push("D(13,8)", einstein_entry(v_p11, v_p13, q_13_8, c, s), diffusion_entry(8, 13, c, s));
    push("D(13,13)", einstein_entry(v_p11, v_p11, q_13_13, c, s), diffusion_entry(13, 13, c, s));
    push("D(5,5)", einstein_entry(v_p01, v_p01, q_5_5, c, s), diffusion_entry(5, 5, c, s));
    return report;
}

EinsteinReport einstein_check_random(std::uint64_t seed, int n_states) {
    Rng rng(seed);
    CascadeScheme scheme;
    const ScaledScheme s = scale_scheme(scheme, scheme.omega_a);
    EinsteinReport worst;
    for (int k = 0; k < n_states; ++k) {
        CellState c;
        for (int i = 0; i < 15; ++i) c.a[i] = Complex(rng.normal(), rng.normal());
        c.es_p = Complex(rng.normal(), rng.normal());
        c.es_m = Complex(rng.normal(), rng.normal());
        c.ei_p = Complex(rng.normal(), rng.normal());
        c.ei_m = Complex(rng.normal(), rng.normal());
        EinsteinReport r = einstein_check(c, s);
        if (r.max_rel_error >= worst.max_rel_error) worst = std::move(r);
    }
    return worst;
}

// ----------------------------------------------------------------- shooting

ShootingResult shooting_solve(const std::function<VecXc(const VecXc&)>& residual, const VecXc& guess1,
                              const VecXc& guess2, double tol, int max_iter) {
    VecXc x1 = guess1, x2 = guess2;
    VecXc f1 = residual(x1);
    if (f1.cwiseAbs().maxCoeff() < tol) return {x1, f1, 1};
    VecXc f2 = residual(x2);
    for (int it = 2; it <= max_iter; ++it) {
        if (f2.cwiseAbs().maxCoeff() < tol) return {x2, f2, it};
        VecXc xn = x2;
        for (int i = 0; i < x2.size(); ++i) {
            const Complex df = f2[i] - f1[i];
            const Complex dx = x2[i] - x1[i];
            if (std::abs(dx) < 1e-15) {
                if (std::abs(f2[i]) > tol)
                    throw ShootingFailure("shooting_solve: secant stagnated with residual above tolerance", f2);
                continue;
            }
            if (std::abs(df) > 0.0) xn[i] = x2[i] - f2[i] * dx / df;
        }
        x1 = std::move(x2);
        f1 = std::move(f2);
        x2 = std::move(xn);
        f2 = residual(x2);
    }
    if (f2.cwiseAbs().maxCoeff() < tol) return {x2, f2, max_iter};
    throw ShootingFailure("shooting_solve: no convergence within max_iter", f2);
}

// ----------------------------------------------------------------- ensemble

namespace {

struct RealizationRecord {
    VecXc is;    // E_s^- E_s^+ at z = 0 per time node
    VecXc ii;    // E_i^- E_i^+ at z = L
    VecXc p11, p22, p33;  // z-averaged populations
    bool diverged = false;
};

struct Accumulators {
    std::int64_t n_accepted = 0;
    std::int64_t n_divergent = 0;
    VecXc sum_is, sum_ii, sum_p11, sum_p22, sum_p33;
    VecX sum_is_re2, sum_is_im2, sum_ii_re2, sum_ii_im2, sum_p11_im2;
    MatXc sum_g;
    MatX sum_g_re2;

    explicit Accumulators(int mt)
        : sum_is(VecXc::Zero(mt)), sum_ii(VecXc::Zero(mt)), sum_p11(VecXc::Zero(mt)),
          sum_p22(VecXc::Zero(mt)), sum_p33(VecXc::Zero(mt)), sum_is_re2(VecX::Zero(mt)),
          sum_is_im2(VecX::Zero(mt)), sum_ii_re2(VecX::Zero(mt)), sum_ii_im2(VecX::Zero(mt)),
          sum_p11_im2(VecX::Zero(mt)), sum_g(MatXc::Zero(mt, mt)), sum_g_re2(MatX::Zero(mt, mt)) {}

    void add(const RealizationRecord& r) {
        if (r.diverged) {
            ++n_divergent;
            return;
        }
        ++n_accepted;
        sum_is += r.is;
        sum_ii += r.ii;
        sum_p11 += r.p11;
        sum_p22 += r.p22;
        sum_p33 += r.p33;
        sum_is_re2 += r.is.real().cwiseAbs2();
        sum_is_im2 += r.is.imag().cwiseAbs2();
        sum_ii_re2 += r.ii.real().cwiseAbs2();
        sum_ii_im2 += r.ii.imag().cwiseAbs2();
        sum_p11_im2 += r.p11.imag().cwiseAbs2();
        const MatXc g = r.is * r.ii.transpose();
        sum_g += g;
        sum_g_re2 += g.real().cwiseAbs2();
    }

    void merge(const Accumulators& o) {
        n_accepted += o.n_accepted;
        n_divergent += o.n_divergent;
        sum_is += o.sum_is;
        sum_ii += o.sum_ii;
        sum_p11 += o.sum_p11;
        sum_p22 += o.sum_p22;
        sum_p33 += o.sum_p33;
        sum_is_re2 += o.sum_is_re2;
        sum_is_im2 += o.sum_is_im2;
        sum_ii_re2 += o.sum_ii_re2;
        sum_ii_im2 += o.sum_ii_im2;
        sum_p11_im2 += o.sum_p11_im2;
        sum_g += o.sum_g;
        sum_g_re2 += o.sum_g_re2;
    }
};

// one positive-P trajectory on the (z,t) lattice
RealizationRecord run_realization(const CascadeScheme& scheme, const ScaledUnits& units, int m_t,
                                  double dt, int m_z, double dz, std::uint64_t master_seed, int r) {
    Rng rng = Rng::for_realization(master_seed, static_cast<std::uint64_t>(r));
    const double noise_cell = units.cooperation_number * dt * dz;
    const double inv_sqrt_cell = 1.0 / std::sqrt(noise_cell);
    const double corr_scale = 1.0 / noise_cell;

    std::vector<CellState> cells(m_z);
    std::vector<Complex> f3(m_z), f4(m_z);
    std::vector<std::array<double, kNoiseCount>> draws(m_z);

    RealizationRecord rec;
    rec.is.resize(m_t);
    rec.ii.resize(m_t);
    rec.p11.resize(m_t);
    rec.p22.resize(m_t);
    rec.p33.resize(m_t);

    VecXc prev_guess = VecXc::Zero(2);
    const double cap = 1e6;

    for (int n = 0; n < m_t; ++n) {
        const double t_ns = n * dt * units.tc_ns;
        const double oa_now = (t_ns <= scheme.pump_a_duration_ns) ? scheme.omega_a : 0.0;
        const ScaledScheme s = scale_scheme(scheme, oa_now);

        for (int k = 0; k < m_z; ++k) {
            for (int q = 0; q < kNoiseCount; ++q) draws[k][q] = rng.normal();
            // field noises depend on the atomic state only; they are partner
            // channels, so they carry the conjugated unit-normal pair
            const double* xi = draws[k].data();
            const Complex a83 = std::sqrt(0.5 * diffusion_entry(8, 3, cells[k], s));
            const Complex a93 = std::sqrt(0.5 * diffusion_entry(9, 3, cells[k], s));
            const Complex a164 = std::sqrt(0.5 * diffusion_entry(16, 4, cells[k], s));
            const Complex a154 = std::sqrt(0.5 * diffusion_entry(15, 4, cells[k], s));
            f3[k] = (a83 * Complex(xi[79], -xi[80]) + a93 * Complex(xi[97], -xi[98])) * inv_sqrt_cell;
            f4[k] = (a164 * Complex(xi[91], -xi[92]) + a154 * Complex(xi[101], -xi[102])) * inv_sqrt_cell;
        }

        // field slice at this time: idler integrates forward from z=0; the
        // signal boundary values at z=0 are found by shooting onto the vacuum
        // condition at z=L
        auto integrate_fields = [&](const VecXc& guess) -> VecXc {
            cells[0].es_p = guess[0];
            cells[0].es_m = guess[1];
            cells[0].ei_p = 0.0;
            cells[0].ei_m = 0.0;
            for (int k = 0; k + 1 < m_z; ++k) {
                const Complex src_p32 = 0.5 * (cells[k].a[sp32] + cells[k + 1].a[sp32]);
                const Complex src_p32d = 0.5 * (cells[k].a[sp32d] + cells[k + 1].a[sp32d]);
                const Complex src_p03 = 0.5 * (cells[k].a[sp03] + cells[k + 1].a[sp03]);
                const Complex src_p03d = 0.5 * (cells[k].a[sp03d] + cells[k + 1].a[sp03d]);
                cells[k + 1].es_p = cells[k].es_p + dz * (-I * s.r2 * src_p32 - f3[k]);
                cells[k + 1].es_m = cells[k].es_m + dz * (I * s.r2 * src_p32d - f4[k]);
                cells[k + 1].ei_p = cells[k].ei_p + dz * (I * src_p03);
                cells[k + 1].ei_m = cells[k].ei_m + dz * (-I * src_p03d);
            }
            VecXc res(2);
            res[0] = cells[m_z - 1].es_p;
            res[1] = cells[m_z - 1].es_m;
            return res;
        };
        VecXc second = prev_guess;
        if ((second - VecXc::Zero(2)).norm() < 1e-30) second = VecXc::Constant(2, Complex(1e-12, 0.0));
        const ShootingResult shot = shooting_solve(integrate_fields, VecXc::Zero(2), second, 1e-10, 100);
        (void)integrate_fields(shot.guess);
        prev_guess = shot.guess;

        rec.is[n] = cells[0].es_m * cells[0].es_p;
        rec.ii[n] = cells[m_z - 1].ei_m * cells[m_z - 1].ei_p;
        Complex m11 = 0.0, m22 = 0.0, m33 = 0.0;
        for (int k = 0; k < m_z; ++k) {
            m11 += cells[k].a[sp11];
            m22 += cells[k].a[sp22];
            m33 += cells[k].a[sp33];
        }
        rec.p11[n] = m11 / static_cast<double>(m_z);
        rec.p22[n] = m22 / static_cast<double>(m_z);
        rec.p33[n] = m33 / static_cast<double>(m_z);

        // Atomic midpoint update with the noise amplitudes following the
        // midpoint state. A fixed iteration count is used: sqrt(D) has an
        // unbounded derivative where a diffusion entry crosses zero, so a
        // strict fixed-point tolerance is unreachable there; four sweeps give
        // the standard semi-implicit scheme.
        for (int k = 0; k < m_z; ++k) {
            CellState mid = cells[k];
            for (int it = 0; it < 4; ++it) {
                const auto f = noise_vector(mid, s, draws[k].data());
                Eigen::Matrix<Complex, 15, 1> rhs =
                    ito_drift(mid, s) + corr_scale * stratonovich_correction(mid, s);
                for (int v = 5; v <= 19; ++v) rhs[v - 5] += f[v] * inv_sqrt_cell;
                mid.a = cells[k].a + 0.5 * dt * rhs;
            }
            cells[k].a = 2.0 * mid.a - cells[k].a;
            if (cells[k].a.cwiseAbs().maxCoeff() > cap || std::abs(cells[k].es_p) > cap ||
                std::abs(cells[k].ei_p) > cap) {
                rec.diverged = true;
                return rec;
            }
        }
    }
    return rec;
}

void save_checkpoint(const std::string& path, const Accumulators& acc, std::int64_t n_done, int m_t) {
    nlohmann::json j;
    j["format"] = "qens-cascade-checkpoint-v1";
    j["n_done"] = n_done;
    j["n_accepted"] = acc.n_accepted;
    j["n_divergent"] = acc.n_divergent;
    j["m_t"] = m_t;
    auto dump_vc = [&](const char* name, const VecXc& v) {
        std::vector<double> re(v.size()), im(v.size());
        for (int i = 0; i < v.size(); ++i) re[i] = v[i].real(), im[i] = v[i].imag();
        j[std::string(name) + "_re"] = re;
        j[std::string(name) + "_im"] = im;
    };
    auto dump_v = [&](const char* name, const VecX& v) {
        j[name] = std::vector<double>(v.data(), v.data() + v.size());
    };
    dump_vc("sum_is", acc.sum_is);
    dump_vc("sum_ii", acc.sum_ii);
    dump_vc("sum_p11", acc.sum_p11);
    dump_vc("sum_p22", acc.sum_p22);
    dump_vc("sum_p33", acc.sum_p33);
    dump_v("sum_is_re2", acc.sum_is_re2);
    dump_v("sum_is_im2", acc.sum_is_im2);
    dump_v("sum_ii_re2", acc.sum_ii_re2);
    dump_v("sum_ii_im2", acc.sum_ii_im2);
    dump_v("sum_p11_im2", acc.sum_p11_im2);
    {
        std::vector<double> re(acc.sum_g.size()), im(acc.sum_g.size()), re2(acc.sum_g_re2.size());
        for (int i = 0; i < acc.sum_g.size(); ++i) {
            re[i] = acc.sum_g.data()[i].real();
            im[i] = acc.sum_g.data()[i].imag();
            re2[i] = acc.sum_g_re2.data()[i];
        }
        j["sum_g_re"] = re;
        j["sum_g_im"] = im;
        j["sum_g_re2"] = re2;
    }
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp);
        out << j.dump();
    }
    std::rename(tmp.c_str(), path.c_str());
}

bool load_checkpoint(const std::string& path, Accumulators& acc, std::int64_t& n_done, int m_t) {
    std::ifstream in(path);
    if (!in.good()) return false;
    nlohmann::json j;
    in >> j;
    if (j.value("format", "") != std::string("qens-cascade-checkpoint-v1")) return false;
    if (j.value("m_t", -1) != m_t) return false;
    n_done = j["n_done"].get<std::int64_t>();
    acc.n_accepted = j["n_accepted"].get<std::int64_t>();
    acc.n_divergent = j["n_divergent"].get<std::int64_t>();
    auto load_vc = [&](const char* name, VecXc& v) {
        const auto re = j[std::string(name) + "_re"].get<std::vector<double>>();
        const auto im = j[std::string(name) + "_im"].get<std::vector<double>>();
        for (std::size_t i = 0; i < re.size(); ++i) v[static_cast<int>(i)] = Complex(re[i], im[i]);
    };
    auto load_v = [&](const char* name, VecX& v) {
        const auto d = j[name].get<std::vector<double>>();
        for (std::size_t i = 0; i < d.size(); ++i) v[static_cast<int>(i)] = d[i];
    };
    load_vc("sum_is", acc.sum_is);
    load_vc("sum_ii", acc.sum_ii);
    load_vc("sum_p11", acc.sum_p11);
    load_vc("sum_p22", acc.sum_p22);
    load_vc("sum_p33", acc.sum_p33);
    load_v("sum_is_re2", acc.sum_is_re2);
    load_v("sum_is_im2", acc.sum_is_im2);
    load_v("sum_ii_re2", acc.sum_ii_re2);
    load_v("sum_ii_im2", acc.sum_ii_im2);
    load_v("sum_p11_im2", acc.sum_p11_im2);
    const auto re = j["sum_g_re"].get<std::vector<double>>();
    const auto im = j["sum_g_im"].get<std::vector<double>>();
    const auto re2 = j["sum_g_re2"].get<std::vector<double>>();
    for (std::size_t i = 0; i < re.size(); ++i) {
        acc.sum_g.data()[i] = Complex(re[i], im[i]);
        acc.sum_g_re2.data()[i] = re2[i];
    }
    return true;
}

}  // namespace

CascadeObservables simulate_ensemble(const CascadeScheme& scheme, const SimGrid& grid,
                                     const sde::EnsembleConfig& ensemble, const std::string& checkpoint_path) {
    const ScaledUnits units = scaled_units(scheme);
    const int m_t = grid.m_t;
    const double dt = grid.dt_tc;
    const int m_z = std::max(2, static_cast<int>(std::lround(units.length_tc / grid.dz_tc)) + 1);
    const double dz = units.length_tc / (m_z - 1);

    Accumulators total(m_t);
    std::int64_t n_done = 0;
    if (!checkpoint_path.empty()) load_checkpoint(checkpoint_path, total, n_done, m_t);

    const int block = 1024;
    const int r_total = ensemble.n_realizations;
    while (n_done < r_total) {
        const int r_lo = static_cast<int>(n_done);
        const int r_hi = std::min(r_total, r_lo + block);
        const int n_block = r_hi - r_lo;
        const int n_chunks = (n_block + kRealizationChunk - 1) / kRealizationChunk;
        std::vector<Accumulators> partial(n_chunks, Accumulators(m_t));
        parallel_for_realizations(n_block, [&](int i) {
            const RealizationRecord rec = run_realization(scheme, units, m_t, dt, m_z, dz,
                                                          ensemble.master_seed, r_lo + i);
            partial[i / kRealizationChunk].add(rec);
        });
        for (const auto& p : partial) total.merge(p);
        n_done = r_hi;
        if (!checkpoint_path.empty()) save_checkpoint(checkpoint_path, total, n_done, m_t);
    }

    if (total.n_accepted == 0) throw std::runtime_error("simulate_ensemble: all realizations diverged");
    if (total.n_divergent * 100 > total.n_accepted + total.n_divergent)
        throw std::runtime_error("simulate_ensemble: over 1% of trajectories diverged; reduce dt");

    const double n = static_cast<double>(total.n_accepted);
    CascadeObservables out;
    out.n_divergent = total.n_divergent;
    out.n_realizations = total.n_accepted;
    out.t_ns.resize(m_t);
    for (int k = 0; k < m_t; ++k) out.t_ns[k] = k * dt * units.tc_ns;
    auto se_of = [&](const VecX& sum2, const VecX& mean) {
        VecX se(mean.size());
        for (int i = 0; i < mean.size(); ++i) {
            const double var = std::max(0.0, sum2[i] / n - mean[i] * mean[i]);
            se[i] = std::sqrt(var / n);
        }
        return se;
    };
    const VecXc mean_is = total.sum_is / n;
    const VecXc mean_ii = total.sum_ii / n;
    out.i_signal = mean_is.real();
    out.i_signal_im = mean_is.imag();
    out.i_idler = mean_ii.real();
    out.i_idler_im = mean_ii.imag();
    out.i_signal_se = se_of(total.sum_is_re2, out.i_signal);
    out.i_signal_im_se = se_of(total.sum_is_im2, out.i_signal_im);
    out.i_idler_se = se_of(total.sum_ii_re2, out.i_idler);
    out.i_idler_im_se = se_of(total.sum_ii_im2, out.i_idler_im);
    const VecXc mean_p11 = total.sum_p11 / n;
    out.p11_re = mean_p11.real();
    out.p11_im = mean_p11.imag();
    out.p11_im_se = se_of(total.sum_p11_im2, out.p11_im);
    out.p22_re = (total.sum_p22 / n).real();
    out.p33_re = (total.sum_p33 / n).real();
    out.g_re = (total.sum_g / n).real();
    out.g_im = (total.sum_g / n).imag();
    out.g_se.resize(m_t, m_t);
    for (int i = 0; i < m_t; ++i)
        for (int j = 0; j < m_t; ++j) {
            const double var = std::max(0.0, total.sum_g_re2(i, j) / n - out.g_re(i, j) * out.g_re(i, j));
            out.g_se(i, j) = std::sqrt(var / n);
        }
    return out;
}

ExponentialFit fit_superradiant_time(const VecX& t, const VecX& g, double tail_fraction) {
    if (t.size() != g.size() || t.size() < 3) throw std::invalid_argument("fit: need matching curves");
    int peak = 0;
    g.maxCoeff(&peak);
    int last = peak;
    const double floor_value = tail_fraction * g[peak];
    while (last + 1 < g.size() && g[last + 1] > floor_value) ++last;
    // a curve that drops straight from above the floor to <= 0 never decayed
    // through the fit window; that is noise, not a decay to fit
    if (last + 1 < g.size() && g[last + 1] <= 0.0)
        throw std::domain_error("fit: non-positive curve value inside the fit range");
    if (last - peak + 1 < 3) throw std::domain_error("fit: fewer than 3 usable points after the peak");
    const int m = last - peak + 1;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = peak; i <= last; ++i) {
        if (g[i] <= 0.0) throw std::domain_error("fit: non-positive curve value inside the fit range");
        const double x = t[i], y = std::log(g[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double denom = m * sxx - sx * sx;
    const double slope = (m * sxy - sx * sy) / denom;
    const double intercept = (sy - slope * sx) / m;
    double ss_res = 0.0;
    for (int i = peak; i <= last; ++i) {
        const double r = std::log(g[i]) - (intercept + slope * t[i]);
        ss_res += r * r;
    }
    const double se_slope = std::sqrt(std::max(ss_res / std::max(1, m - 2), 0.0) / (sxx - sx * sx / m));
    const double b_lo = slope - 1.96 * se_slope;
    const double b_hi = slope + 1.96 * se_slope;
    ExponentialFit fit;
    fit.t_f = -1.0 / slope;
    fit.ci_low = b_hi < 0.0 ? -1.0 / b_hi : std::numeric_limits<double>::infinity();
    fit.ci_high = b_lo < 0.0 ? -1.0 / b_lo : std::numeric_limits<double>::infinity();
    fit.n_points = m;
    return fit;
}

}  // namespace qens::cascade_sim
