#include "qens/few_atom.hpp"

#include <cmath>
#include <stdexcept>

namespace qens::few_atom {

AtomGeometry::AtomGeometry(std::vector<Eigen::Vector3d> pos, Eigen::Vector3d pump, Eigen::Vector3d dip)
    : positions(std::move(pos)), pump_direction(pump.normalized()), dipole(dip.normalized()) {
    const int n = static_cast<int>(positions.size());
    if (n < 2 || n > 4) throw std::invalid_argument("AtomGeometry: 2 <= N <= 4");
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if ((positions[i] - positions[j]).norm() < 1e-12)
                throw std::invalid_argument("AtomGeometry: positions must be pairwise distinct");
}

AtomGeometry AtomGeometry::square(double side) {
    return AtomGeometry({{0, 0, 0}, {side, 0, 0}, {0, side, 0}, {side, side, 0}}, {0, 0, 1}, {0, 0, 1});
}

AtomGeometry AtomGeometry::line(int n, double spacing) {
    std::vector<Eigen::Vector3d> pos;
    for (int i = 0; i < n; ++i) pos.push_back({i * spacing, 0, 0});
    return AtomGeometry(std::move(pos), {0, 0, 1}, {0, 0, 1});
}

namespace {

int binom(int n, int k) {
    if (k < 0 || k > n) return 0;
    int r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

std::vector<std::vector<int>> combinations(int n, int k) {
    std::vector<std::vector<int>> out;
    std::vector<int> c(k);
    for (int i = 0; i < k; ++i) c[i] = i;
    for (;;) {
        out.push_back(c);
        int i = k - 1;
        while (i >= 0 && c[i] == n - k + i) --i;
        if (i < 0) break;
        ++c[i];
        for (int j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
    }
    return out;
}

Complex pump_phase(const AtomGeometry& g, const std::vector<int>& atoms) {
    double kr = 0.0;
    for (int mu : atoms) kr += 2.0 * M_PI * g.pump_direction.dot(g.positions[mu]);
    return std::exp(I * kr);
}

int basis_index(const std::vector<int>& atoms) {
    int idx = 0;
    for (int mu : atoms) idx |= 1 << mu;
    return idx;
}

}  // namespace

MatXc build_basis(const AtomGeometry& g, int n_exc) {
    const int n = g.n();
    if (n_exc < 0 || n_exc > n) throw std::domain_error("build_basis: excitation number out of range");
    const int dim = 1 << n;
    const int k = binom(n, n_exc);
    const auto combos = combinations(n, n_exc);
    MatXc basis = MatXc::Zero(dim, k);
    const double inv_sqrt_k = 1.0 / std::sqrt(static_cast<double>(k));
    for (int j = 0; j < k; ++j) basis(basis_index(combos[j]), 0) = inv_sqrt_k * pump_phase(g, combos[j]);
    if (k == 1) return basis;
    // non-symmetric states: (1 + 1/sqrt(K))/(K-1) on the first K-1 slots with
    // a -1 kick at slot m, and -1/sqrt(K) on the last combination
    const double a = (1.0 + inv_sqrt_k) / (k - 1);
    for (int m = 1; m < k; ++m) {
        for (int j = 0; j + 1 < k; ++j)
            basis(basis_index(combos[j]), m) = (a - (j == m - 1 ? 1.0 : 0.0)) * pump_phase(g, combos[j]);
        basis(basis_index(combos[k - 1]), m) = -inv_sqrt_k * pump_phase(g, combos[k - 1]);
    }
    return basis;
}

namespace {

MatXc atom_operator(int n, int mu, const Eigen::Matrix2cd& op) {
    const int dim = 1 << n;
    MatXc out = MatXc::Zero(dim, dim);
    for (int col = 0; col < dim; ++col) {
        const int bit = (col >> mu) & 1;
        for (int rbit = 0; rbit < 2; ++rbit) {
            const Complex v = op(rbit, bit);
            if (v == Complex(0)) continue;
            const int row = (col & ~(1 << mu)) | (rbit << mu);
            out(row, col) += v;
        }
    }
    return out;
}

}  // namespace

MatXc liouvillian(const AtomGeometry& g, double omega_a, double delta1) {
    const int n = g.n();
    const int dim = 1 << n;
    Eigen::Matrix2cd lower = Eigen::Matrix2cd::Zero();  // |0><1|
    lower(0, 1) = 1.0;
    Eigen::Matrix2cd raise = lower.adjoint().eval();
    Eigen::Matrix2cd excited = Eigen::Matrix2cd::Zero();
    excited(1, 1) = 1.0;

    std::vector<MatXc> sm(n), sp(n);
    for (int mu = 0; mu < n; ++mu) {
        sm[mu] = atom_operator(n, mu, lower);
        sp[mu] = atom_operator(n, mu, raise);
    }

    MatXc h = MatXc::Zero(dim, dim);
    for (int mu = 0; mu < n; ++mu) {
        const Complex ph = std::exp(I * 2.0 * M_PI * g.pump_direction.dot(g.positions[mu]));
        h += -delta1 * atom_operator(n, mu, excited);
        h += -0.5 * omega_a * (ph * sp[mu] + std::conj(ph) * sm[mu]);
    }
    // gamma = 1 units; pairwise rates gamma F_uv, coherent shifts -gamma G_uv
    MatX fmat = MatX::Identity(n, n);
    for (int mu = 0; mu < n; ++mu)
        for (int nu = 0; nu < n; ++nu) {
            if (mu == nu) continue;
            const Eigen::Vector3d r = g.positions[mu] - g.positions[nu];
            const double xi = 2.0 * M_PI * r.norm();
            const double c = g.dipole.dot(r.normalized());
            const auto [f, gg] = dipole_kernels(xi, c);
            fmat(mu, nu) = f;
            h += -gg * sp[mu] * sm[nu];
        }

    const MatXc id = MatXc::Identity(dim, dim);
    auto kron = [](const MatXc& a, const MatXc& b) {
        MatXc out(a.rows() * b.rows(), a.cols() * b.cols());
        for (int i = 0; i < a.rows(); ++i)
            for (int j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        return out;
    };

    // vec(rho) column-major: vec(A rho B) = (B^T kron A) vec(rho)
    MatXc L = -I * (kron(id, h) - kron(h.transpose(), id));
    for (int mu = 0; mu < n; ++mu)
        for (int nu = 0; nu < n; ++nu) {
            const double rate = fmat(mu, nu);
            const MatXc spm = sp[mu] * sm[nu];
            L += rate * (kron(sp[mu].transpose(), sm[nu]) - 0.5 * kron(id, spm) - 0.5 * kron(spm.transpose(), id));
        }
    return L;
}

namespace {

struct Projectors {
    MatXc p1s, p1ns, p2s, p2ns;
};

Projectors make_projectors(const AtomGeometry& g) {
    const MatXc b1 = build_basis(g, 1);
    const MatXc b2 = build_basis(g, 2);
    Projectors p;
    p.p1s = b1.col(0) * b1.col(0).adjoint();
    p.p2s = b2.col(0) * b2.col(0).adjoint();
    p.p1ns = MatXc::Zero(b1.rows(), b1.rows());
    for (int m = 1; m < b1.cols(); ++m) p.p1ns += b1.col(m) * b1.col(m).adjoint();
    p.p2ns = MatXc::Zero(b2.rows(), b2.rows());
    for (int m = 1; m < b2.cols(); ++m) p.p2ns += b2.col(m) * b2.col(m).adjoint();
    return p;
}

double trace_with(const MatXc& proj, const VecXc& rho_vec, int dim) {
    Complex s = 0.0;
    for (int col = 0; col < dim; ++col)
        for (int row = 0; row < dim; ++row) s += proj(col, row) * rho_vec[row + col * dim];
    return s.real();
}

}  // namespace

PopulationSeries evolve_lindblad(const AtomGeometry& g, double omega_a, double delta1,
                                 double t_end, double dt) {
    if (dt <= 0.0 || t_end <= 0.0) throw std::invalid_argument("evolve_lindblad: dt, t_end must be > 0");
    const int dim = 1 << g.n();
    const MatXc L = liouvillian(g, omega_a, delta1);
    const Projectors proj = make_projectors(g);

    VecXc rho = VecXc::Zero(dim * dim);
    rho[0] = 1.0;  // ground state |0...0>
    const int steps = static_cast<int>(std::ceil(t_end / dt));
    const int stride = std::max(1, steps / 2000);  // ~2000 recorded nodes

    PopulationSeries out;
    std::vector<double> t, p1s, p1ns, p2s, p2ns;
    auto record = [&](double time) {
        t.push_back(time);
        p1s.push_back(trace_with(proj.p1s, rho, dim));
        p1ns.push_back(trace_with(proj.p1ns, rho, dim));
        p2s.push_back(trace_with(proj.p2s, rho, dim));
        p2ns.push_back(trace_with(proj.p2ns, rho, dim));
        double trace = 0.0;
        for (int k = 0; k < dim; ++k) trace += rho[k + k * dim].real();
        out.max_trace_drift = std::max(out.max_trace_drift, std::abs(trace - 1.0));
        double herm = 0.0;
        for (int i = 0; i < dim; ++i)
            for (int j = i + 1; j < dim; ++j)
                herm = std::max(herm, std::abs(rho[i + j * dim] - std::conj(rho[j + i * dim])));
        out.max_hermiticity_error = std::max(out.max_hermiticity_error, herm);
    };
    record(0.0);
    VecXc k1(dim * dim), k2(dim * dim), k3(dim * dim), k4(dim * dim);
    for (int s = 1; s <= steps; ++s) {
        k1 = L * rho;
        k2 = L * (rho + 0.5 * dt * k1);
        k3 = L * (rho + 0.5 * dt * k2);
        k4 = L * (rho + dt * k3);
        rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (s % stride == 0 || s == steps) record(s * dt);
        if (out.max_trace_drift > 1e-6)
            throw std::runtime_error("evolve_lindblad: trace drift exceeds 1e-6; reduce dt");
    }
    const int m = static_cast<int>(t.size());
    out.t = Eigen::Map<VecX>(t.data(), m);
    out.p1s = Eigen::Map<VecX>(p1s.data(), m);
    out.p1ns = Eigen::Map<VecX>(p1ns.data(), m);
    out.p2s = Eigen::Map<VecX>(p2s.data(), m);
    out.p2ns = Eigen::Map<VecX>(p2ns.data(), m);
    out.rho_final = Eigen::Map<MatXc>(rho.data(), dim, dim);
    return out;
}

SteadyPopulations steady_populations(const AtomGeometry& g, double omega_a, double delta1,
                                     double t_max, double dt) {
    const int dim = 1 << g.n();
    const MatXc L = liouvillian(g, omega_a, delta1);
    const Projectors proj = make_projectors(g);
    VecXc rho = VecXc::Zero(dim * dim);
    rho[0] = 1.0;

    const double period = 2.0 * M_PI / std::max(1e-6, std::abs(delta1));
    const int chunk_steps = std::max(1, static_cast<int>(std::round(period / dt)));
    SteadyPopulations s{0, 0, 0, 0, 0, false};
    double prev[4] = {-1, -1, -1, -1};
    VecXc k1(dim * dim), k2(dim * dim), k3(dim * dim), k4(dim * dim);
    int step = 0;
    const int max_steps = static_cast<int>(std::ceil(t_max / dt));
    while (step < max_steps) {
        for (int i = 0; i < chunk_steps && step < max_steps; ++i, ++step) {
            k1 = L * rho;
            k2 = L * (rho + 0.5 * dt * k1);
            k3 = L * (rho + 0.5 * dt * k2);
            k4 = L * (rho + dt * k3);
            rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        const double cur[4] = {trace_with(proj.p1s, rho, dim), trace_with(proj.p1ns, rho, dim),
                               trace_with(proj.p2s, rho, dim), trace_with(proj.p2ns, rho, dim)};
        double change = 0.0;
        for (int i = 0; i < 4; ++i) change = std::max(change, std::abs(cur[i] - prev[i]));
        s.p1s = cur[0];
        s.p1ns = cur[1];
        s.p2s = cur[2];
        s.p2ns = cur[3];
        s.t_reached = step * dt;
        if (change < 1e-6) {
            s.converged = true;
            break;
        }
        for (int i = 0; i < 4; ++i) prev[i] = cur[i];
    }
    return s;
}

}  // namespace qens::few_atom
