#ifndef QENS_FEW_ATOM_HPP
#define QENS_FEW_ATOM_HPP

#include <utility>
#include <vector>

#include "qens/types.hpp"

namespace qens::few_atom {

// Positions in units of the transition wavelength; pump phases use
// k . r = 2 pi (pump_direction . position).
struct AtomGeometry {
    std::vector<Eigen::Vector3d> positions;
    Eigen::Vector3d pump_direction{0, 0, 1};
    Eigen::Vector3d dipole{0, 0, 1};
    AtomGeometry(std::vector<Eigen::Vector3d> pos, Eigen::Vector3d pump, Eigen::Vector3d dip);
    int n() const { return static_cast<int>(positions.size()); }
    static AtomGeometry square(double side_lambda);   // N = 4, xy plane, pump/dipole along z
    static AtomGeometry line(int n, double spacing);  // along x
};

// Lehmberg dipole-dipole kernels; xi = k3 r, c = p_hat . r_hat.
// F -> 1 and G diverges as xi -> 0; F, G -> 0 as xi -> infinity.
template <class Real>
std::pair<Real, Real> dipole_kernels(Real xi, Real cos_angle) {
    if (xi <= Real(0)) throw std::domain_error("dipole_kernels: xi must be > 0");
    if (cos_angle < Real(-1) || cos_angle > Real(1))
        throw std::domain_error("dipole_kernels: cos_angle outside [-1,1]");
    const Real c2 = cos_angle * cos_angle;
    const Real s = std::sin(xi), co = std::cos(xi);
    const Real f = Real(1.5) * ((Real(1) - c2) * s / xi +
                                (Real(1) - Real(3) * c2) * (co / (xi * xi) - s / (xi * xi * xi)));
    const Real g = Real(0.75) * (-(Real(1) - c2) * co / xi +
                                 (Real(1) - Real(3) * c2) * (s / (xi * xi) + co / (xi * xi * xi)));
    return {f, g};
}

// Orthonormal pump-phased basis of the n-excitation sector: column 0 the
// symmetric state, then C(N,n)-1 non-symmetric states, embedded in the full
// 2^N space.
MatXc build_basis(const AtomGeometry& geometry, int n_excitations);

struct PopulationSeries {
    VecX t;                     // units of 1/gamma
    VecX p1s, p1ns, p2s, p2ns;  // symmetric / summed non-symmetric populations
    double max_trace_drift = 0.0;
    double max_hermiticity_error = 0.0;
    MatXc rho_final;            // density matrix at t_end
};

// Master-equation evolution from the ground state with single-atom decay
// rate gamma = 1, collective rates gamma F_uv and coherent shifts
// -gamma G_uv sigma+_u sigma-_v. RK4 on the vectorized Liouvillian.
PopulationSeries evolve_lindblad(const AtomGeometry& geometry, double omega_a, double delta1,
                                 double t_end, double dt = 1e-3);

// last row of an evolution continued until the populations stop changing
// over one Rabi period (tolerance 1e-6, capped at t_max)
struct SteadyPopulations {
    double p1s, p1ns, p2s, p2ns;
    double t_reached;
    bool converged;
};
SteadyPopulations steady_populations(const AtomGeometry& geometry, double omega_a, double delta1,
                                     double t_max = 200.0, double dt = 1e-3);

// dense vectorized Liouvillian (test hook; dim 4^N)
MatXc liouvillian(const AtomGeometry& geometry, double omega_a, double delta1);

}  // namespace qens::few_atom

#endif
