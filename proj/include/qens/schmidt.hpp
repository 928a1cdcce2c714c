#ifndef QENS_SCHMIDT_HPP
#define QENS_SCHMIDT_HPP

#include "qens/types.hpp"

namespace qens::schmidt {

// Schmidt data of a discretized biphoton amplitude on a uniform grid with
// spacing dw in both frequencies. Modes are stored per column and are
// orthonormal under the grid measure: sum_i m(i,n)* m(i,k) dw = delta_nk.
struct SchmidtModes {
    VecX  lambdas;       // descending, sum = 1
    MatXc signal_modes;  // psi_n(w_s); empty when only eigenvalues were requested
    MatXc idler_modes;   // phi_n(w_i)
    double dw = 0.0;
};

// Singular-value route on the measure-weighted amplitude f*dw; the grid
// amplitude is renormalized to unit L2 norm first. With modes included,
// f(i,j) = sum_n sqrt(lambda_n) psi_n(i) phi_n(j) holds on the grid.
SchmidtModes decompose(const MatXc& f_grid, double dw, bool compute_modes = true);

// von Neumann entropy -sum lambda ln lambda (0 ln 0 := 0), in nats
double entropy(const VecX& lambdas);

// sum_j lambda_j |<phi_j, Phi>|^2 with the grid inner product
// <phi, Phi> = sum_i phi(i) Phi(i)^* dw. Phi must be grid-normalized.
// Equals lambda_1 when Phi matches the leading idler mode.
double mode_overlap(const SchmidtModes& modes, const VecXc& phi_big);

}  // namespace qens::schmidt

#endif
