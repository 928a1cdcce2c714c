#ifndef QENS_DLCZ_HPP
#define QENS_DLCZ_HPP

#include "qens/types.hpp"

namespace qens::dlcz {

enum class DetectorKind { NRPD, PNRD };

struct DetectorModel {
    DetectorKind kind = DetectorKind::NRPD;
    double eta_t   = 1.0;  // telecom-wavelength quantum efficiency
    double eta_eff = 1.0;  // near-infrared efficiency; cancels in all ratios
};

// Schmidt data feeding the swap formulas. overlap < 0 selects the matched
// Raman mode default (overlap = lambda_1).
struct SwapInput {
    VecX lambdas;
    double eta_r = 1.0;    // eta_1 / eta_2
    double overlap = -1.0;
};

struct SwapMetrics {
    double fidelity;
    double herald;   // P_H
    double success;  // P_S
};

SwapMetrics swap_metrics(const SwapInput& input, const DetectorModel& detector);

// success probability of the polarization-maximally-entangled projection
double pme_success(const VecX& lambdas, double eta_r, double eta_t);

// teleportation success for state d0 S1 + d1 S2 with |d0|^2 + |d1|^2 = 1
double teleport_success(Complex d0, const VecX& lambdas, double eta_r, double eta_t,
                        const DetectorModel& detector);

// Rebuilds F, P_H, P_S from the projected-density-operator traces in the
// symmetric small-eta limit instead of the reduced closed forms; used as an
// internal consistency check of the algebra.
SwapMetrics swap_metrics_from_projection(const SwapInput& input, const DetectorModel& detector);

}  // namespace qens::dlcz

#endif
