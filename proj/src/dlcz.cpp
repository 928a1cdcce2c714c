#include "qens/dlcz.hpp"

#include <cmath>
#include <stdexcept>

namespace qens::dlcz {

namespace {

void validate(const SwapInput& in, const DetectorModel& det) {
    if (in.eta_r <= 0.0) throw std::domain_error("swap metrics: eta_r must be > 0");
    if (det.eta_t < 0.0 || det.eta_t > 1.0 || det.eta_eff < 0.0 || det.eta_eff > 1.0)
        throw std::domain_error("swap metrics: efficiencies must lie in [0,1]");
    if (in.lambdas.size() == 0) throw std::invalid_argument("swap metrics: empty Schmidt spectrum");
    if (std::abs(in.lambdas.sum() - 1.0) > 1e-6)
        throw std::invalid_argument("swap metrics: Schmidt spectrum must sum to 1");
    const double l1 = in.lambdas.maxCoeff();
    if (in.overlap >= 0.0 && in.overlap > l1 + 1e-8)
        throw std::invalid_argument("swap metrics: overlap exceeds lambda_1");
}

double overlap_of(const SwapInput& in) {
    return in.overlap >= 0.0 ? in.overlap : in.lambdas.maxCoeff();
}

double eta_r_factor(double eta_r) {
    const double s = std::sqrt(eta_r) + 1.0 / std::sqrt(eta_r);
    return s * s;
}

// detector-dependent factor multiplying (1 + sum lambda_j^2) in the
// denominators: (2 - eta)/2 for NRPD, (1 - eta) for PNRD
double kind_factor(DetectorKind kind, double eta_t) {
    return kind == DetectorKind::NRPD ? 0.5 * (2.0 - eta_t) : (1.0 - eta_t);
}

}  // namespace

SwapMetrics swap_metrics(const SwapInput& in, const DetectorModel& det) {
    validate(in, det);
    const double o = overlap_of(in);
    const double sum_l2 = in.lambdas.squaredNorm();
    const double kf = kind_factor(det.kind, det.eta_t);
    SwapMetrics m;
    m.fidelity = (1.0 + o) / (in.eta_r * kf * (1.0 + sum_l2) + 2.0);
    m.herald   = (in.eta_r * det.eta_t * kf * (1.0 + sum_l2) + 2.0 * det.eta_t) / eta_r_factor(in.eta_r);
    m.success  = det.eta_t * (1.0 + o) / eta_r_factor(in.eta_r);
    return m;
}

double pme_success(const VecX& lambdas, double eta_r, double eta_t) {
    SwapInput in;
    in.lambdas = lambdas;
    in.eta_r = eta_r;
    validate(in, DetectorModel{DetectorKind::NRPD, eta_t, 1.0});
    const double l1 = lambdas.maxCoeff();
    const double sum_l2 = lambdas.squaredNorm();
    const double a = eta_r * (2.0 - eta_t) * (1.0 + sum_l2);
    return 4.0 * (1.0 + l1 * l1) / ((a + 4.0) * (a + 4.0));
}

double teleport_success(Complex d0, const VecX& lambdas, double eta_r, double eta_t,
                        const DetectorModel& detector) {
    const double d0n = std::norm(d0);
    if (d0n > 1.0 + 1e-12) throw std::domain_error("teleport_success: |d0| must be <= 1");
    SwapInput in;
    in.lambdas = lambdas;
    in.eta_r = eta_r;
    // the success probability is detector-independent and rests on the NRPD
    // swap fidelity; `detector` only carries the efficiencies
    DetectorModel nrpd{DetectorKind::NRPD, eta_t, detector.eta_eff};
    const double f = swap_metrics(in, nrpd).fidelity;
    const double l1 = lambdas.maxCoeff();
    const double d1n = 1.0 - d0n;
    return f * f / ((1.0 + l1) * (1.0 + l1)) * (1.0 + (2.0 * l1 * l1 - 2.0) * d0n * d1n);
}

SwapMetrics swap_metrics_from_projection(const SwapInput& in, const DetectorModel& det) {
    validate(in, det);
    const double o = overlap_of(in);
    const double sum_l2 = in.lambdas.squaredNorm();
    const double eta_t = det.eta_t, ee2 = det.eta_eff * det.eta_eff;
    // symmetric setup eta_1 = eta_r * eta_2 in the small-eta limit where
    // (1 - eta_{1,2}) -> 1
    const double eta2 = 1e-3;
    const double eta1 = in.eta_r * eta2;
    const double kf = kind_factor(det.kind, eta_t);
    // conditioned (un-normalized) output density operator pieces: vacuum term
    // and the entangled block
    const double vac  = eta1 * eta1 / 8.0 * kf * eta_t * ee2 * (1.0 + sum_l2);
    const double pair = eta1 * eta2 / 8.0 * eta_t * ee2;
    const double trace = vac + 2.0 * pair;                //  S_B..S_B + S_A..S_A
    const double projected = pair * (1.0 + o);            //  onto (S_A + S_B)/sqrt(2)
    const double norm = ee2 * (eta1 * eta1 / 4.0 + eta1 * eta2 / 2.0 + eta2 * eta2 / 4.0);
    SwapMetrics m;
    m.fidelity = projected / trace;
    m.herald   = 2.0 * trace / norm;
    m.success  = m.herald * m.fidelity;
    return m;
}

}  // namespace qens::dlcz
