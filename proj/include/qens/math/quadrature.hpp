#ifndef QENS_MATH_QUADRATURE_HPP
#define QENS_MATH_QUADRATURE_HPP

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace qens {

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;  // estimated absolute error
    int    subdivisions = 0;
};

namespace detail {

// Gauss 7 / Kronrod 15 nodes and weights on [-1, 1].
inline constexpr double kKronrodNodes[8] = {
    0.000000000000000000000000000000000, 0.207784955007898467600689403773245,
    0.405845151377397166906606412076961, 0.586087235467691130294144838258730,
    0.741531185599394439863864773280788, 0.864864423359769072789712788640926,
    0.949107912342758524526189684047851, 0.991455371120812639206854697526329};
inline constexpr double kKronrodWeights[8] = {
    0.209482141084727828012999174891714, 0.204432940075298892414161999234649,
    0.190350578064785409913256402421014, 0.169004726639267902826583426598550,
    0.140653259715525918745189590510238, 0.104790010322250183839876322541518,
    0.063092092629978553290700663189204, 0.022935322010529224963732008058970};
inline constexpr double kGaussWeights[4] = {
    0.417959183673469387755102040816327, 0.381830050505118944950369775488975,
    0.279705391489276667901467771423780, 0.129484966168869693270611432679082};

template <class F>
void gk15(const F& f, double a, double b, double& value, double& error) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double kronrod = fc * kKronrodWeights[0];
    double gauss   = fc * kGaussWeights[0];
    for (int j = 1; j < 8; ++j) {
        const double x  = h * kKronrodNodes[j];
        const double fs = f(c - x) + f(c + x);
        kronrod += fs * kKronrodWeights[j];
        if (j % 2 == 0) gauss += fs * kGaussWeights[j / 2];
    }
    value = kronrod * h;
    // |K15 - G7| overestimates the K15 error for smooth integrands; good
    // enough as a refinement driver
    error = std::abs((kronrod - gauss) * h);
}

}  // namespace detail

// Adaptive bisection on [a, b]; rel_tol is relative to the accumulated value.
template <class F>
QuadratureResult integrate_adaptive(const F& f, double a, double b,
                                    double rel_tol = 1e-10, double abs_tol = 0.0,
                                    int max_subdiv = 2000) {
    struct Interval {
        double a, b, value, error;
    };
    double v0, e0;
    detail::gk15(f, a, b, v0, e0);
    std::vector<Interval> heap{{a, b, v0, e0}};
    double total_v = v0, total_e = e0;
    int n = 0;
    while (total_e > std::max(abs_tol, rel_tol * std::abs(total_v)) && n < max_subdiv) {
        // split the interval with the largest error estimate
        std::size_t worst = 0;
        for (std::size_t i = 1; i < heap.size(); ++i)
            if (heap[i].error > heap[worst].error) worst = i;
        const Interval iv = heap[worst];
        const double m = 0.5 * (iv.a + iv.b);
        Interval left{iv.a, m, 0, 0}, right{m, iv.b, 0, 0};
        detail::gk15(f, left.a, left.b, left.value, left.error);
        detail::gk15(f, right.a, right.b, right.value, right.error);
        total_v += left.value + right.value - iv.value;
        total_e += left.error + right.error - iv.error;
        heap[worst] = left;
        heap.push_back(right);
        ++n;
    }
    if (total_e > std::max(abs_tol, rel_tol * std::abs(total_v)) * 100.0 + 1e-300)
        throw std::runtime_error("integrate_adaptive: failed to reach requested accuracy");
    return {total_v, total_e, n};
}

}  // namespace qens

#endif
