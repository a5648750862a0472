#ifndef HFM_JET_RULES_HPP
#define HFM_JET_RULES_HPP

#include <cmath>
#include <cstddef>

#include "mlp.hpp"

namespace hfm {

/// Derivative-channel convention shared by the scalar jet evaluator and the
/// batched tile engine. For spatial dimension `dim` there are 2 + 2*dim
/// channels per neuron:
///   0           value
///   1           d/dt
///   2 .. 1+dim  d/dx_k           (first spatial derivatives)
///   2+dim ..    d2/dx_k2         (pure second spatial derivatives)
/// Every channel is seeded so that it carries derivatives with respect to
/// the ORIGINAL coordinates (the input map is affine, so constant
/// first-derivative seeds encode the chain rule exactly and second-order
/// seed terms vanish).
inline constexpr int jet_channels(int dim) { return 2 + 2 * dim; }
inline constexpr int jet_grad_channel(int coord) {
    // coord: 0 = t, k >= 1 = spatial k-1
    return coord == 0 ? 1 : 1 + coord;
}
inline constexpr int jet_hess_channel(int dim, int k) { return 2 + dim + k; }

/// sigma, sigma', sigma'', sigma''' at x. The third derivative is needed
/// only by the reverse sweep (the value-channel adjoint of the curvature
/// channels pulls it in).
inline void act_derivs(Activation act, double x, double& s0, double& s1,
                       double& s2, double& s3) {
    if (act == Activation::Sin) {
        s0 = std::sin(x);
        s1 = std::cos(x);
        s2 = -s0;
        s3 = -s1;
    } else {
        const double t = std::tanh(x);
        const double s = 1.0 - t * t;
        s0 = t;
        s1 = s;
        s2 = -2.0 * t * s;
        s3 = s * (4.0 * t * t - 2.0 * s);
    }
}

/// Seed the input slot for coordinate i (value + unit derivative times the
/// normalization scale). `slot` addresses the value channel; channel c lives
/// at slot[c*stride].
inline void jet_input_fill(const InputNormalization& nm, int dim, int i,
                           double xi, double* slot, std::ptrdiff_t stride) {
    const int nch = jet_channels(dim);
    for (int c = 0; c < nch; ++c) slot[c * stride] = 0.0;
    slot[0] = nm.scale[static_cast<std::size_t>(i)] * xi +
              nm.shift[static_cast<std::size_t>(i)];
    slot[jet_grad_channel(i) * stride] = nm.scale[static_cast<std::size_t>(i)];
}

/// Forward activation rule for one (neuron, point): value, first-derivative
/// channels scaled by sigma', curvature channels by the Faà di Bruno
/// second-order rule h -> sigma'*h + sigma''*g^2. Curvature channels are
/// written first so the rule stays correct when `a` aliases `z`.
inline void jet_activation_apply(double s0, double s1, double s2, int dim,
                                 const double* z, double* a,
                                 std::ptrdiff_t stride) {
    for (int k = 0; k < dim; ++k) {
        const double g = z[(2 + k) * stride];
        a[(2 + dim + k) * stride] =
            s1 * z[(2 + dim + k) * stride] + s2 * (g * g);
    }
    const int ng = 1 + dim;
    for (int c = 1; c <= ng; ++c) a[c * stride] = s1 * z[c * stride];
    a[0] = s0;
}

/// Exact transpose of jet_activation_apply. `z` is the stored
/// pre-activation, `abar` the incoming adjoint of the activated channels,
/// `zbar` the outgoing adjoint of the pre-activation channels.
inline void jet_activation_backward(double s1, double s2, double s3, int dim,
                                    const double* z, const double* abar,
                                    double* zbar, std::ptrdiff_t stride) {
    double v = s1 * abar[0];
    v += s2 * z[stride] * abar[stride]; // time-derivative channel
    zbar[stride] = s1 * abar[stride];
    for (int k = 0; k < dim; ++k) {
        const std::ptrdiff_t gc = (2 + k) * stride;
        const std::ptrdiff_t hc = (2 + dim + k) * stride;
        const double g = z[gc];
        const double ag = abar[gc];
        const double ah = abar[hc];
        v += s2 * g * ag + (s2 * z[hc] + s3 * (g * g)) * ah;
        zbar[gc] = s1 * ag + 2.0 * s2 * g * ah;
        zbar[hc] = s1 * ah;
    }
    zbar[0] = v;
}

} // namespace hfm

#endif
