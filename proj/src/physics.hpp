#ifndef HFM_PHYSICS_HPP
#define HFM_PHYSICS_HPP

#include <span>
#include <vector>

#include "mlp.hpp"

namespace hfm {

/// Non-dimensional flow parameters. Both numbers are strictly positive;
/// pec may be +infinity to represent the pure-advection limit (its inverse
/// is then exactly 0). When a parameter is trainable the optimizer works on
/// the unconstrained exponent s with value = exp(s), which keeps positivity
/// structural rather than enforced.
struct FlowParams {
    double re = 1.0;
    double pec = 1.0;
    bool re_trainable = false;
    bool pec_trainable = false;

    double inv_re() const { return 1.0 / re; }
    double inv_pec() const { return 1.0 / pec; }

    static FlowParams fixed(double re, double pec);
    static FlowParams trainable(double re_guess, double pec_guess);

    /// Throws unless re > 0 and pec > 0 (infinite pec allowed when fixed,
    /// rejected when trainable since exp(s) cannot reach it).
    void validate() const;
};

/// Pec = Re * Pr. Rejects non-positive arguments.
double peclet_from_prandtl(double re, double pr);

/// Transport/momentum/continuity residuals at one point. e5 (the w-momentum
/// residual) exists only in 3D and is stored as exactly 0 in 2D.
struct ResidualSet {
    int spatial_dim = 2;
    double e1 = 0.0; ///< c-transport
    double e2 = 0.0; ///< d-transport
    double e3 = 0.0; ///< x-momentum
    double e4 = 0.0; ///< y-momentum
    double e5 = 0.0; ///< z-momentum (3D only)
    double e6 = 0.0; ///< continuity

    bool has_e5() const { return spatial_dim == 3; }
    /// Largest |e_i| over the residuals present in this dimension.
    double max_abs() const;
};

/// 2D residuals:
///   e1 = c_t + u c_x + v c_y - Pec^-1 (c_xx + c_yy)
///   e2 =   same for d
///   e3 = u_t + u u_x + v u_y + p_x - Re^-1 (u_xx + u_yy)
///   e4 = v_t + u v_x + v v_y + p_y - Re^-1 (v_xx + v_yy)
///   e6 = u_x + v_y
/// Rejects jets of the wrong dimension.
ResidualSet residuals_2d(const FieldJet& jet, const FlowParams& fp);

/// 3D residuals with the z/w terms included and e5 the w-momentum residual.
ResidualSet residuals_3d(const FieldJet& jet, const FlowParams& fp);

/// d = 1 - c, elementwise.
std::vector<double> auxiliary_complement(std::span<const double> c);

} // namespace hfm

#endif
