#ifndef HFM_ANALYTIC_FLOWS_HPP
#define HFM_ANALYTIC_FLOWS_HPP

#include <string>

#include "mlp.hpp"
#include "tape.hpp"

namespace hfm {

/// Closed-form incompressible flows used as ground truth. Every variant
/// satisfies the momentum and continuity equations exactly (a test sweeps
/// random points through the residual evaluator). The periodic variants
/// double as advecting velocities for the scalar transport solver.
enum class FlowVariant {
    TaylorGreen2D,   ///< decaying vortex array, periodic on [0,2pi)^2
    Beltrami3D,      ///< exponential 3D vortex (a=pi/4, d=pi/2)
    Stagnation2D,    ///< u=x, v=-y, steady
    RigidRotation2D, ///< u=-y, v=x, steady
    ZeroVelocity2D,  ///< quiescent fluid, pure diffusion
    Uniform2D        ///< u=1, v=0, constant drift
};

struct AnalyticFlow {
    FlowVariant variant = FlowVariant::TaylorGreen2D;
    double re = 1.0;

    int spatial_dim() const {
        return variant == FlowVariant::Beltrami3D ? 3 : 2;
    }
    /// True when the velocity is 2pi-periodic (and hence usable by the
    /// periodic transport solver).
    bool periodic() const {
        return variant == FlowVariant::TaylorGreen2D ||
               variant == FlowVariant::ZeroVelocity2D ||
               variant == FlowVariant::Uniform2D;
    }

    /// Throws unless re > 0 and finite.
    void validate() const;

    std::string variant_name() const;
    static FlowVariant parse_variant(const std::string& name);
};

/// Evaluates a flow's velocity/pressure jet (values, first time/space
/// derivatives, pure second spatial derivatives) by replaying a recorded
/// expression tape through hyperdual arithmetic. Building the tape once per
/// flow keeps repeated evaluation cheap; the scalar slots (c, d) of the
/// returned jet stay zero.
class AnalyticJetEvaluator {
public:
    explicit AnalyticJetEvaluator(const AnalyticFlow& flow);

    const AnalyticFlow& flow() const { return flow_; }

    FieldJet eval(double t, double x, double y, double z = 0.0) const;

private:
    AnalyticFlow flow_;
    Tape tape_;
    int out_count_ = 0; // 3 in 2D (u,v,p), 4 in 3D (u,v,w,p)
};

/// One-shot convenience wrapper around AnalyticJetEvaluator.
FieldJet analytic_eval(const AnalyticFlow& flow, double t, double x, double y,
                       double z = 0.0);

/// Value-only velocity, hand-coded for the solver's inner loop (2D variants
/// only; the 3D variant is rejected).
void analytic_velocity(const AnalyticFlow& flow, double t, double x, double y,
                       double& u, double& v);

/// Supremum of the per-component velocity magnitude over space at time t,
/// used for the advective CFL bound. Defined only for periodic variants.
double solver_max_speed(const AnalyticFlow& flow, double t);

} // namespace hfm

#endif
