#include "analytic_flows.hpp"

#include <cmath>
#include <numbers>

#include "errors.hpp"
#include "jet_rules.hpp"

namespace hfm {

void AnalyticFlow::validate() const {
    if (!(re > 0.0) || !std::isfinite(re))
        throw_invalid("flow Reynolds number must be positive and finite");
}

std::string AnalyticFlow::variant_name() const {
    switch (variant) {
    case FlowVariant::TaylorGreen2D: return "taylor-green";
    case FlowVariant::Beltrami3D: return "beltrami";
    case FlowVariant::Stagnation2D: return "stagnation";
    case FlowVariant::RigidRotation2D: return "rotation";
    case FlowVariant::ZeroVelocity2D: return "zero";
    case FlowVariant::Uniform2D: return "uniform";
    }
    throw Error(ErrorCode::Internal, "unreachable flow variant");
}

FlowVariant AnalyticFlow::parse_variant(const std::string& name) {
    if (name == "taylor-green") return FlowVariant::TaylorGreen2D;
    if (name == "beltrami") return FlowVariant::Beltrami3D;
    if (name == "stagnation") return FlowVariant::Stagnation2D;
    if (name == "rotation") return FlowVariant::RigidRotation2D;
    if (name == "zero") return FlowVariant::ZeroVelocity2D;
    if (name == "uniform") return FlowVariant::Uniform2D;
    throw_invalid("unknown flow variant '" + name +
                  "' (expected taylor-green, beltrami, stagnation, rotation, "
                  "zero, or uniform)");
}

namespace {

/// Record the flow's (u, v[, w], p) expressions on `tp`. Inputs are
/// registered in the order t, x, y[, z], re so evaluation can bind them
/// positionally; re participates as an input (never seeded) so one tape
/// serves any Reynolds number.
int record_flow(Tape& tp, const AnalyticFlow& flow) {
    const VarId t = tp.input();
    const VarId x = tp.input();
    const VarId y = tp.input();
    const VarId z = flow.spatial_dim() == 3 ? tp.input() : 0;
    const VarId re = tp.input();

    switch (flow.variant) {
    case FlowVariant::TaylorGreen2D: {
        // u = -cos x sin y e^{-2t/Re}, v = sin x cos y e^{-2t/Re},
        // p = -1/4 (cos 2x + cos 2y) e^{-4t/Re}
        const VarId decay =
            tp.exp(tp.div(tp.mul(tp.constant(-2.0), t), re));
        const VarId u =
            tp.neg(tp.mul(tp.mul(tp.cos(x), tp.sin(y)), decay));
        const VarId v = tp.mul(tp.mul(tp.sin(x), tp.cos(y)), decay);
        const VarId two = tp.constant(2.0);
        const VarId p = tp.mul(
            tp.constant(-0.25),
            tp.mul(tp.add(tp.cos(tp.mul(two, x)), tp.cos(tp.mul(two, y))),
                   tp.mul(decay, decay)));
        tp.mark_output(u);
        tp.mark_output(v);
        tp.mark_output(p);
        return 3;
    }
    case FlowVariant::Beltrami3D: {
        const double a = std::numbers::pi / 4.0;
        const double d = std::numbers::pi / 2.0;
        const VarId ca = tp.constant(a);
        // theta = e^{-d^2 t / Re}
        const VarId theta =
            tp.exp(tp.div(tp.mul(tp.constant(-d * d), t), re));
        const VarId ax = tp.mul(ca, x), ay = tp.mul(ca, y),
                    az = tp.mul(ca, z);
        const VarId cd = tp.constant(d);
        const VarId dx = tp.mul(cd, x), dy = tp.mul(cd, y),
                    dz = tp.mul(cd, z);
        const VarId eax = tp.exp(ax), eay = tp.exp(ay), eaz = tp.exp(az);
        // Phase pairs cycle through (x,y,z).
        const VarId s_xy = tp.sin(tp.add(ax, dy)), c_xy = tp.cos(tp.add(ax, dy));
        const VarId s_yz = tp.sin(tp.add(ay, dz)), c_yz = tp.cos(tp.add(ay, dz));
        const VarId s_zx = tp.sin(tp.add(az, dx)), c_zx = tp.cos(tp.add(az, dx));

        const VarId u = tp.neg(tp.mul(
            ca, tp.mul(tp.add(tp.mul(eax, s_yz), tp.mul(eaz, c_xy)), theta)));
        const VarId v = tp.neg(tp.mul(
            ca, tp.mul(tp.add(tp.mul(eay, s_zx), tp.mul(eax, c_yz)), theta)));
        const VarId w = tp.neg(tp.mul(
            ca, tp.mul(tp.add(tp.mul(eaz, s_xy), tp.mul(eay, c_zx)), theta)));

        const VarId two = tp.constant(2.0);
        const VarId sum = tp.add(
            tp.add(tp.add(tp.exp(tp.mul(two, ax)), tp.exp(tp.mul(two, ay))),
                   tp.exp(tp.mul(two, az))),
            tp.mul(two,
                   tp.add(tp.add(tp.mul(tp.mul(s_xy, c_zx), tp.exp(tp.add(ay, az))),
                                 tp.mul(tp.mul(s_yz, c_xy), tp.exp(tp.add(az, ax)))),
                          tp.mul(tp.mul(s_zx, c_yz), tp.exp(tp.add(ax, ay))))));
        const VarId p = tp.mul(tp.constant(-0.5 * a * a),
                               tp.mul(sum, tp.mul(theta, theta)));
        tp.mark_output(u);
        tp.mark_output(v);
        tp.mark_output(w);
        tp.mark_output(p);
        return 4;
    }
    case FlowVariant::Stagnation2D: {
        const VarId u = x;
        const VarId v = tp.neg(y);
        const VarId p = tp.mul(tp.constant(-0.5),
                               tp.add(tp.mul(x, x), tp.mul(y, y)));
        tp.mark_output(u);
        tp.mark_output(v);
        tp.mark_output(p);
        return 3;
    }
    case FlowVariant::RigidRotation2D: {
        const VarId u = tp.neg(y);
        const VarId v = x;
        const VarId p = tp.mul(tp.constant(0.5),
                               tp.add(tp.mul(x, x), tp.mul(y, y)));
        tp.mark_output(u);
        tp.mark_output(v);
        tp.mark_output(p);
        return 3;
    }
    case FlowVariant::ZeroVelocity2D: {
        const VarId zero = tp.constant(0.0);
        tp.mark_output(zero);
        tp.mark_output(zero);
        tp.mark_output(zero);
        return 3;
    }
    case FlowVariant::Uniform2D: {
        tp.mark_output(tp.constant(1.0));
        tp.mark_output(tp.constant(0.0));
        tp.mark_output(tp.constant(0.0));
        return 3;
    }
    }
    throw Error(ErrorCode::Internal, "unreachable flow variant");
}

} // namespace

AnalyticJetEvaluator::AnalyticJetEvaluator(const AnalyticFlow& flow)
    : flow_(flow) {
    flow_.validate();
    out_count_ = record_flow(tape_, flow_);
}

FieldJet AnalyticJetEvaluator::eval(double t, double x, double y,
                                    double z) const {
    const int dim = flow_.spatial_dim();
    double in2[4] = {t, x, y, flow_.re};
    double in3[5] = {t, x, y, z, flow_.re};
    std::span<const double> inputs =
        dim == 3 ? std::span<const double>(in3) : std::span<const double>(in2);

    FieldJet jet;
    jet.spatial_dim = dim;
    // Output order is u, v[, w], p; map onto the FieldJet slots.
    const int slots2[3] = {kFieldU, kFieldV, kFieldP};
    const int slots3[4] = {kFieldU, kFieldV, kFieldW, kFieldP};
    const int* slots = dim == 3 ? slots3 : slots2;

    // One hyperdual replay per spatial coordinate (seeded twice on itself
    // gives value, first and pure second derivative), plus one for time.
    for (int k = 0; k < dim; ++k) {
        const int input_index = 1 + k;
        auto vals = tape_.evaluate_hyperdual(inputs, input_index, input_index);
        for (int o = 0; o < out_count_; ++o) {
            jet.value[slots[o]] = vals[o].v;
            jet.d1[slots[o]][1 + k] = vals[o].da;
            jet.d2[slots[o]][k] = vals[o].dab;
        }
    }
    auto tvals = tape_.evaluate_hyperdual(inputs, 0, -1);
    for (int o = 0; o < out_count_; ++o)
        jet.d1[slots[o]][0] = tvals[o].da;
    return jet;
}

FieldJet analytic_eval(const AnalyticFlow& flow, double t, double x, double y,
                       double z) {
    return AnalyticJetEvaluator(flow).eval(t, x, y, z);
}

void analytic_velocity(const AnalyticFlow& flow, double t, double x, double y,
                       double& u, double& v) {
    switch (flow.variant) {
    case FlowVariant::TaylorGreen2D: {
        const double decay = std::exp(-2.0 * t / flow.re);
        u = -std::cos(x) * std::sin(y) * decay;
        v = std::sin(x) * std::cos(y) * decay;
        return;
    }
    case FlowVariant::Stagnation2D:
        u = x;
        v = -y;
        return;
    case FlowVariant::RigidRotation2D:
        u = -y;
        v = x;
        return;
    case FlowVariant::ZeroVelocity2D:
        u = 0.0;
        v = 0.0;
        return;
    case FlowVariant::Uniform2D:
        u = 1.0;
        v = 0.0;
        return;
    case FlowVariant::Beltrami3D:
        throw_invalid("analytic_velocity is two-dimensional; the 3D variant "
                      "is not supported here");
    }
    throw Error(ErrorCode::Internal, "unreachable flow variant");
}

double solver_max_speed(const AnalyticFlow& flow, double t) {
    switch (flow.variant) {
    case FlowVariant::TaylorGreen2D:
        return std::exp(-2.0 * t / flow.re); // sup |cos x sin y| = 1
    case FlowVariant::ZeroVelocity2D:
        return 0.0;
    case FlowVariant::Uniform2D:
        return 1.0;
    default:
        throw_invalid("flow variant '" +
                      AnalyticFlow{flow.variant, flow.re}.variant_name() +
                      "' is not periodic; the transport solver accepts "
                      "taylor-green, zero, or uniform");
    }
}

} // namespace hfm
