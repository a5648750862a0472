#include "tape.hpp"

#include <cmath>
#include <string>

#include "errors.hpp"

namespace hfm {

namespace {

/// First three derivatives of a unary elementary function at x, used by
/// both hyperdual forward propagation and the reverse sweeps. The third
/// derivative only matters when reverse accumulation runs through hyperdual
/// values (the mixed-slot adjoint pulls it in); plain reverse ignores g3.
struct UnaryDerivs {
    double g0, g1, g2, g3;
};

UnaryDerivs unary_derivs(TapeOp op, double x, double c) {
    switch (op) {
    case TapeOp::Neg:
        return {-x, -1.0, 0.0, 0.0};
    case TapeOp::Inv: {
        const double r = 1.0 / x;
        const double r2 = r * r;
        return {r, -r2, 2.0 * r2 * r, -6.0 * r2 * r2};
    }
    case TapeOp::Sin: {
        const double s = std::sin(x), co = std::cos(x);
        return {s, co, -s, -co};
    }
    case TapeOp::Cos: {
        const double s = std::sin(x), co = std::cos(x);
        return {co, -s, -co, s};
    }
    case TapeOp::Exp: {
        const double e = std::exp(x);
        return {e, e, e, e};
    }
    case TapeOp::Tanh: {
        const double t = std::tanh(x);
        const double s = 1.0 - t * t;
        return {t, s, -2.0 * t * s, s * (4.0 * t * t - 2.0 * s)};
    }
    case TapeOp::PowC: {
        const double g0 = std::pow(x, c);
        const double g1 = c * std::pow(x, c - 1.0);
        const double g2 = c * (c - 1.0) * std::pow(x, c - 2.0);
        const double g3 = c * (c - 1.0) * (c - 2.0) * std::pow(x, c - 3.0);
        return {g0, g1, g2, g3};
    }
    default:
        throw Error(ErrorCode::Internal, "unary_derivs: not a unary op");
    }
}

[[noreturn]] void throw_non_finite(std::size_t node) {
    throw NonFiniteError("non-finite value produced at tape node " +
                             std::to_string(node),
                         node);
}

bool finite(const HyperDual& h) {
    return std::isfinite(h.v) && std::isfinite(h.da) && std::isfinite(h.db) &&
           std::isfinite(h.dab);
}

} // namespace

VarId Tape::push(TapeOp op, VarId a, VarId b, double c) {
    nodes_.push_back(Node{op, a, b, c});
    return static_cast<VarId>(nodes_.size() - 1);
}

VarId Tape::check_operand(VarId id) const {
    if (id >= nodes_.size())
        throw_invalid("tape operand " + std::to_string(id) +
                      " does not name a recorded node");
    return id;
}

VarId Tape::input() {
    const VarId id = push(TapeOp::Input, 0, 0, 0.0);
    input_ids_.push_back(id);
    return id;
}

VarId Tape::constant(double value) { return push(TapeOp::Const, 0, 0, value); }

VarId Tape::add(VarId a, VarId b) {
    return push(TapeOp::Add, check_operand(a), check_operand(b), 0.0);
}
VarId Tape::sub(VarId a, VarId b) {
    return push(TapeOp::Sub, check_operand(a), check_operand(b), 0.0);
}
VarId Tape::mul(VarId a, VarId b) {
    return push(TapeOp::Mul, check_operand(a), check_operand(b), 0.0);
}
VarId Tape::div(VarId a, VarId b) { return mul(a, inv(b)); }
VarId Tape::neg(VarId a) { return push(TapeOp::Neg, check_operand(a), 0, 0.0); }
VarId Tape::inv(VarId a) { return push(TapeOp::Inv, check_operand(a), 0, 0.0); }
VarId Tape::sin(VarId a) { return push(TapeOp::Sin, check_operand(a), 0, 0.0); }
VarId Tape::cos(VarId a) { return push(TapeOp::Cos, check_operand(a), 0, 0.0); }
VarId Tape::exp(VarId a) { return push(TapeOp::Exp, check_operand(a), 0, 0.0); }
VarId Tape::tanh(VarId a) { return push(TapeOp::Tanh, check_operand(a), 0, 0.0); }
VarId Tape::pow(VarId a, double exponent) {
    return push(TapeOp::PowC, check_operand(a), 0, exponent);
}

void Tape::mark_output(VarId id) { outputs_.push_back(check_operand(id)); }

void Tape::evaluate_nodes(std::span<const double> inputs,
                          std::vector<double>& values) const {
    if (inputs.size() != input_ids_.size())
        throw_invalid("tape evaluation expected " +
                      std::to_string(input_ids_.size()) + " inputs, got " +
                      std::to_string(inputs.size()));
    values.resize(nodes_.size());
    std::size_t next_input = 0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const Node& n = nodes_[i];
        double r;
        switch (n.op) {
        case TapeOp::Input: r = inputs[next_input++]; break;
        case TapeOp::Const: r = n.c; break;
        case TapeOp::Add: r = values[n.a] + values[n.b]; break;
        case TapeOp::Sub: r = values[n.a] - values[n.b]; break;
        case TapeOp::Mul: r = values[n.a] * values[n.b]; break;
        default: r = unary_derivs(n.op, values[n.a], n.c).g0; break;
        }
        if (!std::isfinite(r)) throw_non_finite(i);
        values[i] = r;
    }
}

std::vector<double> Tape::evaluate(std::span<const double> inputs) const {
    std::vector<double> values;
    evaluate_nodes(inputs, values);
    std::vector<double> out;
    out.reserve(outputs_.size());
    for (VarId id : outputs_) out.push_back(values[id]);
    return out;
}

void Tape::evaluate_hyperdual_nodes(std::span<const double> inputs,
                                    int seed_a, int seed_b,
                                    std::vector<HyperDual>& values) const {
    if (inputs.size() != input_ids_.size())
        throw_invalid("tape evaluation expected " +
                      std::to_string(input_ids_.size()) + " inputs, got " +
                      std::to_string(inputs.size()));
    const int n_in = static_cast<int>(input_ids_.size());
    if (seed_a < -1 || seed_a >= n_in || seed_b < -1 || seed_b >= n_in)
        throw_invalid("hyperdual seed index out of range");
    values.resize(nodes_.size());
    std::size_t next_input = 0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const Node& n = nodes_[i];
        HyperDual r;
        switch (n.op) {
        case TapeOp::Input: {
            const int idx = static_cast<int>(next_input);
            r = HyperDual::seed(inputs[next_input],
                                idx == seed_a ? 1.0 : 0.0,
                                idx == seed_b ? 1.0 : 0.0);
            ++next_input;
            break;
        }
        case TapeOp::Const: r = HyperDual(n.c); break;
        case TapeOp::Add: r = values[n.a] + values[n.b]; break;
        case TapeOp::Sub: r = values[n.a] - values[n.b]; break;
        case TapeOp::Mul: r = values[n.a] * values[n.b]; break;
        default: {
            const HyperDual& x = values[n.a];
            const UnaryDerivs g = unary_derivs(n.op, x.v, n.c);
            r = hd_unary(x, g.g0, g.g1, g.g2);
            break;
        }
        }
        if (!finite(r)) throw_non_finite(i);
        values[i] = r;
    }
}

std::vector<HyperDual> Tape::evaluate_hyperdual(std::span<const double> inputs,
                                                int seed_a, int seed_b) const {
    std::vector<HyperDual> values;
    evaluate_hyperdual_nodes(inputs, seed_a, seed_b, values);
    std::vector<HyperDual> out;
    out.reserve(outputs_.size());
    for (VarId id : outputs_) out.push_back(values[id]);
    return out;
}

GradientResult Tape::reverse_gradient(std::span<const double> inputs,
                                      VarId output,
                                      std::span<const VarId> params) const {
    if (output >= nodes_.size())
        throw_invalid("reverse_gradient: output " + std::to_string(output) +
                      " is not a node on this tape");
    for (VarId p : params)
        if (p >= nodes_.size() || nodes_[p].op != TapeOp::Input)
            throw_invalid("reverse_gradient: parameter " + std::to_string(p) +
                          " is not a tracked input variable");

    std::vector<double> values;
    evaluate_nodes(inputs, values);

    std::vector<double> adj(nodes_.size(), 0.0);
    adj[output] = 1.0;
    for (std::size_t i = nodes_.size(); i-- > 0;) {
        const double zbar = adj[i];
        if (zbar == 0.0) continue;
        const Node& n = nodes_[i];
        switch (n.op) {
        case TapeOp::Input:
        case TapeOp::Const:
            break;
        case TapeOp::Add:
            adj[n.a] += zbar;
            adj[n.b] += zbar;
            break;
        case TapeOp::Sub:
            adj[n.a] += zbar;
            adj[n.b] -= zbar;
            break;
        case TapeOp::Mul:
            adj[n.a] += zbar * values[n.b];
            adj[n.b] += zbar * values[n.a];
            break;
        default:
            adj[n.a] += zbar * unary_derivs(n.op, values[n.a], n.c).g1;
            break;
        }
    }

    GradientResult res;
    res.value = values[output];
    res.gradient.reserve(params.size());
    for (VarId p : params) res.gradient.push_back(adj[p]);
    return res;
}

GradientResult Tape::reverse_gradient_hyperdual(
    std::span<const double> inputs, int seed_a, int seed_b,
    std::span<const ComponentAdjoint> seeds,
    std::span<const VarId> params) const {
    for (const ComponentAdjoint& s : seeds)
        if (s.node >= nodes_.size())
            throw_invalid("reverse_gradient_hyperdual: seed node " +
                          std::to_string(s.node) + " is not on this tape");
    for (VarId p : params)
        if (p >= nodes_.size() || nodes_[p].op != TapeOp::Input)
            throw_invalid("reverse_gradient_hyperdual: parameter " +
                          std::to_string(p) +
                          " is not a tracked input variable");

    std::vector<HyperDual> values;
    evaluate_hyperdual_nodes(inputs, seed_a, seed_b, values);

    // Adjoints carry one weight per stored hyperdual component. The sweep
    // below is the exact transpose of the hyperdual forward propagation:
    // where the forward rule for z = g(x) couples x.v into z.da (through
    // g''·x.da) and into z.dab (through g''·x.dab + g'''·x.da·x.db), the
    // reverse rule couples those adjoint slots back into x̄.v.
    std::vector<HyperDual> adj(nodes_.size());
    double loss = 0.0;
    for (const ComponentAdjoint& s : seeds) {
        const HyperDual& z = values[s.node];
        loss += s.weight.v * z.v + s.weight.da * z.da + s.weight.db * z.db +
                s.weight.dab * z.dab;
        HyperDual& a = adj[s.node];
        a.v += s.weight.v;
        a.da += s.weight.da;
        a.db += s.weight.db;
        a.dab += s.weight.dab;
    }

    for (std::size_t i = nodes_.size(); i-- > 0;) {
        const HyperDual zbar = adj[i];
        if (zbar.v == 0.0 && zbar.da == 0.0 && zbar.db == 0.0 && zbar.dab == 0.0)
            continue;
        const Node& n = nodes_[i];
        switch (n.op) {
        case TapeOp::Input:
        case TapeOp::Const:
            break;
        case TapeOp::Add: {
            HyperDual& xa = adj[n.a];
            HyperDual& xb = adj[n.b];
            xa = xa + zbar;
            xb = xb + zbar;
            break;
        }
        case TapeOp::Sub: {
            HyperDual& xa = adj[n.a];
            HyperDual& xb = adj[n.b];
            xa = xa + zbar;
            xb = xb - zbar;
            break;
        }
        case TapeOp::Mul: {
            const HyperDual& x = values[n.a];
            const HyperDual& y = values[n.b];
            HyperDual& xa = adj[n.a];
            HyperDual& yb = adj[n.b];
            xa.v += zbar.v * y.v + zbar.da * y.da + zbar.db * y.db +
                    zbar.dab * y.dab;
            xa.da += zbar.da * y.v + zbar.dab * y.db;
            xa.db += zbar.db * y.v + zbar.dab * y.da;
            xa.dab += zbar.dab * y.v;
            yb.v += zbar.v * x.v + zbar.da * x.da + zbar.db * x.db +
                    zbar.dab * x.dab;
            yb.da += zbar.da * x.v + zbar.dab * x.db;
            yb.db += zbar.db * x.v + zbar.dab * x.da;
            yb.dab += zbar.dab * x.v;
            break;
        }
        default: {
            const HyperDual& x = values[n.a];
            const UnaryDerivs g = unary_derivs(n.op, x.v, n.c);
            HyperDual& xa = adj[n.a];
            xa.v += g.g1 * zbar.v + g.g2 * x.da * zbar.da +
                    g.g2 * x.db * zbar.db +
                    (g.g2 * x.dab + g.g3 * x.da * x.db) * zbar.dab;
            xa.da += g.g1 * zbar.da + g.g2 * x.db * zbar.dab;
            xa.db += g.g1 * zbar.db + g.g2 * x.da * zbar.dab;
            xa.dab += g.g1 * zbar.dab;
            break;
        }
        }
    }

    // Inputs are seeded with constant direction weights, so only the value
    // slot of an input adjoint is a derivative with respect to the input's
    // bound value.
    GradientResult res;
    res.value = loss;
    res.gradient.reserve(params.size());
    for (VarId p : params) res.gradient.push_back(adj[p].v);
    return res;
}

double Tape::finite_difference_check(std::span<const double> inputs,
                                     int order, double step) const {
    if (order != 1 && order != 2)
        throw_invalid("finite_difference_check: order must be 1 or 2");
    if (!(step > 0.0))
        throw_invalid("finite_difference_check: step must be positive");

    const std::size_t n_in = input_ids_.size();
    const std::size_t n_out = outputs_.size();
    std::vector<double> x(inputs.begin(), inputs.end());
    const std::vector<double> f0 = evaluate(x);

    double worst = 0.0;
    for (std::size_t i = 0; i < n_in; ++i) {
        const std::vector<HyperDual> hd =
            evaluate_hyperdual(x, static_cast<int>(i), static_cast<int>(i));
        const double xi = x[i];
        x[i] = xi + step;
        const std::vector<double> fp = evaluate(x);
        x[i] = xi - step;
        const std::vector<double> fm = evaluate(x);
        x[i] = xi;
        for (std::size_t o = 0; o < n_out; ++o) {
            double ad, fd;
            if (order == 1) {
                ad = hd[o].da;
                fd = (fp[o] - fm[o]) / (2.0 * step);
            } else {
                ad = hd[o].dab;
                fd = (fp[o] - 2.0 * f0[o] + fm[o]) / (step * step);
            }
            const double rel =
                std::abs(ad - fd) / std::max(std::abs(ad), 1e-12);
            worst = std::max(worst, rel);
        }
    }
    return worst;
}

} // namespace hfm
