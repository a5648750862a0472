#ifndef HFM_TAPE_HPP
#define HFM_TAPE_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "hyperdual.hpp"

namespace hfm {

/// Index of a node on a Tape.
using VarId = std::uint32_t;

/// Elementary operations the tape understands. Anything else must be
/// composed from these at recording time; unsupported compositions are
/// impossible to express, so failures happen at program construction
/// rather than during evaluation.
enum class TapeOp : std::uint8_t {
    Input,  ///< placeholder bound to a value at evaluation time
    Const,  ///< fixed scalar
    Add, Sub, Mul,
    Neg,    ///< unary minus
    Inv,    ///< reciprocal (division records Inv followed by Mul)
    Sin, Cos, Exp, Tanh,
    PowC    ///< power with a constant real exponent
};

/// Value of a differentiated scalar together with its gradient with respect
/// to a chosen parameter subset.
struct GradientResult {
    double value = 0.0;
    std::vector<double> gradient;
};

/// Adjoint seed for a reverse sweep through hyperdual arithmetic: a weight
/// for each stored component of one output node. Setting e.g. weight.da = 1
/// and the rest 0 asks for the parameter gradient of that output's first
/// derivative along seed direction a.
struct ComponentAdjoint {
    VarId node = 0;
    HyperDual weight;
};

/// An expression DAG recorded once and replayed many times with fresh input
/// values. Supports plain evaluation, hyperdual evaluation (first and pure
/// or mixed second derivatives along two seeded input directions), reverse
/// accumulation of gradients, and reverse accumulation *through* hyperdual
/// arithmetic so that derivative-dependent quantities can themselves be
/// differentiated with respect to inputs.
class Tape {
public:
    /// Register an input slot. Evaluation binds values in registration order.
    VarId input();
    VarId constant(double value);

    VarId add(VarId a, VarId b);
    VarId sub(VarId a, VarId b);
    VarId mul(VarId a, VarId b);
    /// Recorded as reciprocal-then-multiply so reverse rules stay unary/binary.
    VarId div(VarId a, VarId b);
    VarId neg(VarId a);
    VarId inv(VarId a);
    VarId sin(VarId a);
    VarId cos(VarId a);
    VarId exp(VarId a);
    VarId tanh(VarId a);
    VarId pow(VarId a, double exponent);

    /// Designate a node as a program output. Order of marking = output order.
    void mark_output(VarId id);

    std::size_t node_count() const { return nodes_.size(); }
    std::size_t input_count() const { return input_ids_.size(); }
    const std::vector<VarId>& outputs() const { return outputs_; }

    /// Replay the program on plain doubles; returns the marked outputs.
    /// Raises NonFiniteError (with the node id) if any intermediate is
    /// NaN or infinite.
    std::vector<double> evaluate(std::span<const double> inputs) const;

    /// Replay on hyperdual numbers with unit seeds on inputs seed_a (slot
    /// `da`) and seed_b (slot `db`); both are *input indices*, and may be
    /// equal for pure second derivatives. Pass -1 to leave a slot unseeded.
    /// Returns the marked outputs.
    std::vector<HyperDual> evaluate_hyperdual(std::span<const double> inputs,
                                              int seed_a, int seed_b) const;

    /// Value of `output` and its gradient with respect to `params`, which
    /// must all be Input nodes. Parameters the output does not depend on
    /// receive an exact zero.
    GradientResult reverse_gradient(std::span<const double> inputs,
                                    VarId output,
                                    std::span<const VarId> params) const;

    /// Reverse sweep through a hyperdual replay: differentiates the scalar
    /// sum_k <seeds[k].weight, components of seeds[k].node> with respect to
    /// `params`. This is how losses that involve input derivatives (carried
    /// in the da/db/dab slots) are differentiated with respect to network
    /// parameters bound as tape inputs.
    GradientResult reverse_gradient_hyperdual(std::span<const double> inputs,
                                              int seed_a, int seed_b,
                                              std::span<const ComponentAdjoint> seeds,
                                              std::span<const VarId> params) const;

    /// Workspace-reusing variants for hot replay loops: fill `values` with
    /// every node's result (indexed by VarId).
    void evaluate_nodes(std::span<const double> inputs,
                        std::vector<double>& values) const;
    void evaluate_hyperdual_nodes(std::span<const double> inputs,
                                  int seed_a, int seed_b,
                                  std::vector<HyperDual>& values) const;

    /// Largest relative discrepancy between tape derivatives and central
    /// finite differences at the given point, over all outputs and input
    /// directions. order 1 checks first derivatives with stencil
    /// (f(x+h)-f(x-h))/2h; order 2 checks pure second derivatives with
    /// (f(x+h)-2f(x)+f(x-h))/h^2. Discrepancies are normalized by
    /// max(|derivative|, 1e-12).
    double finite_difference_check(std::span<const double> inputs,
                                   int order, double step) const;

private:
    struct Node {
        TapeOp op;
        VarId a = 0;     ///< first operand (unused for Input/Const)
        VarId b = 0;     ///< second operand (binary ops only)
        double c = 0.0;  ///< constant value / exponent
    };

    VarId push(TapeOp op, VarId a, VarId b, double c);
    VarId check_operand(VarId id) const;

    std::vector<Node> nodes_;
    std::vector<VarId> input_ids_;
    std::vector<VarId> outputs_;
};

} // namespace hfm

#endif
