#ifndef HFM_MLP_HPP
#define HFM_MLP_HPP

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace hfm {

enum class Activation : std::uint8_t { Sin = 0, Tanh = 1 };

/// Field slots in the network output and in FieldJet. The 2D network emits
/// (c, d, u, v, p); the w slot exists only in 3D.
enum FieldIndex : int {
    kFieldC = 0,
    kFieldD = 1,
    kFieldU = 2,
    kFieldV = 3,
    kFieldW = 4,
    kFieldP = 5
};

/// Shape of the shared multi-output approximator
/// (t, x, y[, z]) -> (c, d, u, v[, w], p).
struct MlpArchitecture {
    int spatial_dim = 2;
    int hidden_layers = 6;
    int hidden_width = 50;
    Activation activation = Activation::Sin;

    int input_arity() const { return spatial_dim + 1; }
    int output_arity() const { return spatial_dim == 2 ? 5 : 6; }
    /// Number of weight layers (hidden layers + output layer).
    int layer_count() const { return hidden_layers + 1; }
    /// Fan-in / fan-out of weight layer l in [0, layer_count).
    int layer_in(int l) const { return l == 0 ? input_arity() : hidden_width; }
    int layer_out(int l) const {
        return l == layer_count() - 1 ? output_arity() : hidden_width;
    }

    std::size_t param_count() const;
    /// Offset of the row-major weight matrix of layer l in the flat vector.
    std::size_t weight_offset(int l) const;
    /// Offset of the bias vector of layer l in the flat vector.
    std::size_t bias_offset(int l) const;

    /// Throws on non-positive sizes or unsupported spatial dimension.
    void validate() const;

    bool operator==(const MlpArchitecture&) const = default;
};

/// Flat parameter vector; layer l occupies [weight_offset(l), bias_offset(l))
/// as a row-major (out x in) matrix followed by its bias of length out.
struct MlpParams {
    std::vector<double> data;

    std::size_t size() const { return data.size(); }
    double* weights(const MlpArchitecture& a, int l) {
        return data.data() + a.weight_offset(l);
    }
    const double* weights(const MlpArchitecture& a, int l) const {
        return data.data() + a.weight_offset(l);
    }
    double* biases(const MlpArchitecture& a, int l) {
        return data.data() + a.bias_offset(l);
    }
    const double* biases(const MlpArchitecture& a, int l) const {
        return data.data() + a.bias_offset(l);
    }
};

/// Glorot-uniform weights (U(-L, L), L = sqrt(6/(fan_in+fan_out))), zero
/// biases; deterministic for a given seed.
///
/// When `first_layer_weight_scale` is non-empty a frequency-seeded profile
/// is used instead: the FIRST layer draws the weights on input coordinate j
/// from U(-s_j, s_j) and its biases from U(-pi, pi), giving a sinusoidal
/// network frequencies up to ~s_j (in normalized input units) from the
/// start — gradient descent shrinks overly large frequencies far more
/// readily than it grows small ones, so a short training budget cannot
/// reach oscillatory targets from small weights. One entry applies to every
/// input; otherwise give one entry per input in (t, x, y[, z]) order, low
/// where the target varies slowly (frequencies within an entry's reach are
/// trainable from 0, so 0 is fine for gentle coordinates) and high where it
/// oscillates. The READOUT layer is left at zero so all outputs start at
/// rest: loss terms built from output derivatives start exactly null and
/// cannot erase the seeded frequencies before the data misfit locks in.
/// Interior layers are Glorot/zero-bias either way. An empty list keeps the
/// uniform Glorot scheme everywhere.
MlpParams initialize(const MlpArchitecture& arch, std::uint64_t seed,
                     const std::vector<double>& first_layer_weight_scale);
MlpParams initialize(const MlpArchitecture& arch, std::uint64_t seed,
                     double first_layer_weight_scale = 0.0);

/// Per-coordinate affine map x_hat = scale*x + shift applied to the inputs
/// (t first, then spatial coordinates) before the first layer. Derivatives
/// reported by forward_jet are always with respect to the ORIGINAL
/// coordinates: the map is affine, so seeding the first-derivative channels
/// with `scale` accounts for the chain rule exactly.
struct InputNormalization {
    int spatial_dim = 2;
    std::array<double, 4> scale{1.0, 1.0, 1.0, 1.0};
    std::array<double, 4> shift{0.0, 0.0, 0.0, 0.0};

    int coord_count() const { return spatial_dim + 1; }

    static InputNormalization identity(int spatial_dim);
    /// Map taking [lo, hi] per coordinate to [-1, 1]. Degenerate intervals
    /// (hi == lo) get scale 1 centered on the value.
    static InputNormalization from_bounds(int spatial_dim,
                                          std::span<const double> lo,
                                          std::span<const double> hi);

    bool operator==(const InputNormalization&) const = default;
};

/// Values and the derivatives the residuals need, at one point, in original
/// coordinates. Fields are indexed by FieldIndex; in 2D the w slot and all
/// z-derivative entries stay exactly zero, which is equivalent to the 3D
/// formulas with w ≡ 0 and no z-dependence.
struct FieldJet {
    int spatial_dim = 2;
    /// c, d, u, v, w, p
    std::array<double, 6> value{};
    /// d1[field][k], k: 0 = t, 1 = x, 2 = y, 3 = z
    std::array<std::array<double, 4>, 6> d1{};
    /// d2[field][k], k: 0 = xx, 1 = yy, 2 = zz
    std::array<std::array<double, 3>, 6> d2{};
};

/// Plain evaluation: fills out[0..output_arity) with (c,d,u,v[,w],p).
/// `point` is (t, x, y[, z]) in original coordinates.
void forward(const MlpParams& params, const MlpArchitecture& arch,
             const InputNormalization& norm, std::span<const double> point,
             std::span<double> out);

/// Evaluation with first time/space derivatives and pure second spatial
/// derivatives. The value entries agree bit-for-bit with forward().
FieldJet forward_jet(const MlpParams& params, const MlpArchitecture& arch,
                     const InputNormalization& norm,
                     std::span<const double> point);

} // namespace hfm

#endif
