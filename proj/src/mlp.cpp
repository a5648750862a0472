#include "mlp.hpp"

#include <cmath>
#include <random>
#include <string>

#include "errors.hpp"
#include "jet_rules.hpp"

namespace hfm {

std::size_t MlpArchitecture::param_count() const {
    std::size_t n = 0;
    for (int l = 0; l < layer_count(); ++l)
        n += static_cast<std::size_t>(layer_out(l)) * layer_in(l) + layer_out(l);
    return n;
}

std::size_t MlpArchitecture::weight_offset(int l) const {
    std::size_t off = 0;
    for (int k = 0; k < l; ++k)
        off += static_cast<std::size_t>(layer_out(k)) * layer_in(k) + layer_out(k);
    return off;
}

std::size_t MlpArchitecture::bias_offset(int l) const {
    return weight_offset(l) + static_cast<std::size_t>(layer_out(l)) * layer_in(l);
}

void MlpArchitecture::validate() const {
    if (spatial_dim != 2 && spatial_dim != 3)
        throw_invalid("spatial dimension must be 2 or 3, got " +
                      std::to_string(spatial_dim));
    if (hidden_layers < 1)
        throw_invalid("hidden layer count must be positive, got " +
                      std::to_string(hidden_layers));
    if (hidden_width < 1)
        throw_invalid("hidden width must be positive, got " +
                      std::to_string(hidden_width));
}

MlpParams initialize(const MlpArchitecture& arch, std::uint64_t seed,
                     const std::vector<double>& first_layer_weight_scale) {
    arch.validate();
    for (double s : first_layer_weight_scale)
        if (!(s >= 0.0) || !std::isfinite(s))
            throw_invalid(
                "first-layer weight scales must be finite and >= 0, got " +
                std::to_string(s));
    const int inputs = arch.layer_in(0);
    if (first_layer_weight_scale.size() > 1 &&
        static_cast<int>(first_layer_weight_scale.size()) != inputs)
        throw_invalid("first-layer weight scale needs 1 entry or one per "
                      "input coordinate (" +
                      std::to_string(inputs) + "), got " +
                      std::to_string(first_layer_weight_scale.size()));
    MlpParams p;
    p.data.assign(arch.param_count(), 0.0);
    std::mt19937_64 rng(seed);
    const bool freq_profile = !first_layer_weight_scale.empty();
    for (int l = 0; l < arch.layer_count(); ++l) {
        const int fan_in = arch.layer_in(l);
        const int fan_out = arch.layer_out(l);
        if (freq_profile && l == arch.layer_count() - 1)
            continue; // readout stays zero: outputs start at rest, so every
                      // derivative-based loss term starts exactly null and
                      // cannot flatten the seeded frequencies below.
        double* w = p.weights(arch, l);
        if (freq_profile && l == 0) {
            // Weight row-major [neuron][input]: per-input frequency range.
            for (int i = 0; i < fan_out * fan_in; ++i) {
                const int j = i % fan_in;
                const double s = first_layer_weight_scale.size() == 1
                                     ? first_layer_weight_scale[0]
                                     : first_layer_weight_scale[j];
                std::uniform_real_distribution<double> dist(-s, s);
                w[i] = s > 0.0 ? dist(rng) : 0.0;
            }
            // Phase diversity so the first layer spans both odd and even
            // components of its frequencies at initialization.
            const double pi = 4.0 * std::atan(1.0);
            std::uniform_real_distribution<double> phase(-pi, pi);
            double* b = p.biases(arch, l);
            for (int i = 0; i < fan_out; ++i) b[i] = phase(rng);
            continue;
        }
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        std::uniform_real_distribution<double> dist(-limit, limit);
        for (int i = 0; i < fan_out * fan_in; ++i) w[i] = dist(rng);
        // biases stay zero
    }
    return p;
}

MlpParams initialize(const MlpArchitecture& arch, std::uint64_t seed,
                     double first_layer_weight_scale) {
    if (!(first_layer_weight_scale >= 0.0) ||
        !std::isfinite(first_layer_weight_scale))
        throw_invalid("first-layer weight scale must be finite and >= 0, got " +
                      std::to_string(first_layer_weight_scale));
    if (first_layer_weight_scale == 0.0)
        return initialize(arch, seed, std::vector<double>{});
    return initialize(arch, seed,
                      std::vector<double>{first_layer_weight_scale});
}

InputNormalization InputNormalization::identity(int spatial_dim) {
    InputNormalization nm;
    nm.spatial_dim = spatial_dim;
    return nm;
}

InputNormalization InputNormalization::from_bounds(int spatial_dim,
                                                   std::span<const double> lo,
                                                   std::span<const double> hi) {
    InputNormalization nm;
    nm.spatial_dim = spatial_dim;
    const int n = nm.coord_count();
    if (static_cast<int>(lo.size()) != n || static_cast<int>(hi.size()) != n)
        throw_invalid("normalization bounds must cover all " +
                      std::to_string(n) + " input coordinates");
    for (int i = 0; i < n; ++i) {
        if (!(lo[i] <= hi[i]))
            throw_invalid("normalization bounds out of order for coordinate " +
                          std::to_string(i));
        const double span = hi[i] - lo[i];
        if (span > 0.0) {
            nm.scale[i] = 2.0 / span;
            nm.shift[i] = -(hi[i] + lo[i]) / span;
        } else {
            nm.scale[i] = 1.0;
            nm.shift[i] = -lo[i];
        }
    }
    return nm;
}

namespace {

void check_point(const MlpArchitecture& arch, const InputNormalization& norm,
                 std::span<const double> point) {
    if (static_cast<int>(point.size()) != arch.input_arity())
        throw_invalid("point has " + std::to_string(point.size()) +
                      " coordinates, architecture expects " +
                      std::to_string(arch.input_arity()));
    if (norm.spatial_dim != arch.spatial_dim)
        throw_invalid("normalization dimension does not match architecture");
    for (double c : point)
        if (!std::isfinite(c)) throw_invalid("non-finite input coordinate");
}

} // namespace

void forward(const MlpParams& params, const MlpArchitecture& arch,
             const InputNormalization& norm, std::span<const double> point,
             std::span<double> out) {
    if (static_cast<int>(out.size()) != arch.output_arity())
        throw_invalid("output span has wrong arity");
    // Evaluate through the jet path so plain values are bit-identical to the
    // value channel of forward_jet (a separate scalar loop could pick up
    // different FMA contraction under -march=native and drift by an ulp).
    const FieldJet jet = forward_jet(params, arch, norm, point);
    for (int o = 0; o < arch.output_arity(); ++o) {
        const int f = (arch.spatial_dim == 2 && o == 4) ? kFieldP : o;
        out[o] = jet.value[f];
    }
}

FieldJet forward_jet(const MlpParams& params, const MlpArchitecture& arch,
                     const InputNormalization& norm,
                     std::span<const double> point) {
    arch.validate();
    check_point(arch, norm, point);
    if (params.data.size() != arch.param_count())
        throw_invalid("parameter vector length does not match architecture");

    const int dim = arch.spatial_dim;
    const int nch = jet_channels(dim);
    const int wmax = std::max(arch.hidden_width,
                              std::max(arch.input_arity(), arch.output_arity()));
    // Per-neuron channel blocks, stride 1: slot(j, c) = buf[j*nch + c].
    std::vector<double> cur(static_cast<std::size_t>(wmax) * nch);
    std::vector<double> nxt(static_cast<std::size_t>(wmax) * nch);
    for (int i = 0; i < arch.input_arity(); ++i)
        jet_input_fill(norm, dim, i, point[i],
                       cur.data() + static_cast<std::size_t>(i) * nch, 1);

    for (int l = 0; l < arch.layer_count(); ++l) {
        const int nin = arch.layer_in(l);
        const int nout = arch.layer_out(l);
        const double* w = params.weights(arch, l);
        const double* b = params.biases(arch, l);
        const bool hidden = l + 1 < arch.layer_count();
        for (int j = 0; j < nout; ++j) {
            double* zj = nxt.data() + static_cast<std::size_t>(j) * nch;
            const double* wr = w + static_cast<std::size_t>(j) * nin;
            // Same per-channel accumulation order (ascending k, bias last)
            // as the batched tile engine, so values agree bit-for-bit.
            for (int c = 0; c < nch; ++c) {
                double acc = 0.0;
                for (int k = 0; k < nin; ++k)
                    acc += wr[k] * cur[static_cast<std::size_t>(k) * nch + c];
                zj[c] = acc;
            }
            zj[0] += b[j];
            if (hidden) {
                double s0, s1, s2, s3;
                act_derivs(arch.activation, zj[0], s0, s1, s2, s3);
                jet_activation_apply(s0, s1, s2, dim, zj, zj, 1);
            }
        }
        std::swap(cur, nxt);
    }

    FieldJet jet;
    jet.spatial_dim = dim;
    for (int o = 0; o < arch.output_arity(); ++o) {
        // Map network output index to the FieldJet slot: in 2D the w slot
        // is skipped, so (c,d,u,v,p) land on indices (0,1,2,3,5).
        const int f = (dim == 2 && o == 4) ? kFieldP : o;
        const double* zo = cur.data() + static_cast<std::size_t>(o) * nch;
        jet.value[f] = zo[0];
        for (int c = 0; c <= dim; ++c) jet.d1[f][c] = zo[jet_grad_channel(c)];
        for (int k = 0; k < dim; ++k) jet.d2[f][k] = zo[jet_hess_channel(dim, k)];
        for (int c = 0; c <= dim; ++c)
            if (!std::isfinite(jet.d1[f][c]) || !std::isfinite(jet.value[f]))
                throw NonFiniteError("non-finite network output", f);
    }
    return jet;
}

} // namespace hfm
