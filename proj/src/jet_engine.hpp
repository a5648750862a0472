#ifndef HFM_JET_ENGINE_HPP
#define HFM_JET_ENGINE_HPP

#include <vector>

#include "mlp.hpp"

namespace hfm {

/// Batched evaluation of the network jet over tiles of points, plus the
/// reverse sweep that turns per-point adjoints of the output channels into
/// a parameter gradient. This is the training workhorse: all derivative
/// channels (value, d/dt, d/dx_k, d2/dx_k2) propagate together through each
/// layer, so one tile costs three small matrix products per layer.
///
/// Memory layout inside a tile: slot(neuron j, channel c, lane p) lives at
/// base + (j*channels + c)*kTile + p. Lanes are contiguous so the inner
/// loops vectorize; accumulation order (ascending fan-in, bias last,
/// ascending channel, ascending lane) is fixed so results are bit-identical
/// across thread counts and equal to the scalar forward_jet path.
class JetEngine {
public:
    static constexpr int kTile = 64;

    JetEngine(const MlpArchitecture& arch, const InputNormalization& norm);

    int channels() const { return nch_; }
    const MlpArchitecture& arch() const { return arch_; }

    /// Per-thread scratch. z holds pre-activations per layer, a the
    /// activated outputs (a[0] = seeded inputs); zbar/abar are the adjoint
    /// mirrors used by backward_tile.
    struct Workspace {
        std::vector<double> z, a, zbar, abar;
    };
    Workspace make_workspace() const;

    /// Evaluate a tile. `pts` is n rows of (t, x, y[, z]) in original
    /// coordinates, n in [1, kTile]. Lanes beyond n are padded with the
    /// first point and produce no gradient (their adjoints stay zero).
    void forward_tile(const MlpParams& params, const double* pts, int n,
                      Workspace& ws) const;

    /// Jet of lane p after forward_tile, in original coordinates.
    FieldJet read_jet(const Workspace& ws, int p) const;

    /// Direct view of the output slab after forward_tile: entry for output
    /// o, channel c, lane p is output_slab(ws)[(o*channels()+c)*kTile + p].
    const double* output_slab(const Workspace& ws) const;

    /// First lane in [0, n) whose output values/derivatives are not all
    /// finite, or -1 if the tile is clean.
    int first_non_finite(const Workspace& ws, int n) const;

    /// Adjoint buffer for the output slab (same layout as output_slab).
    /// Callers must fill every entry (zeros for unused lanes/channels)
    /// before backward_tile.
    double* output_adjoint(Workspace& ws) const;

    /// Reverse sweep: accumulates d(loss)/d(params) into `grad` (length
    /// param_count), given the output-slab adjoints. forward_tile must have
    /// run on this workspace with the same parameters.
    void backward_tile(const MlpParams& params, Workspace& ws,
                       double* grad) const;

private:
    std::size_t slab_size(int width) const {
        return static_cast<std::size_t>(width) * nch_ * kTile;
    }
    double* z_slab(Workspace& ws, int l) const { return ws.z.data() + z_off_[l]; }
    const double* z_slab(const Workspace& ws, int l) const {
        return ws.z.data() + z_off_[l];
    }
    double* a_slab(Workspace& ws, int l) const { return ws.a.data() + a_off_[l]; }
    const double* a_slab(const Workspace& ws, int l) const {
        return ws.a.data() + a_off_[l];
    }

    MlpArchitecture arch_;
    InputNormalization norm_;
    int nch_ = 0;
    int n_weight_layers_ = 0;
    // z slabs are indexed 1..L (pre-activation of layer l), a slabs 0..L-1
    // (a[0] is the seeded input block); offsets index into the z/a vectors.
    std::vector<std::size_t> z_off_, a_off_;
    std::size_t z_total_ = 0, a_total_ = 0;
};

} // namespace hfm

#endif
