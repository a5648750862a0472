#include "jet_engine.hpp"

#include <cmath>
#include <cstring>

#include "errors.hpp"
#include "jet_rules.hpp"

namespace hfm {

JetEngine::JetEngine(const MlpArchitecture& arch, const InputNormalization& norm)
    : arch_(arch), norm_(norm) {
    arch_.validate();
    if (norm_.spatial_dim != arch_.spatial_dim)
        throw_invalid("normalization dimension does not match architecture");
    nch_ = jet_channels(arch_.spatial_dim);
    n_weight_layers_ = arch_.layer_count();

    z_off_.assign(n_weight_layers_ + 1, 0);
    a_off_.assign(n_weight_layers_, 0);
    a_off_[0] = 0;
    a_total_ = slab_size(arch_.input_arity());
    for (int l = 1; l < n_weight_layers_; ++l) {
        a_off_[l] = a_total_;
        a_total_ += slab_size(arch_.layer_out(l - 1));
    }
    z_total_ = 0;
    for (int l = 1; l <= n_weight_layers_; ++l) {
        z_off_[l] = z_total_;
        z_total_ += slab_size(arch_.layer_out(l - 1));
    }
}

JetEngine::Workspace JetEngine::make_workspace() const {
    Workspace ws;
    ws.z.assign(z_total_, 0.0);
    ws.a.assign(a_total_, 0.0);
    ws.zbar.assign(z_total_, 0.0);
    ws.abar.assign(a_total_, 0.0);
    return ws;
}

void JetEngine::forward_tile(const MlpParams& params, const double* pts, int n,
                             Workspace& ws) const {
    if (n < 1 || n > kTile)
        throw_invalid("tile point count out of range");
    if (params.data.size() != arch_.param_count())
        throw_invalid("parameter vector length does not match architecture");

    const int dim = arch_.spatial_dim;
    const int in_arity = arch_.input_arity();

    // Seed the input slab; idle lanes replicate point 0 so every lane stays
    // finite without contributing to anything (their adjoints remain zero).
    double* a0 = a_slab(ws, 0);
    for (int i = 0; i < in_arity; ++i) {
        double* slot = a0 + (static_cast<std::size_t>(i) * nch_) * kTile;
        for (int p = 0; p < kTile; ++p) {
            const double xi = pts[static_cast<std::size_t>(p < n ? p : 0) * in_arity + i];
            jet_input_fill(norm_, dim, i, xi, slot + p, kTile);
        }
    }

    const std::size_t cols = static_cast<std::size_t>(nch_) * kTile;
    for (int l = 0; l < n_weight_layers_; ++l) {
        const int nin = arch_.layer_in(l);
        const int nout = arch_.layer_out(l);
        const double* w = params.weights(arch_, l);
        const double* b = params.biases(arch_, l);
        const double* ain = a_slab(ws, l);
        double* z = z_slab(ws, l + 1);
        for (int j = 0; j < nout; ++j) {
            double* zj = z + static_cast<std::size_t>(j) * cols;
            std::memset(zj, 0, cols * sizeof(double));
            const double* wr = w + static_cast<std::size_t>(j) * nin;
            for (int k = 0; k < nin; ++k) {
                const double wjk = wr[k];
                const double* ak = ain + static_cast<std::size_t>(k) * cols;
                for (std::size_t cp = 0; cp < cols; ++cp) zj[cp] += wjk * ak[cp];
            }
            const double bj = b[j];
            for (int p = 0; p < kTile; ++p) zj[p] += bj;
        }
        if (l + 1 < n_weight_layers_) {
            double* aout = a_slab(ws, l + 1);
            for (int j = 0; j < nout; ++j) {
                const double* zj = z + static_cast<std::size_t>(j) * cols;
                double* aj = aout + static_cast<std::size_t>(j) * cols;
                for (int p = 0; p < kTile; ++p) {
                    double s0, s1, s2, s3;
                    act_derivs(arch_.activation, zj[p], s0, s1, s2, s3);
                    jet_activation_apply(s0, s1, s2, dim, zj + p, aj + p, kTile);
                }
            }
        }
    }
}

const double* JetEngine::output_slab(const Workspace& ws) const {
    return z_slab(ws, n_weight_layers_);
}

FieldJet JetEngine::read_jet(const Workspace& ws, int p) const {
    const int dim = arch_.spatial_dim;
    const double* out = output_slab(ws);
    FieldJet jet;
    jet.spatial_dim = dim;
    for (int o = 0; o < arch_.output_arity(); ++o) {
        const int f = (dim == 2 && o == 4) ? kFieldP : o;
        const double* zo = out + (static_cast<std::size_t>(o) * nch_) * kTile + p;
        jet.value[f] = zo[0];
        for (int c = 0; c <= dim; ++c)
            jet.d1[f][c] = zo[static_cast<std::size_t>(jet_grad_channel(c)) * kTile];
        for (int k = 0; k < dim; ++k)
            jet.d2[f][k] = zo[static_cast<std::size_t>(jet_hess_channel(dim, k)) * kTile];
    }
    return jet;
}

int JetEngine::first_non_finite(const Workspace& ws, int n) const {
    const double* out = output_slab(ws);
    const std::size_t cols = static_cast<std::size_t>(nch_) * kTile;
    for (int p = 0; p < n; ++p) {
        for (int o = 0; o < arch_.output_arity(); ++o) {
            const double* zo = out + static_cast<std::size_t>(o) * cols + p;
            for (int c = 0; c < nch_; ++c)
                if (!std::isfinite(zo[static_cast<std::size_t>(c) * kTile]))
                    return p;
        }
    }
    return -1;
}

double* JetEngine::output_adjoint(Workspace& ws) const {
    return ws.zbar.data() + z_off_[n_weight_layers_];
}

void JetEngine::backward_tile(const MlpParams& params, Workspace& ws,
                              double* grad) const {
    const int dim = arch_.spatial_dim;
    const std::size_t cols = static_cast<std::size_t>(nch_) * kTile;
    double lanes[kTile];

    for (int l = n_weight_layers_ - 1; l >= 0; --l) {
        const int nin = arch_.layer_in(l);
        const int nout = arch_.layer_out(l);
        const double* w = params.weights(arch_, l);
        const double* zb = ws.zbar.data() + z_off_[l + 1];
        const double* ain = a_slab(ws, l);
        double* gw = grad + arch_.weight_offset(l);
        double* gb = grad + arch_.bias_offset(l);

        // Weight and bias gradient: contraction over (channel, lane).
        for (int j = 0; j < nout; ++j) {
            const double* zbj = zb + static_cast<std::size_t>(j) * cols;
            for (int k = 0; k < nin; ++k) {
                const double* ak = ain + static_cast<std::size_t>(k) * cols;
                for (int p = 0; p < kTile; ++p) lanes[p] = 0.0;
                for (int c = 0; c < nch_; ++c) {
                    const double* zc = zbj + static_cast<std::size_t>(c) * kTile;
                    const double* ac = ak + static_cast<std::size_t>(c) * kTile;
                    for (int p = 0; p < kTile; ++p) lanes[p] += zc[p] * ac[p];
                }
                double s = 0.0;
                for (int p = 0; p < kTile; ++p) s += lanes[p];
                gw[static_cast<std::size_t>(j) * nin + k] += s;
            }
            double sb = 0.0;
            for (int p = 0; p < kTile; ++p) sb += zbj[p];
            gb[j] += sb;
        }

        if (l == 0) break; // input coordinates carry no parameters

        // Adjoint of the previous activation: abar = W^T * zbar.
        double* ab = ws.abar.data() + a_off_[l];
        for (int k = 0; k < nin; ++k) {
            double* abk = ab + static_cast<std::size_t>(k) * cols;
            std::memset(abk, 0, cols * sizeof(double));
            for (int j = 0; j < nout; ++j) {
                const double wjk = w[static_cast<std::size_t>(j) * nin + k];
                const double* zbj = zb + static_cast<std::size_t>(j) * cols;
                for (std::size_t cp = 0; cp < cols; ++cp) abk[cp] += wjk * zbj[cp];
            }
        }

        // Through the activation: zbar(l) from abar(l) and stored z(l).
        const double* zin = z_slab(ws, l);
        double* zbin = ws.zbar.data() + z_off_[l];
        for (int k = 0; k < nin; ++k) {
            const double* zk = zin + static_cast<std::size_t>(k) * cols;
            const double* abk = ab + static_cast<std::size_t>(k) * cols;
            double* zbk = zbin + static_cast<std::size_t>(k) * cols;
            for (int p = 0; p < kTile; ++p) {
                double s0, s1, s2, s3;
                act_derivs(arch_.activation, zk[p], s0, s1, s2, s3);
                jet_activation_backward(s1, s2, s3, dim, zk + p, abk + p,
                                        zbk + p, kTile);
            }
        }
    }
}

} // namespace hfm
