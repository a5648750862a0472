#include "train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <thread>

#include "errors.hpp"
#include "jet_engine.hpp"
#include "jet_rules.hpp"

namespace hfm {

void TrainConfig::validate() const {
    if (stage_epochs.empty())
        throw_invalid("at least one training stage is required");
    if (stage_epochs.size() != stage_lrs.size())
        throw_invalid("stage epoch counts and learning rates must have equal "
                      "length");
    for (int e : stage_epochs)
        if (e < 0) throw_invalid("stage epoch counts must be >= 0");
    for (double lr : stage_lrs)
        if (!(lr > 0.0) || !std::isfinite(lr))
            throw_invalid("learning rates must be positive and finite");
    if (batch_size < 1) throw_invalid("batch size must be >= 1");
    if (!(beta1 >= 0.0) || beta1 >= 1.0 || !(beta2 >= 0.0) || beta2 >= 1.0)
        throw_invalid("Adam beta parameters must lie in [0, 1)");
    if (!(epsilon > 0.0)) throw_invalid("Adam epsilon must be positive");
    if (!(flow_lr_scale > 0.0) || !std::isfinite(flow_lr_scale))
        throw_invalid("flow learning-rate scale must be positive");
    for (double s : first_layer_init_scale)
        if (!(s >= 0.0) || !std::isfinite(s))
            throw_invalid("first-layer init scales must be finite and >= 0");
    const double ws[] = {w_data_c, w_data_d, w_e1, w_e2,
                         w_e3,     w_e4,     w_e5, w_e6};
    for (double w : ws)
        if (!(w >= 0.0) || !std::isfinite(w))
            throw_invalid("loss weights must be finite and >= 0");
    if (threads < 1) throw_invalid("thread count must be >= 1");
    flow.validate();
}

FlowParams TrainState::flow() const {
    FlowParams fp;
    fp.re_trainable = re_trainable;
    fp.pec_trainable = pec_trainable;
    fp.re = re_trainable ? std::exp(s_re) : re_fixed;
    fp.pec = pec_trainable ? std::exp(s_pec) : pec_fixed;
    return fp;
}

TrainState make_initial_state(const MlpArchitecture& arch,
                              const InputNormalization& norm,
                              const TrainConfig& cfg) {
    cfg.validate();
    if (norm.spatial_dim != arch.spatial_dim)
        throw_invalid("normalization dimension does not match architecture");
    TrainState st;
    st.arch = arch;
    st.norm = norm;
    st.params = initialize(arch, cfg.init_seed, cfg.first_layer_init_scale);
    st.re_trainable = cfg.flow.re_trainable;
    st.pec_trainable = cfg.flow.pec_trainable;
    st.re_fixed = cfg.flow.re;
    st.pec_fixed = cfg.flow.pec;
    st.s_re = st.re_trainable ? std::log(cfg.flow.re) : 0.0;
    st.s_pec = st.pec_trainable ? std::log(cfg.flow.pec) : 0.0;
    st.adam_m.assign(st.dof(), 0.0);
    st.adam_v.assign(st.dof(), 0.0);
    return st;
}

TrainState state_from_checkpoint(const Checkpoint& ck) {
    TrainState st;
    st.arch = ck.arch;
    st.norm = ck.norm;
    st.params = ck.params;
    st.re_trainable = ck.flow.re_trainable;
    st.pec_trainable = ck.flow.pec_trainable;
    st.re_fixed = ck.flow.re;
    st.pec_fixed = ck.flow.pec;
    st.s_re = st.re_trainable ? std::log(ck.flow.re) : 0.0;
    st.s_pec = st.pec_trainable ? std::log(ck.flow.pec) : 0.0;
    st.adam_m.assign(st.dof(), 0.0);
    st.adam_v.assign(st.dof(), 0.0);
    return st;
}

Checkpoint checkpoint_from_state(const TrainState& st) {
    Checkpoint ck;
    ck.arch = st.arch;
    ck.norm = st.norm;
    ck.flow = st.flow();
    ck.params = st.params;
    return ck;
}

namespace {

/// Per-tile partial sums. Tiles are reduced in ascending tile order so the
/// result does not depend on how tiles were distributed over threads.
struct TileAccum {
    double data_c = 0.0, data_d = 0.0;
    double e[6] = {};
    double g_sre = 0.0, g_spec = 0.0;
    bool finite = true;
    std::size_t bad_point = 0;
};

struct LossWeights {
    double wc = 1.0, wd = 1.0;
    double we[6] = {1.0, 1.0, 1.0, 1.0, 1.0, 1.0};
};

LossWeights weights_of(const TrainConfig& cfg) {
    return {cfg.w_data_c,
            cfg.w_data_d,
            {cfg.w_e1, cfg.w_e2, cfg.w_e3, cfg.w_e4, cfg.w_e5, cfg.w_e6}};
}

/// Shared per-call inputs of the tile pipeline.
struct PassContext {
    const JetEngine& eng;
    const MlpParams& params;
    int dim;
    FlowParams fp;
    LossWeights lw;
    bool do_data;
    bool do_residual;
    double inv_data;     ///< 1/B of the data batch (0 when unused)
    double inv_residual; ///< 1/B of the residual batch (0 when unused)
};

/// Accumulate squared terms for lane p and, when `adj` is set, add the
/// corresponding adjoint seeds for the reverse sweep. The seeds are the
/// exact partial derivatives of the weighted batch-mean loss with respect
/// to each output channel.
void lane_terms(const PassContext& px, const FieldJet& jet,
                const SampleRecord& rec, int p, double* adj,
                TileAccum& acc) {
    constexpr int kTile = JetEngine::kTile;
    const int nch = jet_channels(px.dim);
    const double iRe = px.fp.inv_re();
    const double iPec = px.fp.inv_pec();

    ResidualSet r = px.dim == 2 ? residuals_2d(jet, px.fp)
                                : residuals_3d(jet, px.fp);
    const double res[6] = {r.e1, r.e2, r.e3, r.e4, r.e5, r.e6};

    double cerr = 0.0, derr = 0.0;
    if (px.do_data) {
        cerr = jet.value[kFieldC] - rec.c;
        derr = jet.value[kFieldD] - (1.0 - rec.c);
        acc.data_c += cerr * cerr;
        acc.data_d += derr * derr;
    }
    if (px.do_residual)
        for (int i = 0; i < 6; ++i) acc.e[i] += res[i] * res[i];

    if (!acc.finite) return;
    for (int i = 0; i < 6; ++i)
        if (!std::isfinite(res[i] * res[i])) acc.finite = false;
    if (!std::isfinite(cerr * cerr) || !std::isfinite(derr * derr))
        acc.finite = false;
    if (!acc.finite) {
        acc.bad_point = static_cast<std::size_t>(p);
        return;
    }
    if (!adj) return;

    // g[i] = d(total)/d(e_i); dc, dd = d(total)/d(c_pred), d(d_pred).
    double g[6];
    for (int i = 0; i < 6; ++i)
        g[i] = px.do_residual ? 2.0 * px.lw.we[i] * res[i] * px.inv_residual
                              : 0.0;
    const double dc = px.do_data ? 2.0 * px.lw.wc * cerr * px.inv_data : 0.0;
    const double dd = px.do_data ? 2.0 * px.lw.wd * derr * px.inv_data : 0.0;

    const double u = jet.value[kFieldU];
    const double v = jet.value[kFieldV];
    const double w = jet.value[kFieldW];
    auto slot = [&](int o, int c) {
        return (static_cast<std::size_t>(o) * nch + c) * kTile + p;
    };

    if (px.dim == 2) {
        // outputs: c=0, d=1, u=2, v=3, p=4
        // channels: value=0, t=1, x=2, y=3, xx=4, yy=5
        adj[slot(0, 0)] += dc;
        adj[slot(1, 0)] += dd;
        adj[slot(2, 0)] += g[0] * jet.d1[kFieldC][1] + g[1] * jet.d1[kFieldD][1] +
                           g[2] * jet.d1[kFieldU][1] + g[3] * jet.d1[kFieldV][1];
        adj[slot(3, 0)] += g[0] * jet.d1[kFieldC][2] + g[1] * jet.d1[kFieldD][2] +
                           g[2] * jet.d1[kFieldU][2] + g[3] * jet.d1[kFieldV][2];

        adj[slot(0, 1)] += g[0];
        adj[slot(1, 1)] += g[1];
        adj[slot(2, 1)] += g[2];
        adj[slot(3, 1)] += g[3];

        adj[slot(0, 2)] += g[0] * u;
        adj[slot(1, 2)] += g[1] * u;
        adj[slot(2, 2)] += g[2] * u + g[5];
        adj[slot(3, 2)] += g[3] * u;
        adj[slot(4, 2)] += g[2];

        adj[slot(0, 3)] += g[0] * v;
        adj[slot(1, 3)] += g[1] * v;
        adj[slot(2, 3)] += g[2] * v;
        adj[slot(3, 3)] += g[3] * v + g[5];
        adj[slot(4, 3)] += g[3];

        for (int k = 4; k <= 5; ++k) {
            adj[slot(0, k)] += -g[0] * iPec;
            adj[slot(1, k)] += -g[1] * iPec;
            adj[slot(2, k)] += -g[2] * iRe;
            adj[slot(3, k)] += -g[3] * iRe;
        }

        const double lap_c = jet.d2[kFieldC][0] + jet.d2[kFieldC][1];
        const double lap_d = jet.d2[kFieldD][0] + jet.d2[kFieldD][1];
        const double lap_u = jet.d2[kFieldU][0] + jet.d2[kFieldU][1];
        const double lap_v = jet.d2[kFieldV][0] + jet.d2[kFieldV][1];
        acc.g_spec += (g[0] * lap_c + g[1] * lap_d) * iPec;
        acc.g_sre += (g[2] * lap_u + g[3] * lap_v) * iRe;
    } else {
        // outputs: c=0, d=1, u=2, v=3, w=4, p=5
        // channels: value=0, t=1, x=2, y=3, z=4, xx=5, yy=6, zz=7
        adj[slot(0, 0)] += dc;
        adj[slot(1, 0)] += dd;
        const int fields[5] = {kFieldC, kFieldD, kFieldU, kFieldV, kFieldW};
        for (int m = 0; m < 3; ++m) { // velocity component m seeds via d/dx_m
            double s = 0.0;
            for (int q = 0; q < 5; ++q)
                s += g[q] * jet.d1[fields[q]][1 + m];
            adj[slot(2 + m, 0)] += s;
        }

        for (int q = 0; q < 5; ++q) adj[slot(q, 1)] += g[q];

        const double vel[3] = {u, v, w};
        for (int m = 0; m < 3; ++m) {
            for (int q = 0; q < 5; ++q)
                adj[slot(q, 2 + m)] += g[q] * vel[m];
            adj[slot(2 + m, 2 + m)] += g[5]; // continuity
            adj[slot(5, 2 + m)] += g[2 + m]; // pressure gradient
        }

        for (int k = 5; k <= 7; ++k) {
            adj[slot(0, k)] += -g[0] * iPec;
            adj[slot(1, k)] += -g[1] * iPec;
            for (int m = 0; m < 3; ++m) adj[slot(2 + m, k)] += -g[2 + m] * iRe;
        }

        auto lap = [&](int f) {
            return jet.d2[f][0] + jet.d2[f][1] + jet.d2[f][2];
        };
        acc.g_spec += (g[0] * lap(kFieldC) + g[1] * lap(kFieldD)) * iPec;
        acc.g_sre += (g[2] * lap(kFieldU) + g[3] * lap(kFieldV) +
                      g[4] * lap(kFieldW)) *
                     iRe;
    }
}

/// Run one pass (data terms, residual terms, or both) over `recs`,
/// accumulating squared-term sums per tile and, when grad is nonempty, the
/// network-parameter gradient into grad[0..P) plus exponent terms into the
/// tile accumulators. Tiles are statically assigned tile % threads == tid;
/// each extra thread gets its own gradient buffer, reduced afterwards in
/// thread order.
void run_pass(const PassContext& px, std::span<const SampleRecord> recs,
              int threads, std::span<double> grad,
              std::vector<TileAccum>& accums, std::size_t base_index) {
    constexpr int kTile = JetEngine::kTile;
    const int dim = px.dim;
    const int in_arity = dim + 1;
    const std::size_t count = recs.size();
    const std::size_t ntiles = (count + kTile - 1) / kTile;
    accums.assign(ntiles, TileAccum{});
    const bool want_grad = !grad.empty();
    const std::size_t pcount = px.params.data.size();

    const int nout = px.eng.arch().output_arity();
    const int nch = px.eng.channels();
    const std::size_t adj_size =
        static_cast<std::size_t>(nout) * nch * kTile;

    auto work = [&](int tid, double* gbuf) {
        JetEngine::Workspace ws = px.eng.make_workspace();
        std::vector<double> pts(static_cast<std::size_t>(kTile) * in_arity);
        for (std::size_t tile = tid; tile < ntiles;
             tile += static_cast<std::size_t>(threads)) {
            const std::size_t begin = tile * kTile;
            const int n = static_cast<int>(
                std::min<std::size_t>(kTile, count - begin));
            for (int p = 0; p < n; ++p) {
                const SampleRecord& r = recs[begin + p];
                double* row = pts.data() + static_cast<std::size_t>(p) * in_arity;
                row[0] = r.t;
                row[1] = r.x;
                row[2] = r.y;
                if (dim == 3) row[3] = r.z;
            }
            px.eng.forward_tile(px.params, pts.data(), n, ws);
            TileAccum& acc = accums[tile];
            const int bad = px.eng.first_non_finite(ws, n);
            if (bad >= 0) {
                acc.finite = false;
                acc.bad_point = static_cast<std::size_t>(bad);
                continue;
            }
            double* adj = nullptr;
            if (want_grad) {
                adj = px.eng.output_adjoint(ws);
                std::memset(adj, 0, adj_size * sizeof(double));
            }
            for (int p = 0; p < n; ++p)
                lane_terms(px, px.eng.read_jet(ws, p), recs[begin + p], p,
                           acc.finite ? adj : nullptr, acc);
            if (want_grad && acc.finite)
                px.eng.backward_tile(px.params, ws, gbuf);
        }
    };

    if (threads <= 1 || ntiles <= 1) {
        work(0, want_grad ? grad.data() : nullptr);
    } else {
        std::vector<std::vector<double>> extra(
            static_cast<std::size_t>(threads) - 1);
        for (auto& g : extra) g.assign(want_grad ? pcount : 0, 0.0);
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads) - 1);
        for (int tid = 1; tid < threads; ++tid)
            pool.emplace_back(work, tid,
                              want_grad ? extra[tid - 1].data() : nullptr);
        work(0, want_grad ? grad.data() : nullptr);
        for (auto& th : pool) th.join();
        if (want_grad)
            for (const auto& g : extra)
                for (std::size_t i = 0; i < pcount; ++i) grad[i] += g[i];
    }

    for (std::size_t tile = 0; tile < ntiles; ++tile)
        if (!accums[tile].finite)
            throw DivergedError(
                "loss evaluation produced a non-finite value at point index " +
                    std::to_string(base_index + tile * kTile +
                                   accums[tile].bad_point),
                base_index + tile * kTile + accums[tile].bad_point);
}

LossBreakdown loss_core(const TrainState& st, const TrainConfig& cfg,
                        std::span<const SampleRecord> batch,
                        std::span<const SampleRecord> residual_batch,
                        std::span<double> grad) {
    if (batch.empty()) throw_invalid("training batch must not be empty");
    st.arch.validate();
    if (st.params.data.size() != st.arch.param_count())
        throw_invalid("state parameter vector does not match architecture");
    if (!grad.empty()) {
        if (grad.size() != st.dof())
            throw_invalid("gradient buffer length does not match the degrees "
                          "of freedom");
        std::fill(grad.begin(), grad.end(), 0.0);
    }

    const bool same_points = residual_batch.empty();
    const LossWeights lw = weights_of(cfg);
    const FlowParams fp = st.flow();
    JetEngine eng(st.arch, st.norm);

    PassContext px{eng,
                   st.params,
                   st.arch.spatial_dim,
                   fp,
                   lw,
                   /*do_data=*/true,
                   /*do_residual=*/same_points,
                   1.0 / static_cast<double>(batch.size()),
                   same_points ? 1.0 / static_cast<double>(batch.size()) : 0.0,
    };

    std::span<double> net_grad =
        grad.empty() ? grad : grad.subspan(0, st.params.data.size());

    std::vector<TileAccum> accums;
    run_pass(px, batch, cfg.threads, net_grad, accums, 0);

    LossBreakdown out;
    double g_sre = 0.0, g_spec = 0.0;
    for (const TileAccum& a : accums) {
        out.data_c += a.data_c;
        out.data_d += a.data_d;
        out.e1 += a.e[0];
        out.e2 += a.e[1];
        out.e3 += a.e[2];
        out.e4 += a.e[3];
        out.e5 += a.e[4];
        out.e6 += a.e[5];
        g_sre += a.g_sre;
        g_spec += a.g_spec;
    }

    if (!same_points) {
        PassContext rx = px;
        rx.do_data = false;
        rx.do_residual = true;
        rx.inv_data = 0.0;
        rx.inv_residual = 1.0 / static_cast<double>(residual_batch.size());
        std::vector<TileAccum> raccums;
        run_pass(rx, residual_batch, cfg.threads, net_grad, raccums, 0);
        for (const TileAccum& a : raccums) {
            out.e1 += a.e[0];
            out.e2 += a.e[1];
            out.e3 += a.e[2];
            out.e4 += a.e[3];
            out.e5 += a.e[4];
            out.e6 += a.e[5];
            g_sre += a.g_sre;
            g_spec += a.g_spec;
        }
        const double inv = rx.inv_residual;
        out.e1 *= inv;
        out.e2 *= inv;
        out.e3 *= inv;
        out.e4 *= inv;
        out.e5 *= inv;
        out.e6 *= inv;
    } else {
        const double inv = px.inv_residual;
        out.e1 *= inv;
        out.e2 *= inv;
        out.e3 *= inv;
        out.e4 *= inv;
        out.e5 *= inv;
        out.e6 *= inv;
    }
    out.data_c *= px.inv_data;
    out.data_d *= px.inv_data;

    out.total = lw.wc * out.data_c + lw.wd * out.data_d + lw.we[0] * out.e1 +
                lw.we[1] * out.e2 + lw.we[2] * out.e3 + lw.we[3] * out.e4 +
                lw.we[4] * out.e5 + lw.we[5] * out.e6;
    if (!std::isfinite(out.total))
        throw DivergedError("batch loss is not finite", 0);

    if (!grad.empty()) {
        std::size_t idx = st.params.data.size();
        if (st.re_trainable) grad[idx++] = g_sre;
        if (st.pec_trainable) grad[idx++] = g_spec;
    }
    return out;
}

} // namespace

LossBreakdown batch_loss(const TrainState& st, const TrainConfig& cfg,
                         std::span<const SampleRecord> batch,
                         std::span<const SampleRecord> residual_batch) {
    return loss_core(st, cfg, batch, residual_batch, {});
}

LossBreakdown batch_loss_grad(const TrainState& st, const TrainConfig& cfg,
                              std::span<const SampleRecord> batch,
                              std::span<const SampleRecord> residual_batch,
                              std::span<double> grad) {
    if (grad.empty())
        throw_invalid("batch_loss_grad requires a gradient buffer");
    return loss_core(st, cfg, batch, residual_batch, grad);
}

void adam_step(TrainState& st, std::span<const double> grad, double lr,
               const TrainConfig& cfg) {
    if (grad.size() != st.dof())
        throw_invalid("gradient length does not match the degrees of freedom");
    for (std::size_t i = 0; i < grad.size(); ++i)
        if (!std::isfinite(grad[i]))
            throw DivergedError("non-finite gradient entry at index " +
                                    std::to_string(i),
                                i);
    if (!(lr > 0.0) || !std::isfinite(lr))
        throw_invalid("learning rate must be positive");

    st.step += 1;
    const double t = static_cast<double>(st.step);
    const double bc1 = 1.0 - std::pow(cfg.beta1, t);
    const double bc2 = 1.0 - std::pow(cfg.beta2, t);

    auto update = [&](std::size_t i, double& x, double rate) {
        double& m = st.adam_m[i];
        double& v = st.adam_v[i];
        const double g = grad[i];
        m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
        v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g;
        const double mhat = m / bc1;
        const double vhat = v / bc2;
        x -= rate * mhat / (std::sqrt(vhat) + cfg.epsilon);
    };

    const std::size_t pcount = st.params.data.size();
    for (std::size_t i = 0; i < pcount; ++i)
        update(i, st.params.data[i], lr);
    std::size_t idx = pcount;
    if (st.re_trainable) {
        update(idx, st.s_re, lr * cfg.flow_lr_scale);
        ++idx;
    }
    if (st.pec_trainable) update(idx, st.s_pec, lr * cfg.flow_lr_scale);
}

std::vector<std::uint32_t> shuffled_indices(std::size_t n,
                                            std::mt19937_64& rng) {
    std::vector<std::uint32_t> idx(n);
    for (std::size_t i = 0; i < n; ++i)
        idx[i] = static_cast<std::uint32_t>(i);
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(idx[i - 1], idx[j]);
    }
    return idx;
}

const char* const kTrainLogHeader =
    "epoch,stage,lr,total,data_c,data_d,e1,e2,e3,e4,e5,e6,Re,Pec";

std::string format_epoch_row(const EpochRow& row) {
    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,"
                  "%.17g,%.17g,%.17g,%.17g",
                  row.epoch, row.stage, row.lr, row.loss.total,
                  row.loss.data_c, row.loss.data_d, row.loss.e1, row.loss.e2,
                  row.loss.e3, row.loss.e4, row.loss.e5, row.loss.e6, row.re,
                  row.pec);
    return buf;
}

TrainResult train(const TrainConfig& cfg, const MlpArchitecture& arch,
                  const SampledDataset& data,
                  const SampledDataset* collocation, const TrainState* resume,
                  const std::function<void(const EpochRow&)>& on_epoch) {
    cfg.validate();
    arch.validate();
    if (data.records.empty()) throw_invalid("training dataset is empty");
    if (data.spatial_dim != arch.spatial_dim)
        throw_invalid("dataset dimension (" +
                      std::to_string(data.spatial_dim) +
                      ") does not match the architecture (" +
                      std::to_string(arch.spatial_dim) + ")");
    for (const SampleRecord& r : data.records)
        if (!std::isfinite(r.t) || !std::isfinite(r.x) ||
            !std::isfinite(r.y) || !std::isfinite(r.z) || !std::isfinite(r.c))
            throw_invalid("dataset contains non-finite values");
    const bool separate = collocation != nullptr;
    if (separate) {
        if (collocation->records.empty())
            throw_invalid("collocation dataset is empty");
        if (collocation->spatial_dim != arch.spatial_dim)
            throw_invalid("collocation dimension does not match the "
                          "architecture");
    }

    TrainState st;
    if (resume) {
        if (!(resume->arch == arch))
            throw_invalid("resume state architecture does not match the "
                          "requested architecture");
        st = *resume;
    } else {
        // Normalize from the bounding box of everything the network will see.
        const int nc = arch.spatial_dim + 1;
        std::vector<double> lo(nc, 1e300), hi(nc, -1e300);
        auto absorb = [&](const SampleRecord& r) {
            const double coords[4] = {r.t, r.x, r.y, r.z};
            for (int i = 0; i < nc; ++i) {
                lo[i] = std::min(lo[i], coords[i]);
                hi[i] = std::max(hi[i], coords[i]);
            }
        };
        for (const SampleRecord& r : data.records) absorb(r);
        if (separate)
            for (const SampleRecord& r : collocation->records) absorb(r);
        const InputNormalization norm =
            InputNormalization::from_bounds(arch.spatial_dim, lo, hi);
        st = make_initial_state(arch, norm, cfg);
    }

    std::ofstream log;
    if (!cfg.log_path.empty()) {
        log.open(cfg.log_path, std::ios::binary | std::ios::trunc);
        if (!log)
            throw_io("cannot open training log '" + cfg.log_path +
                     "' for writing");
        log << kTrainLogHeader << '\n';
        log.flush();
    }
    auto save = [&](const std::string& path) {
        if (!path.empty()) save_checkpoint(checkpoint_from_state(st), path);
    };

    TrainResult result;
    const std::size_t n_data = data.records.size();
    const std::size_t batch =
        std::min<std::size_t>(static_cast<std::size_t>(cfg.batch_size),
                              n_data);
    std::mt19937_64 shuffle_rng(cfg.shuffle_seed);
    std::vector<double> grad(st.dof());
    std::vector<SampleRecord> batch_buf(batch), res_buf;

    int global_epoch = 0;
    for (std::size_t stage = 0; stage < cfg.stage_epochs.size(); ++stage) {
        const double lr = cfg.stage_lrs[stage];
        for (int ep = 0; ep < cfg.stage_epochs[stage]; ++ep) {
            const auto order = shuffled_indices(n_data, shuffle_rng);
            std::vector<std::uint32_t> rorder;
            if (separate)
                rorder = shuffled_indices(collocation->records.size(),
                                          shuffle_rng);

            LossBreakdown sums; // component sums weighted by batch sizes
            for (std::size_t start = 0; start < n_data; start += batch) {
                const std::size_t nb = std::min(batch, n_data - start);
                for (std::size_t k = 0; k < nb; ++k)
                    batch_buf[k] = data.records[order[start + k]];
                std::span<const SampleRecord> rspan;
                if (separate) {
                    res_buf.resize(nb);
                    const std::size_t m = rorder.size();
                    for (std::size_t k = 0; k < nb; ++k)
                        res_buf[k] =
                            collocation->records[rorder[(start + k) % m]];
                    rspan = res_buf;
                }
                const LossBreakdown lb = batch_loss_grad(
                    st, cfg,
                    std::span<const SampleRecord>(batch_buf.data(), nb), rspan,
                    grad);
                adam_step(st, grad, lr, cfg);

                const double scale = static_cast<double>(nb);
                sums.total += lb.total * scale;
                sums.data_c += lb.data_c * scale;
                sums.data_d += lb.data_d * scale;
                sums.e1 += lb.e1 * scale;
                sums.e2 += lb.e2 * scale;
                sums.e3 += lb.e3 * scale;
                sums.e4 += lb.e4 * scale;
                sums.e5 += lb.e5 * scale;
                sums.e6 += lb.e6 * scale;
            }

            EpochRow row;
            row.epoch = ++global_epoch;
            row.stage = static_cast<int>(stage) + 1;
            row.lr = lr;
            const double invn = 1.0 / static_cast<double>(n_data);
            row.loss.data_c = sums.data_c * invn;
            row.loss.data_d = sums.data_d * invn;
            row.loss.e1 = sums.e1 * invn;
            row.loss.e2 = sums.e2 * invn;
            row.loss.e3 = sums.e3 * invn;
            row.loss.e4 = sums.e4 * invn;
            row.loss.e5 = sums.e5 * invn;
            row.loss.e6 = sums.e6 * invn;
            row.loss.total = cfg.w_data_c * row.loss.data_c +
                             cfg.w_data_d * row.loss.data_d +
                             cfg.w_e1 * row.loss.e1 + cfg.w_e2 * row.loss.e2 +
                             cfg.w_e3 * row.loss.e3 + cfg.w_e4 * row.loss.e4 +
                             cfg.w_e5 * row.loss.e5 + cfg.w_e6 * row.loss.e6;
            const FlowParams fp = st.flow();
            row.re = fp.re;
            row.pec = fp.pec;
            result.history.push_back(row);
            if (log.is_open()) {
                log << format_epoch_row(row) << '\n';
                log.flush();
            }
            if (on_epoch) on_epoch(row);
        }
        if (!cfg.checkpoint_path.empty())
            save(cfg.checkpoint_path + ".stage" + std::to_string(stage + 1));
    }
    save(cfg.checkpoint_path);
    result.state = std::move(st);
    return result;
}

FlowInference infer_flow_parameters(
    const TrainConfig& cfg, const MlpArchitecture& arch,
    const SampledDataset& data, const SampledDataset* collocation,
    const std::function<void(const EpochRow&)>& on_epoch) {
    if (!cfg.flow.re_trainable && !cfg.flow.pec_trainable)
        throw_invalid("flow-parameter inference requires at least one "
                      "trainable flow parameter");
    FlowInference out;
    out.run = train(cfg, arch, data, collocation, nullptr, on_epoch);
    out.flow = out.run.state.flow();
    return out;
}

} // namespace hfm
