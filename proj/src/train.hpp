#ifndef HFM_TRAIN_HPP
#define HFM_TRAIN_HPP

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "checkpoint.hpp"
#include "dataset.hpp"
#include "mlp.hpp"
#include "physics.hpp"

namespace hfm {

/// Composite loss over one mini-batch. Every component is the batch MEAN of
/// the squared term (data misfits and equation residuals), so the gradient
/// scale does not depend on the batch size; `total` is exactly the weighted
/// sum of the components.
struct LossBreakdown {
    double total = 0.0;
    double data_c = 0.0;
    double data_d = 0.0;
    double e1 = 0.0, e2 = 0.0, e3 = 0.0, e4 = 0.0, e5 = 0.0, e6 = 0.0;
};

/// Optimization schedule and loss composition. Defaults follow the staged
/// plan 250/500/250 epochs at 1e-3/1e-4/1e-5 with batches of 10000 and the
/// standard Adam moments.
struct TrainConfig {
    std::vector<int> stage_epochs{250, 500, 250};
    std::vector<double> stage_lrs{1e-3, 1e-4, 1e-5};
    int batch_size = 10000;
    std::uint64_t shuffle_seed = 1;
    std::uint64_t init_seed = 1;
    /// Passed to initialize(): empty keeps Glorot everywhere; otherwise
    /// selects the frequency-seeded profile (first-layer weights U(-s,s)
    /// per input — one entry for all inputs or one per (t, x, y[, z]) —
    /// biases U(-pi,pi), readout zero) so sinusoidal networks start with
    /// the oscillatory modes short schedules cannot grow, while outputs
    /// start at rest so derivative-based loss terms cannot erase them.
    std::vector<double> first_layer_init_scale{};
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    /// Flow-parameter mode: fixed values, or trainable with these values as
    /// the initial guesses (optimized as unconstrained exponents).
    FlowParams flow = FlowParams::fixed(1.0, 1.0);
    /// Learning-rate multiplier for the two flow exponents. The staged
    /// schedule bounds each Adam parameter's total travel by roughly
    /// sum(lr * steps); with desk-scale epoch counts that is less than the
    /// ln(10) an exponent must cover from a guess of 1, so the exponents
    /// get a faster clock than the network weights.
    double flow_lr_scale = 10.0;

    double w_data_c = 1.0, w_data_d = 1.0;
    double w_e1 = 1.0, w_e2 = 1.0, w_e3 = 1.0, w_e4 = 1.0, w_e5 = 1.0,
           w_e6 = 1.0;

    int threads = 1;
    std::string checkpoint_path; ///< empty: keep everything in memory
    std::string log_path;        ///< empty: no CSV log

    void validate() const;
};

/// Mutable optimization state: network parameters, the two optional flow
/// exponents, and Adam moments over the joint degree-of-freedom vector
/// (network parameters first, then s_re, then s_pec where trainable).
struct TrainState {
    MlpArchitecture arch;
    InputNormalization norm;
    MlpParams params;

    bool re_trainable = false;
    bool pec_trainable = false;
    double re_fixed = 1.0, pec_fixed = 1.0; ///< used when not trainable
    double s_re = 0.0, s_pec = 0.0;         ///< exponents when trainable

    std::vector<double> adam_m, adam_v;
    std::uint64_t step = 0;

    std::size_t dof() const {
        return params.data.size() + (re_trainable ? 1 : 0) +
               (pec_trainable ? 1 : 0);
    }
    /// Current flow parameters (exponentials applied when trainable).
    FlowParams flow() const;
};

/// Fresh state: seeded Glorot network, exponents at log of the configured
/// guesses, zero moments.
TrainState make_initial_state(const MlpArchitecture& arch,
                              const InputNormalization& norm,
                              const TrainConfig& cfg);

/// Restart state from a checkpoint: parameters, normalization, and flow
/// values are restored; optimizer moments start fresh (the checkpoint
/// format stores the model, not the optimizer).
TrainState state_from_checkpoint(const Checkpoint& ck);

Checkpoint checkpoint_from_state(const TrainState& st);

/// Loss of one batch. Data terms use `batch`; residual terms use
/// `residual_batch` when nonempty and the batch's own coordinates otherwise
/// (the same-as-data policy). A non-finite evaluation raises a
/// divergence error carrying the offending point index.
LossBreakdown batch_loss(const TrainState& st, const TrainConfig& cfg,
                         std::span<const SampleRecord> batch,
                         std::span<const SampleRecord> residual_batch = {});

/// batch_loss plus d(total)/d(dof) accumulated into `grad` (zeroed first;
/// length must equal st.dof()).
LossBreakdown batch_loss_grad(const TrainState& st, const TrainConfig& cfg,
                              std::span<const SampleRecord> batch,
                              std::span<const SampleRecord> residual_batch,
                              std::span<double> grad);

/// One Adam update of the joint vector with bias correction; the flow
/// exponents use lr * cfg.flow_lr_scale. Rejects non-finite gradients.
void adam_step(TrainState& st, std::span<const double> grad, double lr,
               const TrainConfig& cfg);

/// Fisher-Yates shuffle of 0..n-1 (explicit implementation so the epoch
/// ordering is stable across standard libraries, not just across runs).
std::vector<std::uint32_t> shuffled_indices(std::size_t n,
                                            std::mt19937_64& rng);

/// One logged epoch: global 1-based epoch number, 1-based stage, the
/// learning rate, dataset-mean loss components, and the flow parameters
/// after the epoch.
struct EpochRow {
    int epoch = 0;
    int stage = 0;
    double lr = 0.0;
    LossBreakdown loss;
    double re = 0.0, pec = 0.0;
};

/// Header and row formatting of the training log CSV (shared between the
/// trainer and anything that wants to parse it back).
extern const char* const kTrainLogHeader;
std::string format_epoch_row(const EpochRow& row);

struct TrainResult {
    TrainState state;
    std::vector<EpochRow> history;
};

/// Run the staged schedule: per epoch, shuffle (seeded), one Adam step per
/// mini-batch, one history row. Writes the log incrementally and a
/// checkpoint at every stage boundary (path + ".stageK") plus the final
/// checkpoint at the configured path. On divergence the error propagates
/// after the log flush; previously written checkpoints are left intact.
/// `resume` restarts from an existing state (architecture must match);
/// `collocation` supplies separate residual points when given.
TrainResult train(const TrainConfig& cfg, const MlpArchitecture& arch,
                  const SampledDataset& data,
                  const SampledDataset* collocation = nullptr,
                  const TrainState* resume = nullptr,
                  const std::function<void(const EpochRow&)>& on_epoch = {});

/// Train with trainable flow parameters and report what was learned; the
/// per-epoch trajectory is the (re, pec) column pair of run.history.
struct FlowInference {
    FlowParams flow;
    TrainResult run;
};
FlowInference infer_flow_parameters(
    const TrainConfig& cfg, const MlpArchitecture& arch,
    const SampledDataset& data, const SampledDataset* collocation = nullptr,
    const std::function<void(const EpochRow&)>& on_epoch = {});

} // namespace hfm

#endif
