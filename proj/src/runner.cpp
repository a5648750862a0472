#include "runner.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>

#include "analytic_flows.hpp"
#include "checkpoint.hpp"
#include "dataset.hpp"
#include "errors.hpp"
#include "postproc.hpp"
#include "spectral.hpp"
#include "train.hpp"

namespace hfm {

const char* version_string() { return "hfm 1.0.0"; }

namespace {

/// Creates the directory a file will be written into, if any.
void ensure_parent_dir(const std::string& path) {
    const std::filesystem::path parent =
        std::filesystem::path(path).parent_path();
    if (parent.empty()) return;
    std::error_code ec;
    std::filesystem::create_directories(parent, ec);
    if (ec)
        throw_io("cannot create output directory '" + parent.string() +
                 "': " + ec.message());
}

void require_input_file(const std::string& path, const std::string& key) {
    if (!std::filesystem::exists(path))
        throw_io("config key '" + key + "': input file '" + path +
                 "' does not exist");
}

Activation parse_activation(const std::string& name) {
    if (name == "sin") return Activation::Sin;
    if (name == "tanh") return Activation::Tanh;
    throw_invalid("config key 'network.activation': unknown activation '" +
                  name + "' (expected sin or tanh)");
}

MlpArchitecture arch_from_config(const RunConfig& cfg, int spatial_dim) {
    MlpArchitecture arch;
    arch.spatial_dim = spatial_dim;
    arch.hidden_layers = cfg_int(cfg, "network.hidden_layers", 6);
    arch.hidden_width = cfg_int(cfg, "network.hidden_width", 50);
    arch.activation =
        parse_activation(cfg_string(cfg, "network.activation", "sin"));
    arch.validate();
    return arch;
}

std::uint64_t seed_fallback(const RunConfig& cfg, const std::string& key) {
    return cfg_u64(cfg, key, cfg_u64(cfg, "run.seed", 1));
}

/// Exact reference fields on the solver grid at one snapshot: scalar (and
/// its complement) from the transport solve, velocity and pressure from the
/// analytic flow.
void append_reference_rows(FieldTable& table, const TransportSolution& sol,
                           const AnalyticJetEvaluator& jets,
                           const GridScalar& snap) {
    const int n = sol.n;
    const double h = 2.0 * std::numbers::pi / n;
    for (int ix = 0; ix < n; ++ix) {
        for (int iy = 0; iy < n; ++iy) {
            const double x = h * ix;
            const double y = h * iy;
            const FieldJet jet = jets.eval(snap.t, x, y);
            FieldRow row;
            row.t = snap.t;
            row.x = x;
            row.y = y;
            row.c = snap.values[static_cast<std::size_t>(ix) * n + iy];
            row.d = 1.0 - row.c;
            row.u = jet.value[kFieldU];
            row.v = jet.value[kFieldV];
            row.p = jet.value[kFieldP];
            table.rows.push_back(row);
        }
    }
}

const GridScalar& snapshot_at(const TransportSolution& sol, double t) {
    for (const GridScalar& snap : sol.snapshots) {
        const double tol = 1e-9 * std::max(1.0, std::abs(t));
        if (std::abs(snap.t - t) <= tol) return snap;
    }
    throw_invalid("config key 'generate.fields_times': t = " +
                  std::to_string(t) +
                  " is not a stored snapshot time (snapshots run from " +
                  std::to_string(sol.snapshots.front().t) + " to " +
                  std::to_string(sol.snapshots.back().t) + ")");
}

Checkpoint load_checkpoint_for(const RunConfig& cfg, const std::string& key) {
    const std::string path = cfg_string_required(cfg, key);
    require_input_file(path, key);
    return load_checkpoint(path);
}

std::vector<double> times_for(const RunConfig& cfg, const std::string& key) {
    std::vector<double> times = cfg_double_list_required(cfg, key);
    for (double t : times)
        if (!std::isfinite(t))
            throw_invalid("config key '" + key + "': times must be finite");
    return times;
}

} // namespace

void cmd_generate(const RunConfig& cfg) {
    AnalyticFlow flow;
    flow.variant = AnalyticFlow::parse_variant(
        cfg_string(cfg, "generate.flow", "taylor-green"));
    flow.re = cfg_double(cfg, "generate.re", 1.0);
    flow.validate();

    SolverConfig sc;
    sc.n = cfg_int(cfg, "generate.grid_n", 64);
    sc.dt = cfg_double_required(cfg, "generate.dt");
    sc.kappa = cfg_double_required(cfg, "generate.kappa");
    sc.t0 = cfg_double(cfg, "generate.t0", 0.0);
    sc.t_final = cfg_double_required(cfg, "generate.t_final");
    sc.snapshot_interval = cfg_double_required(cfg, "generate.snapshot_interval");
    sc.dealias = cfg_bool(cfg, "generate.dealias", true);
    sc.ic = InitialCondition::parse(cfg_string(cfg, "generate.ic", "mix"));

    const TransportSolution sol = solve_transport(flow, sc);

    const int count = cfg_int_required(cfg, "generate.count");
    if (count < 1)
        throw_invalid("config key 'generate.count' must be >= 1");
    const double sigma = cfg_double(cfg, "generate.noise_sigma", 0.0);
    const std::uint64_t seed = seed_fallback(cfg, "generate.seed");

    const SampledDataset ds =
        sample_points(sol, static_cast<std::size_t>(count), seed, sigma);
    const std::string dataset_path =
        cfg_string_required(cfg, "generate.dataset");
    ensure_parent_dir(dataset_path);
    export_dataset(ds, dataset_path);
    std::printf("wrote %s (%zu records, %zu snapshots, seed %llu)\n",
                dataset_path.c_str(), ds.records.size(),
                sol.snapshots.size(),
                static_cast<unsigned long long>(seed));

    if (cfg.has("generate.fields")) {
        const std::string fields_path =
            cfg_string_required(cfg, "generate.fields");
        const std::vector<double> times =
            times_for(cfg, "generate.fields_times");
        const AnalyticJetEvaluator jets(flow);
        FieldTable table;
        table.spatial_dim = 2;
        table.rows.reserve(times.size() * static_cast<std::size_t>(sol.n) *
                           sol.n);
        for (double t : times)
            append_reference_rows(table, sol, jets, snapshot_at(sol, t));
        ensure_parent_dir(fields_path);
        export_field_table(table, fields_path);
        std::printf("wrote %s (%zu rows at %zu times)\n", fields_path.c_str(),
                    table.rows.size(), times.size());
    } else if (cfg.has("generate.fields_times")) {
        throw_invalid("config key 'generate.fields_times' needs "
                      "'generate.fields' to name the output file");
    }
}

void cmd_train(const RunConfig& cfg) {
    const std::string data_path = cfg_string_required(cfg, "train.dataset");
    require_input_file(data_path, "train.dataset");
    const SampledDataset data = import_dataset(data_path);

    SampledDataset colloc;
    const bool separate = cfg.has("train.collocation");
    if (separate) {
        const std::string path = cfg_string_required(cfg, "train.collocation");
        require_input_file(path, "train.collocation");
        colloc = import_dataset(path);
    }

    const MlpArchitecture arch = arch_from_config(cfg, data.spatial_dim);

    TrainConfig tc;
    if (cfg.has("train.epochs"))
        tc.stage_epochs = cfg_int_list_required(cfg, "train.epochs");
    else
        tc.stage_epochs = {100, 200, 100};
    if (cfg.has("train.learning_rates"))
        tc.stage_lrs = cfg_double_list_required(cfg, "train.learning_rates");
    else
        tc.stage_lrs = {1e-3, 1e-4, 1e-5};
    tc.batch_size = cfg_int(cfg, "train.batch_size", 10000);
    tc.shuffle_seed = seed_fallback(cfg, "train.shuffle_seed");
    tc.init_seed = seed_fallback(cfg, "train.init_seed");
    if (cfg.has("train.first_layer_scale"))
        tc.first_layer_init_scale =
            cfg_double_list_required(cfg, "train.first_layer_scale");

    FlowParams fp;
    fp.re = cfg_double(cfg, "train.re", 1.0);
    fp.pec = cfg_double(cfg, "train.pec", 1.0);
    fp.re_trainable = cfg_bool(cfg, "train.re_trainable", false);
    fp.pec_trainable = cfg_bool(cfg, "train.pec_trainable", false);
    tc.flow = fp;
    tc.flow_lr_scale = cfg_double(cfg, "train.flow_lr_scale", 10.0);
    tc.w_data_c = cfg_double(cfg, "train.w_data_c", 1.0);
    tc.w_data_d = cfg_double(cfg, "train.w_data_d", 1.0);
    tc.w_e1 = cfg_double(cfg, "train.w_e1", 1.0);
    tc.w_e2 = cfg_double(cfg, "train.w_e2", 1.0);
    tc.w_e3 = cfg_double(cfg, "train.w_e3", 1.0);
    tc.w_e4 = cfg_double(cfg, "train.w_e4", 1.0);
    tc.w_e5 = cfg_double(cfg, "train.w_e5", 1.0);
    tc.w_e6 = cfg_double(cfg, "train.w_e6", 1.0);
    tc.threads = cfg_int(cfg, "train.threads",
                         cfg_int(cfg, "run.threads", 1));
    tc.checkpoint_path = cfg_string_required(cfg, "train.checkpoint");
    tc.log_path = cfg_string_required(cfg, "train.log");
    ensure_parent_dir(tc.checkpoint_path);
    ensure_parent_dir(tc.log_path);

    TrainState resumed;
    const TrainState* resume_ptr = nullptr;
    if (cfg.has("train.resume")) {
        const std::string path = cfg_string_required(cfg, "train.resume");
        require_input_file(path, "train.resume");
        resumed = state_from_checkpoint(load_checkpoint(path));
        resume_ptr = &resumed;
    }

    std::printf("%s\n", kTrainLogHeader);
    auto on_epoch = [](const EpochRow& row) {
        std::printf("%s\n", format_epoch_row(row).c_str());
        std::fflush(stdout);
    };

    const TrainResult result = train(tc, arch, data,
                                     separate ? &colloc : nullptr, resume_ptr,
                                     on_epoch);

    const FlowParams final_flow = result.state.flow();
    if (result.history.empty()) {
        std::printf("no epochs configured; checkpoint holds the "
                    "initialization\n");
    } else {
        std::printf("final loss %.17g after %d epochs\n",
                    result.history.back().loss.total,
                    result.history.back().epoch);
    }
    if (final_flow.re_trainable)
        std::printf("inferred Re = %.17g\n", final_flow.re);
    if (final_flow.pec_trainable)
        std::printf("inferred Pec = %.17g\n", final_flow.pec);
    std::printf("wrote %s\n", tc.checkpoint_path.c_str());
}

void cmd_predict(const RunConfig& cfg) {
    const Checkpoint ck = load_checkpoint_for(cfg, "predict.checkpoint");
    const int dim = ck.arch.spatial_dim;

    GridSpec grid;
    grid.spatial_dim = dim;
    grid.lo[0] = cfg_double_required(cfg, "predict.x_min");
    grid.hi[0] = cfg_double_required(cfg, "predict.x_max");
    grid.count[0] = cfg_int_required(cfg, "predict.x_count");
    grid.lo[1] = cfg_double_required(cfg, "predict.y_min");
    grid.hi[1] = cfg_double_required(cfg, "predict.y_max");
    grid.count[1] = cfg_int_required(cfg, "predict.y_count");
    if (dim == 3) {
        grid.lo[2] = cfg_double_required(cfg, "predict.z_min");
        grid.hi[2] = cfg_double_required(cfg, "predict.z_max");
        grid.count[2] = cfg_int_required(cfg, "predict.z_count");
    } else if (cfg.has("predict.z_min") || cfg.has("predict.z_max") ||
               cfg.has("predict.z_count")) {
        throw_invalid("predict.z_* keys are only valid for 3D models");
    }

    const std::vector<double> times = times_for(cfg, "predict.times");
    const FieldTable table = evaluate_on_grid(ck, grid, times);
    if (table.extrapolated)
        std::printf("note: some points lie outside the region the model was "
                    "trained on\n");

    const std::string output = cfg_string_required(cfg, "predict.output");
    ensure_parent_dir(output);
    export_field_table(table, output);
    std::printf("wrote %s (%zu rows)\n", output.c_str(), table.rows.size());
}

void cmd_evaluate(const RunConfig& cfg) {
    const Checkpoint ck = load_checkpoint_for(cfg, "evaluate.checkpoint");

    const std::string exact_path = cfg_string_required(cfg, "evaluate.exact");
    require_input_file(exact_path, "evaluate.exact");
    const FieldTable exact = import_field_table(exact_path);
    if (exact.spatial_dim != ck.arch.spatial_dim)
        throw_invalid("reference table dimension does not match the model");

    // Evaluate the model at exactly the reference coordinates.
    FieldTable pred;
    pred.spatial_dim = exact.spatial_dim;
    pred.rows.reserve(exact.rows.size());
    const int nout = ck.arch.output_arity();
    std::vector<double> out(nout);
    for (const FieldRow& ref : exact.rows) {
        const double point[4] = {ref.t, ref.x, ref.y, ref.z};
        forward(ck.params, ck.arch, ck.norm,
                std::span<const double>(point, ck.arch.spatial_dim + 1), out);
        FieldRow row;
        row.t = ref.t;
        row.x = ref.x;
        row.y = ref.y;
        row.z = ref.z;
        row.c = out[0];
        row.d = out[1];
        row.u = out[2];
        row.v = out[3];
        if (exact.spatial_dim == 3) {
            row.w = out[4];
            row.p = out[5];
        } else {
            row.p = out[4];
        }
        pred.rows.push_back(row);
    }

    const bool align = cfg_bool(cfg, "evaluate.align_pressure", true);
    const ErrorReport report = relative_l2(pred, exact, align);

    const std::string output = cfg_string_required(cfg, "evaluate.output");
    ensure_parent_dir(output);
    export_error_report(report, output);

    // Per-field worst case across times, for quick reading.
    const char fields[] = {'c', 'u', 'v', 'w', 'p'};
    for (char f : fields) {
        double worst = -1.0;
        for (const ErrorEntry& e : report.entries)
            if (e.field == f && e.defined) worst = std::max(worst, e.rel_l2);
        if (worst >= 0.0)
            std::printf("max rel_l2 %c = %.17g\n", f, worst);
    }
    std::printf("wrote %s (%zu entries)\n", output.c_str(),
                report.entries.size());
}

namespace {

/// Shared setup for the two surface integrals.
struct SurfaceRun {
    Checkpoint ck;
    SurfaceDiscretization surface;
    double re = 1.0;
    std::vector<double> times;
    std::string output;
};

SurfaceRun surface_run(const RunConfig& cfg, const std::string& section) {
    SurfaceRun run;
    run.ck = load_checkpoint_for(cfg, section + ".checkpoint");
    const std::string surf_path =
        cfg_string_required(cfg, section + ".surface");
    require_input_file(surf_path, section + ".surface");
    run.surface = load_surface(surf_path);
    run.re = cfg_double(cfg, section + ".re", run.ck.flow.re);
    run.times = times_for(cfg, section + ".times");
    run.output = cfg_string_required(cfg, section + ".output");
    ensure_parent_dir(run.output);
    return run;
}

} // namespace

void cmd_forces(const RunConfig& cfg) {
    const SurfaceRun run = surface_run(cfg, "forces");
    const ForceSeries series = force_series(
        checkpoint_sampler(run.ck), run.surface, run.re, run.times);
    export_forces(series, run.output);
    std::printf("wrote %s (%zu times, Re = %.17g)\n", run.output.c_str(),
                series.samples.size(), run.re);
}

void cmd_wss(const RunConfig& cfg) {
    const SurfaceRun run = surface_run(cfg, "wss");
    const WssField field = wss_field(checkpoint_sampler(run.ck), run.surface,
                                     run.re, run.times);
    export_wss(field, run.output);
    std::printf("wrote %s (%zu times, %zu wall points)\n", run.output.c_str(),
                field.times.size(),
                field.slices.empty() ? 0 : field.slices.front().size());
}

void run_command(const RunConfig& cfg, const std::string& command) {
    if (command == "generate") return cmd_generate(cfg);
    if (command == "train") return cmd_train(cfg);
    if (command == "predict") return cmd_predict(cfg);
    if (command == "evaluate") return cmd_evaluate(cfg);
    if (command == "forces") return cmd_forces(cfg);
    if (command == "wss") return cmd_wss(cfg);
    throw_invalid("unknown command '" + command +
                  "' (expected generate, train, predict, evaluate, forces, "
                  "or wss)");
}

} // namespace hfm
