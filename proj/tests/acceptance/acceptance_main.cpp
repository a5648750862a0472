/// Acceptance harness: one numbered check per invocation, one PASS/FAIL
/// line on stdout, exit 0/1. Usage:
///
///   hfm_acceptance <criterion 1..8> [work-dir]
///
/// The work directory holds artifacts shared between checks (criterion 8
/// byte-compares a rerun against criterion 4's training outputs, so the
/// test runner must execute 4 before 8).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "analytic_flows.hpp"
#include "checkpoint.hpp"
#include "dataset.hpp"
#include "errors.hpp"
#include "mlp.hpp"
#include "physics.hpp"
#include "postproc.hpp"
#include "spectral.hpp"
#include "train.hpp"

using namespace hfm;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         t0).count();
}

std::string fmt(const char* format, ...) {
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof buf, format, args);
    va_end(args);
    return buf;
}

// ---------------------------------------------------------------------------
// Criterion 1: derivative oracle equivalence on random networks.
// First input derivatives vs central differences (rel < 1e-5), pure second
// derivatives (rel < 1e-4), and parameter gradients of the full composite
// loss (rel < 1e-4), over 50 random architectures. Under one minute.
// ---------------------------------------------------------------------------

Outcome criterion1(const std::string&) {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);

    double worst_first = 0.0, worst_second = 0.0, worst_param = 0.0;

    for (int net = 0; net < 50; ++net) {
        MlpArchitecture arch;
        arch.spatial_dim = (net % 3 == 2) ? 3 : 2;
        arch.hidden_layers = 1 + static_cast<int>(rng() % 4);
        arch.hidden_width = 1 + static_cast<int>(rng() % 32);
        arch.activation = (net % 2 == 0) ? Activation::Sin
                                         : Activation::Tanh;
        const int dim = arch.spatial_dim;
        const int nin = arch.input_arity();

        InputNormalization norm = InputNormalization::identity(dim);
        if (net % 2 == 1) {
            // Exercise the input-scaling chain rule too.
            std::vector<double> lo(nin), hi(nin);
            for (int k = 0; k < nin; ++k) {
                lo[k] = -1.5 - 0.25 * k;
                hi[k] = 2.0 + 0.5 * k;
            }
            norm = InputNormalization::from_bounds(dim, lo, hi);
        }

        TrainState st;
        st.arch = arch;
        st.norm = norm;
        st.params.data.resize(arch.param_count());
        for (double& p : st.params.data) p = 0.8 * unit(rng);
        st.re_trainable = true;
        st.pec_trainable = true;
        st.s_re = std::log(2.0);
        st.s_pec = std::log(5.0);

        // --- input-derivative check against central differences ---
        const double hx = 1e-4;
        for (int pt = 0; pt < 3; ++pt) {
            std::vector<double> x(nin);
            for (int k = 0; k < nin; ++k) x[k] = 1.2 * unit(rng);
            const FieldJet jet = forward_jet(st.params, arch, norm, x);
            const int nout = arch.output_arity();
            std::vector<double> up(nout), dn(nout), mid(nout);
            forward(st.params, arch, norm, x, mid);

            for (int k = 0; k < nin; ++k) {
                std::vector<double> xp = x, xm = x;
                xp[k] += hx;
                xm[k] -= hx;
                forward(st.params, arch, norm, xp, up);
                forward(st.params, arch, norm, xm, dn);
                for (int o = 0; o < nout; ++o) {
                    const int field = (dim == 2 && o == 4) ? kFieldP : o;
                    const double fd1 = (up[o] - dn[o]) / (2.0 * hx);
                    const double r1 = std::abs(jet.d1[field][k] - fd1) /
                                      std::max(std::abs(fd1), 1.0);
                    worst_first = std::max(worst_first, r1);
                    if (k >= 1) { // pure second derivatives, spatial only
                        const double fd2 =
                            (up[o] - 2.0 * mid[o] + dn[o]) / (hx * hx);
                        const double r2 =
                            std::abs(jet.d2[field][k - 1] - fd2) /
                            std::max(std::abs(fd2), 1.0);
                        worst_second = std::max(worst_second, r2);
                    }
                }
            }
        }

        // --- parameter gradient of the composite loss ---
        TrainConfig tc;
        tc.flow = FlowParams::trainable(2.0, 5.0);
        tc.threads = 1;
        std::vector<SampleRecord> batch(6);
        for (SampleRecord& r : batch) {
            r.t = 0.5 + 0.4 * unit(rng);
            r.x = 1.0 * unit(rng);
            r.y = 1.0 * unit(rng);
            r.z = (dim == 3) ? 1.0 * unit(rng) : 0.0;
            r.c = 0.5 + 0.3 * unit(rng);
        }

        std::vector<double> grad(st.dof());
        batch_loss_grad(st, tc, batch, {}, grad);

        const double hp = 1e-6;
        const std::size_t p_count = st.params.data.size();
        const std::size_t stride = std::max<std::size_t>(1, p_count / 20);
        auto loss_at = [&]() {
            return batch_loss(st, tc, batch, {}).total;
        };
        for (std::size_t i = 0; i < p_count; i += stride) {
            const double save = st.params.data[i];
            st.params.data[i] = save + hp;
            const double fp_ = loss_at();
            st.params.data[i] = save - hp;
            const double fm = loss_at();
            st.params.data[i] = save;
            const double fd = (fp_ - fm) / (2.0 * hp);
            const double rel = std::abs(grad[i] - fd) /
                               std::max(std::abs(fd), 1e-4);
            worst_param = std::max(worst_param, rel);
        }
        for (int which = 0; which < 2; ++which) {
            double& s = (which == 0) ? st.s_re : st.s_pec;
            const double save = s;
            s = save + hp;
            const double fp_ = loss_at();
            s = save - hp;
            const double fm = loss_at();
            s = save;
            const double fd = (fp_ - fm) / (2.0 * hp);
            const double ad = grad[p_count + which];
            const double rel = std::abs(ad - fd) /
                               std::max(std::abs(fd), 1e-4);
            worst_param = std::max(worst_param, rel);
        }
    }

    const double elapsed = seconds_since(t0);
    const bool pass = worst_first < 1e-5 && worst_second < 1e-4 &&
                      worst_param < 1e-4 && elapsed < 60.0;
    return {pass,
            fmt("first %.2e < 1e-5, second %.2e < 1e-4, param %.2e < 1e-4, "
                "%.1fs < 60s",
                worst_first, worst_second, worst_param, elapsed)};
}

// ---------------------------------------------------------------------------
// Criterion 2: every closed-form flow satisfies the governing equations.
// Max |e_i| < 1e-10 over 100 random points per variant.
// ---------------------------------------------------------------------------

Outcome criterion2(const std::string&) {
    const std::pair<FlowVariant, double> cases[] = {
        {FlowVariant::TaylorGreen2D, 10.0},
        {FlowVariant::Beltrami3D, 5.0},
        {FlowVariant::Stagnation2D, 3.0},
        {FlowVariant::RigidRotation2D, 2.0},
        {FlowVariant::ZeroVelocity2D, 1.0},
        {FlowVariant::Uniform2D, 1.0},
    };
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ut(0.0, 1.0);
    std::uniform_real_distribution<double> ux(0.0, 2.0 * kPi);

    double worst = 0.0;
    std::string worst_variant;
    for (const auto& [variant, re] : cases) {
        AnalyticFlow flow;
        flow.variant = variant;
        flow.re = re;
        const AnalyticJetEvaluator jets(flow);
        const FlowParams fp = FlowParams::fixed(re, 1.0);
        double vmax = 0.0;
        for (int i = 0; i < 100; ++i) {
            const FieldJet jet = jets.eval(ut(rng), ux(rng), ux(rng),
                                           flow.spatial_dim() == 3 ? ux(rng)
                                                                   : 0.0);
            const ResidualSet rs = (flow.spatial_dim() == 3)
                                       ? residuals_3d(jet, fp)
                                       : residuals_2d(jet, fp);
            vmax = std::max(vmax, rs.max_abs());
        }
        if (vmax > worst) {
            worst = vmax;
            worst_variant = flow.variant_name();
        }
    }
    return {worst < 1e-10,
            fmt("max residual %.2e < 1e-10 (worst variant: %s)", worst,
                worst_variant.c_str())};
}

// ---------------------------------------------------------------------------
// Criterion 3: transport-solver verification. Eigenmode decay to < 1e-8 at
// N=32, traveling-wave error < 1e-6 at N=64, mean conservation < 1e-10
// over T=2 (plus the scalar staying within its initial range).
// ---------------------------------------------------------------------------

TransportSolution run_eigenmode_case() {
    AnalyticFlow flow;
    flow.variant = FlowVariant::ZeroVelocity2D;
    SolverConfig sc;
    sc.n = 32;
    sc.dt = 0.01;
    sc.kappa = 0.1;
    sc.t_final = 1.0;
    sc.snapshot_interval = 1.0;
    sc.ic.kind = InitialCondition::Kind::Eigenmode;
    return solve_transport(flow, sc);
}

TransportSolution run_wave_case() {
    AnalyticFlow flow;
    flow.variant = FlowVariant::Uniform2D;
    SolverConfig sc;
    sc.n = 64;
    sc.dt = 0.02;
    sc.kappa = 0.0;
    sc.t_final = 1.0;
    sc.snapshot_interval = 1.0;
    sc.ic.kind = InitialCondition::Kind::Wave;
    return solve_transport(flow, sc);
}

TransportSolution run_conservation_case() {
    AnalyticFlow flow;
    flow.variant = FlowVariant::TaylorGreen2D;
    flow.re = 10.0;
    SolverConfig sc;
    sc.n = 64;
    sc.dt = 0.02;
    sc.kappa = 0.1;
    sc.t_final = 2.0;
    sc.snapshot_interval = 0.1;
    sc.ic.kind = InitialCondition::Kind::Mix;
    return solve_transport(flow, sc);
}

double grid_mean(const GridScalar& snap) {
    double sum = 0.0;
    for (double v : snap.values) sum += v;
    return sum / static_cast<double>(snap.values.size());
}

Outcome criterion3(const std::string&) {
    // (a) pure diffusion of the Laplacian eigenmode: the stored initial
    // field is (1 + sin x sin y)/2, so the oscillating half decays by
    // exp(-2 kappa t) while the mean stays put.
    const TransportSolution eig = run_eigenmode_case();
    const int n1 = eig.n;
    const double decay = std::exp(-2.0 * eig.kappa * 1.0);
    double eig_err = 0.0;
    for (int ix = 0; ix < n1; ++ix)
        for (int iy = 0; iy < n1; ++iy) {
            const double x = 2.0 * kPi * ix / n1;
            const double y = 2.0 * kPi * iy / n1;
            const double exact =
                0.5 + 0.5 * decay * std::sin(x) * std::sin(y);
            const double got =
                eig.snapshots.back().values[static_cast<std::size_t>(ix) *
                                            n1 + iy];
            eig_err = std::max(eig_err, std::abs(got - exact));
        }

    // (b) pure advection of a single wave under uniform drift.
    const TransportSolution wav = run_wave_case();
    const int n2 = wav.n;
    double wave_err = 0.0;
    for (int ix = 0; ix < n2; ++ix) {
        const double x = 2.0 * kPi * ix / n2;
        const double exact = 0.5 * (1.0 + std::sin(x - 1.0));
        for (int iy = 0; iy < n2; ++iy) {
            const double got =
                wav.snapshots.back().values[static_cast<std::size_t>(ix) *
                                            n2 + iy];
            wave_err = std::max(wave_err, std::abs(got - exact));
        }
    }

    // (c) mean conservation and range containment over a long vortex run.
    const TransportSolution tg = run_conservation_case();
    const double mean0 = grid_mean(tg.snapshots.front());
    const auto [it_min, it_max] =
        std::minmax_element(tg.snapshots.front().values.begin(),
                            tg.snapshots.front().values.end());
    const double lo = *it_min - 1e-6, hi = *it_max + 1e-6;
    double drift = 0.0;
    bool in_range = true;
    for (const GridScalar& snap : tg.snapshots) {
        drift = std::max(drift, std::abs(grid_mean(snap) - mean0));
        for (double v : snap.values)
            if (v < lo || v > hi) in_range = false;
    }

    const bool pass = eig_err < 1e-8 && wave_err < 1e-6 && drift < 1e-10 &&
                      in_range;
    return {pass,
            fmt("eigenmode %.2e < 1e-8, wave %.2e < 1e-6, mean drift %.2e "
                "< 1e-10, range %s",
                eig_err, wave_err, drift, in_range ? "held" : "violated")};
}

// ---------------------------------------------------------------------------
// Criteria 4/6/8 share one reconstruction problem: Taylor-Green at
// Re = Pec = 10, N=64 over T=2, 50,000 observations, a 6x50 network, and
// the staged schedule 100/200/100 at 1e-3/1e-4/1e-5 with batches of 5000.
// ---------------------------------------------------------------------------

AnalyticFlow recon_flow() {
    AnalyticFlow flow;
    flow.variant = FlowVariant::TaylorGreen2D;
    flow.re = 10.0;
    return flow;
}

TransportSolution recon_solution() {
    SolverConfig sc;
    sc.n = 64;
    sc.dt = 0.005;
    sc.kappa = 0.1;
    sc.t_final = 2.0;
    sc.snapshot_interval = 0.05;
    sc.ic.kind = InitialCondition::Kind::Mix;
    return solve_transport(recon_flow(), sc);
}

SampledDataset recon_dataset(const TransportSolution& sol) {
    return sample_points(sol, 50000, 1, 0.0);
}

MlpArchitecture recon_arch() {
    MlpArchitecture arch;
    arch.spatial_dim = 2;
    arch.hidden_layers = 6;
    arch.hidden_width = 50;
    arch.activation = Activation::Sin;
    return arch;
}

TrainConfig recon_train_config(const std::string& work,
                               const std::string& prefix) {
    TrainConfig tc;
    tc.stage_epochs = {100, 200, 100};
    tc.stage_lrs = {1e-3, 1e-4, 1e-5};
    tc.batch_size = 5000;
    tc.shuffle_seed = 1;
    tc.init_seed = 1;
    tc.first_layer_init_scale = {1.0, 10.0, 10.0};
    tc.flow = FlowParams::fixed(10.0, 10.0);
    tc.threads = 1;
    tc.checkpoint_path = work + "/" + prefix + "_model.ckpt";
    tc.log_path = work + "/" + prefix + "_train.csv";
    return tc;
}

/// Reference fields on the solver grid at one stored time: scalar from the
/// solver, velocity/pressure from the closed form.
FieldTable exact_table_at(const TransportSolution& sol,
                          const AnalyticFlow& flow, double t) {
    const GridScalar* snap = nullptr;
    for (const GridScalar& s : sol.snapshots)
        if (std::abs(s.t - t) <= 1e-9) snap = &s;
    if (!snap) throw_invalid("requested time is not a stored snapshot");

    const AnalyticJetEvaluator jets(flow);
    const int n = sol.n;
    const double h = 2.0 * kPi / n;
    FieldTable table;
    table.spatial_dim = 2;
    table.rows.reserve(static_cast<std::size_t>(n) * n);
    for (int ix = 0; ix < n; ++ix)
        for (int iy = 0; iy < n; ++iy) {
            const double x = h * ix, y = h * iy;
            const FieldJet jet = jets.eval(t, x, y);
            FieldRow row;
            row.t = t;
            row.x = x;
            row.y = y;
            row.c = snap->values[static_cast<std::size_t>(ix) * n + iy];
            row.d = 1.0 - row.c;
            row.u = jet.value[kFieldU];
            row.v = jet.value[kFieldV];
            row.p = jet.value[kFieldP];
            table.rows.push_back(row);
        }
    return table;
}

/// Model predictions at exactly the reference coordinates.
FieldTable predict_at(const TrainState& st, const FieldTable& exact) {
    FieldTable pred;
    pred.spatial_dim = exact.spatial_dim;
    pred.rows.reserve(exact.rows.size());
    std::vector<double> out(st.arch.output_arity());
    for (const FieldRow& ref : exact.rows) {
        const double point[3] = {ref.t, ref.x, ref.y};
        forward(st.params, st.arch, st.norm, point, out);
        FieldRow row;
        row.t = ref.t;
        row.x = ref.x;
        row.y = ref.y;
        row.c = out[0];
        row.d = out[1];
        row.u = out[2];
        row.v = out[3];
        row.p = out[4];
        pred.rows.push_back(row);
    }
    return pred;
}

struct MidWindowErrors {
    double u = 0.0, v = 0.0, p = 0.0; ///< worst over the evaluated times
    double mean_velocity = 0.0;       ///< mean of all u/v entries
};

const double kMidTimes[] = {0.8, 1.0, 1.2};

MidWindowErrors mid_window_errors(const TrainState& st,
                                  const TransportSolution& sol,
                                  const AnalyticFlow& flow) {
    MidWindowErrors e;
    double vel_sum = 0.0;
    int vel_count = 0;
    for (const double t : kMidTimes) {
        const FieldTable exact = exact_table_at(sol, flow, t);
        const FieldTable pred = predict_at(st, exact);
        const ErrorReport report = relative_l2(pred, exact, true);
        for (const ErrorEntry& entry : report.entries) {
            if (!entry.defined) continue;
            if (entry.field == 'u' || entry.field == 'v') {
                vel_sum += entry.rel_l2;
                ++vel_count;
                if (entry.field == 'u') e.u = std::max(e.u, entry.rel_l2);
                if (entry.field == 'v') e.v = std::max(e.v, entry.rel_l2);
            } else if (entry.field == 'p') {
                e.p = std::max(e.p, entry.rel_l2);
            }
        }
    }
    e.mean_velocity = vel_sum / vel_count;
    return e;
}

Outcome criterion4(const std::string& work) {
    const auto t0 = std::chrono::steady_clock::now();
    const AnalyticFlow flow = recon_flow();
    const TransportSolution sol = recon_solution();
    const SampledDataset ds = recon_dataset(sol);
    export_dataset(ds, work + "/c4_data.csv");

    const TrainConfig tc = recon_train_config(work, "c4");
    const TrainResult result = train(tc, recon_arch(), ds);

    const double first = result.history.front().loss.total;
    const double last = result.history.back().loss.total;
    const double drop = first / last;
    const MidWindowErrors err = mid_window_errors(result.state, sol, flow);
    const double elapsed = seconds_since(t0);

    const bool pass = err.u < 0.05 && err.v < 0.05 && err.p < 0.10 &&
                      drop >= 100.0 && elapsed <= 45.0 * 60.0;
    return {pass,
            fmt("u %.4f < 0.05, v %.4f < 0.05, p %.4f < 0.10, loss drop "
                "%.0fx >= 100x, %.0fs <= 2700s",
                err.u, err.v, err.p, drop, elapsed)};
}

// ---------------------------------------------------------------------------
// Criterion 5: the auxiliary complement field helps. Mean mid-window
// velocity error with the d-branch active <= without it, over 3 seeds.
// Downsized problem (smaller net/sample/schedule); direction only.
// ---------------------------------------------------------------------------

Outcome criterion5(const std::string&) {
    const AnalyticFlow flow = recon_flow();
    const TransportSolution sol = recon_solution();

    MlpArchitecture arch;
    arch.spatial_dim = 2;
    arch.hidden_layers = 4;
    arch.hidden_width = 32;
    arch.activation = Activation::Sin;

    const std::uint64_t seeds[] = {1, 2, 3};
    double with_sum = 0.0, without_sum = 0.0;
    std::string per_seed;
    for (const std::uint64_t seed : seeds) {
        const SampledDataset ds = sample_points(sol, 20000, 200 + seed, 0.0);
        for (int mode = 0; mode < 2; ++mode) {
            TrainConfig tc;
            tc.stage_epochs = {50, 100, 50};
            tc.stage_lrs = {1e-3, 1e-4, 1e-5};
            tc.batch_size = 4000;
            tc.shuffle_seed = seed;
            tc.init_seed = seed;
            tc.first_layer_init_scale = {1.0, 10.0, 10.0};
            tc.flow = FlowParams::fixed(10.0, 10.0);
            tc.threads = 1;
            if (mode == 1) { // disable every use of the complement field
                tc.w_data_d = 0.0;
                tc.w_e2 = 0.0;
            }
            const TrainResult result = train(tc, arch, ds);
            const MidWindowErrors err =
                mid_window_errors(result.state, sol, flow);
            (mode == 0 ? with_sum : without_sum) += err.mean_velocity;
            per_seed += fmt("%s%.4f", mode == 0 ? " [" : "/",
                            err.mean_velocity);
        }
        per_seed += "]";
    }
    const double with_mean = with_sum / 3.0;
    const double without_mean = without_sum / 3.0;
    return {with_mean <= without_mean,
            fmt("mean velocity error with-d %.4f <= without-d %.4f "
                "(per seed with/without:%s)",
                with_mean, without_mean, per_seed.c_str())};
}

// ---------------------------------------------------------------------------
// Criterion 6: flow-parameter inference. Criterion-4 setup with both
// non-dimensional numbers trainable from 1.0; each recovered within 10%.
// ---------------------------------------------------------------------------

Outcome criterion6(const std::string& work) {
    const auto t0 = std::chrono::steady_clock::now();
    const TransportSolution sol = recon_solution();
    const SampledDataset ds = recon_dataset(sol);

    TrainConfig tc = recon_train_config(work, "c6");
    tc.flow = FlowParams::trainable(1.0, 1.0);

    const TrainResult result = train(tc, recon_arch(), ds);
    const FlowParams inferred = result.state.flow();
    const double re_err = std::abs(inferred.re - 10.0) / 10.0;
    const double pec_err = std::abs(inferred.pec - 10.0) / 10.0;
    const double elapsed = seconds_since(t0);

    const bool pass =
        re_err < 0.10 && pec_err < 0.10 && elapsed <= 60.0 * 60.0;
    return {pass,
            fmt("Re %.4f (err %.1f%% < 10%%), Pec %.4f (err %.1f%% < 10%%), "
                "%.0fs <= 3600s",
                inferred.re, 100.0 * re_err, inferred.pec, 100.0 * pec_err,
                elapsed)};
}

// ---------------------------------------------------------------------------
// Criterion 7: surface quadrature oracles. Drag pi +- 1e-3 for p = -x on
// the 256-point unit circle; Couette wall shear exactly 1 to 1e-12;
// lift/drag swap under 90-degree rotation to 1e-10.
// ---------------------------------------------------------------------------

/// Linear-in-coordinates velocity/pressure field with exact jets.
struct LinearField {
    double u0, ux, uy, v0, vx, vy, p0, px, py;
    FieldSampler sampler() const {
        return [*this](double, double x, double y) {
            FieldJet jet;
            jet.value[kFieldU] = u0 + ux * x + uy * y;
            jet.value[kFieldV] = v0 + vx * x + vy * y;
            jet.value[kFieldP] = p0 + px * x + py * y;
            jet.d1[kFieldU][1] = ux;
            jet.d1[kFieldU][2] = uy;
            jet.d1[kFieldV][1] = vx;
            jet.d1[kFieldV][2] = vy;
            return jet;
        };
    }
};

Outcome criterion7(const std::string&) {
    // (a) pressure-only drag on the unit circle.
    const LinearField pressure{0, 0, 0, 0, 0, 0, 0, -1.0, 0};
    const auto [fl_a, fd_a] =
        lift_drag(pressure.sampler(), unit_circle_surface(256), 1.0, 0.0);
    const double drag_err = std::abs(fd_a - kPi);

    // (b) plane Couette shear along the lower wall.
    const LinearField couette{0, 0, 1.0, 0, 0, 0, 0, 0, 0};
    SurfaceDiscretization wall;
    wall.closed = false;
    for (int i = 0; i < 8; ++i)
        wall.points.push_back({0.25 * i, 0.0, 0.0, 1.0, 0.25});
    double wss_err = 0.0;
    for (const WssSample& s :
         wall_shear_stress(couette.sampler(), wall, 1.0, 0.0))
        wss_err = std::max(wss_err, std::abs(s.wss - 1.0));

    // (c) rotating the field by 90 degrees swaps the force components.
    const LinearField orig{0, 1, 2, 0, 3, -1, 0, -1, 0.5};
    const LinearField rot{0, -1, -3, 0, -2, 1, 0, -0.5, -1};
    const SurfaceDiscretization circle = unit_circle_surface(256);
    const auto [fl0, fd0] = lift_drag(orig.sampler(), circle, 5.0, 0.0);
    const auto [fl1, fd1] = lift_drag(rot.sampler(), circle, 5.0, 0.0);
    const double rot_err =
        std::max(std::abs(fl1 - fd0), std::abs(fd1 + fl0));

    const bool pass = drag_err <= 1e-3 && wss_err <= 1e-12 &&
                      rot_err <= 1e-10;
    return {pass,
            fmt("drag |F_D - pi| %.2e <= 1e-3, Couette |wss - 1| %.2e <= "
                "1e-12, rotation swap %.2e <= 1e-10",
                drag_err, wss_err, rot_err)};
}

// ---------------------------------------------------------------------------
// Criterion 8: bit-identical reproducibility. The solver cases rerun to
// identical snapshots in-process; the criterion-4 pipeline reruns to
// byte-identical dataset, log, and checkpoint files.
// ---------------------------------------------------------------------------

bool same_snapshots(const TransportSolution& a, const TransportSolution& b) {
    if (a.snapshots.size() != b.snapshots.size()) return false;
    for (std::size_t k = 0; k < a.snapshots.size(); ++k) {
        if (a.snapshots[k].t != b.snapshots[k].t) return false;
        if (a.snapshots[k].values != b.snapshots[k].values) return false;
    }
    return true;
}

bool read_file(const std::string& path, std::string& out) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return false;
    std::stringstream ss;
    ss << in.rdbuf();
    out = ss.str();
    return true;
}

Outcome criterion8(const std::string& work) {
    // Solver determinism: each verification case rerun bit-identically.
    const bool solver_ok =
        same_snapshots(run_eigenmode_case(), run_eigenmode_case()) &&
        same_snapshots(run_wave_case(), run_wave_case()) &&
        same_snapshots(run_conservation_case(), run_conservation_case());

    // Training determinism: rerun the reconstruction with the same seeds
    // and compare every artifact byte-for-byte against the first run.
    const TransportSolution sol = recon_solution();
    const SampledDataset ds = recon_dataset(sol);
    export_dataset(ds, work + "/c8_data.csv");
    train(recon_train_config(work, "c8"), recon_arch(), ds);

    const std::pair<std::string, std::string> pairs[] = {
        {"c4_data.csv", "c8_data.csv"},
        {"c4_data.csv.json", "c8_data.csv.json"},
        {"c4_train.csv", "c8_train.csv"},
        {"c4_model.ckpt", "c8_model.ckpt"},
        {"c4_model.ckpt.json", "c8_model.ckpt.json"},
        {"c4_model.ckpt.stage1", "c8_model.ckpt.stage1"},
        {"c4_model.ckpt.stage2", "c8_model.ckpt.stage2"},
        {"c4_model.ckpt.stage3", "c8_model.ckpt.stage3"},
    };
    std::string mismatch;
    for (const auto& [ref, rerun] : pairs) {
        std::string a, b;
        if (!read_file(work + "/" + ref, a)) {
            mismatch = ref + " missing (run criterion 4 first)";
            break;
        }
        if (!read_file(work + "/" + rerun, b)) {
            mismatch = rerun + " missing";
            break;
        }
        if (a != b) {
            mismatch = ref + " differs from " + rerun;
            break;
        }
    }

    const bool pass = solver_ok && mismatch.empty();
    return {pass,
            fmt("solver reruns %s; artifacts %s",
                solver_ok ? "bit-identical" : "DIFFER",
                mismatch.empty() ? "byte-identical across reruns"
                                 : mismatch.c_str())};
}

} // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: %s <criterion 1..8> [work-dir]\n",
                     argv[0]);
        return 2;
    }
    const int which = std::atoi(argv[1]);
    const std::string work = (argc > 2) ? argv[2] : ".";
    std::filesystem::create_directories(work);

    Outcome (*checks[])(const std::string&) = {
        criterion1, criterion2, criterion3, criterion4,
        criterion5, criterion6, criterion7, criterion8,
    };
    if (which < 1 || which > 8) {
        std::fprintf(stderr, "criterion must be 1..8, got %d\n", which);
        return 2;
    }

    Outcome out;
    try {
        out = checks[which - 1](work);
    } catch (const std::exception& e) {
        out = {false, std::string("exception: ") + e.what()};
    }
    std::printf("criterion %d: %s (%s)\n", which,
                out.pass ? "PASS" : "FAIL", out.detail.c_str());
    return out.pass ? 0 : 1;
}
