#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "analytic_flows.hpp"
#include "dataset.hpp"
#include "errors.hpp"
#include "physics.hpp"
#include "spectral.hpp"

using namespace hfm;

namespace {

constexpr double kPi = std::numbers::pi;

AnalyticFlow make_flow(FlowVariant v, double re) {
    AnalyticFlow f;
    f.variant = v;
    f.re = re;
    return f;
}

/// Scratch file path under the system temp directory, removed by the guard.
struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name)
        : path((std::filesystem::temp_directory_path() / name).string()) {}
    ~TempFile() {
        std::error_code ec;
        std::filesystem::remove(path, ec);
        std::filesystem::remove(path + ".json", ec);
    }
};

} // namespace

TEST_CASE("decaying vortex array: frozen values at reference points") {
    AnalyticFlow tg = make_flow(FlowVariant::TaylorGreen2D, 10.0);
    FieldJet j0 = analytic_eval(tg, 0.0, 0.0, 0.0);
    CHECK(j0.value[kFieldU] == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(j0.value[kFieldV] == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(j0.value[kFieldP] == doctest::Approx(-0.5).epsilon(1e-14));

    FieldJet j1 = analytic_eval(tg, 0.0, kPi / 2.0, 0.0);
    CHECK(j1.value[kFieldU] == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(j1.value[kFieldV] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(j1.value[kFieldP]) < 1e-14);

    // Time decay: u at t=1 is e^{-0.2} times u at t=0 for every point.
    FieldJet a = analytic_eval(tg, 0.0, 0.7, 1.3);
    FieldJet b = analytic_eval(tg, 1.0, 0.7, 1.3);
    CHECK(b.value[kFieldU] ==
          doctest::Approx(a.value[kFieldU] * std::exp(-0.2)).epsilon(1e-13));
}

TEST_CASE("every analytic variant satisfies the flow equations") {
    std::mt19937_64 rng(404);
    std::uniform_real_distribution<double> coord(0.0, 2.0 * kPi);
    std::uniform_real_distribution<double> time(0.0, 2.0);

    const FlowVariant variants[] = {
        FlowVariant::TaylorGreen2D,  FlowVariant::Beltrami3D,
        FlowVariant::Stagnation2D,   FlowVariant::RigidRotation2D,
        FlowVariant::ZeroVelocity2D, FlowVariant::Uniform2D};
    for (FlowVariant v : variants) {
        AnalyticFlow flow = make_flow(v, 7.0);
        AnalyticJetEvaluator eval(flow);
        FlowParams fp = FlowParams::fixed(flow.re, 3.0);
        double worst = 0.0;
        for (int rep = 0; rep < 100; ++rep) {
            const double t = time(rng), x = coord(rng), y = coord(rng),
                         z = coord(rng);
            FieldJet jet = eval.eval(t, x, y, z);
            ResidualSet r = flow.spatial_dim() == 3 ? residuals_3d(jet, fp)
                                                    : residuals_2d(jet, fp);
            worst = std::max(worst, r.max_abs());
        }
        INFO("variant ", flow.variant_name());
        CHECK(worst < 1e-10);
    }
}

TEST_CASE("fast velocity path matches the jet evaluator") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> coord(0.0, 2.0 * kPi);
    const FlowVariant variants[] = {
        FlowVariant::TaylorGreen2D, FlowVariant::Stagnation2D,
        FlowVariant::RigidRotation2D, FlowVariant::ZeroVelocity2D,
        FlowVariant::Uniform2D};
    for (FlowVariant v : variants) {
        AnalyticFlow flow = make_flow(v, 4.0);
        AnalyticJetEvaluator eval(flow);
        for (int rep = 0; rep < 10; ++rep) {
            const double t = coord(rng) / 6.0, x = coord(rng), y = coord(rng);
            double u = 0.0, vv = 0.0;
            analytic_velocity(flow, t, x, y, u, vv);
            FieldJet jet = eval.eval(t, x, y);
            CHECK(u == doctest::Approx(jet.value[kFieldU]).epsilon(1e-14));
            CHECK(vv == doctest::Approx(jet.value[kFieldV]).epsilon(1e-14));
        }
    }
    AnalyticFlow b3 = make_flow(FlowVariant::Beltrami3D, 1.0);
    double u = 0.0, v = 0.0;
    CHECK_THROWS_AS(analytic_velocity(b3, 0.0, 0.0, 0.0, u, v), Error);
}

TEST_CASE("flow variant parsing and validation") {
    CHECK(AnalyticFlow::parse_variant("taylor-green") ==
          FlowVariant::TaylorGreen2D);
    CHECK(AnalyticFlow::parse_variant("beltrami") == FlowVariant::Beltrami3D);
    CHECK_THROWS_AS((void)AnalyticFlow::parse_variant("vortex"), Error);
    CHECK_THROWS_AS(make_flow(FlowVariant::TaylorGreen2D, -1.0).validate(),
                    Error);
    CHECK(make_flow(FlowVariant::Beltrami3D, 1.0).spatial_dim() == 3);
    CHECK(make_flow(FlowVariant::TaylorGreen2D, 1.0).periodic());
    CHECK_FALSE(make_flow(FlowVariant::Stagnation2D, 1.0).periodic());
}

TEST_CASE("spectral transforms: round trip and derivatives") {
    SpectralGrid2D grid(32);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    std::vector<double> f(grid.real_size());
    for (auto& v : f) v = d(rng);

    std::vector<std::complex<double>> spec(grid.spec_size());
    std::vector<double> back(grid.real_size());
    grid.to_spectral(f, spec);
    grid.to_physical(spec, back);
    double max_err = 0.0, max_val = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        max_err = std::max(max_err, std::abs(f[i] - back[i]));
        max_val = std::max(max_val, std::abs(f[i]));
    }
    CHECK(max_err / max_val < 1e-12);

    // d/dx sin(x) = cos(x); lap sin(x)sin(y) = -2 sin(x)sin(y).
    std::vector<double> sx(grid.real_size()), sxy(grid.real_size());
    for (int i = 0; i < grid.n(); ++i)
        for (int j = 0; j < grid.n(); ++j) {
            sx[i * grid.n() + j] = std::sin(grid.node_x(i));
            sxy[i * grid.n() + j] =
                std::sin(grid.node_x(i)) * std::sin(grid.node_y(j));
        }
    std::vector<std::complex<double>> ds(grid.spec_size());
    grid.to_spectral(sx, spec);
    grid.derivative_x(spec, ds);
    grid.to_physical(ds, back);
    for (int i = 0; i < grid.n(); ++i)
        CHECK(back[i * grid.n()] ==
              doctest::Approx(std::cos(grid.node_x(i))).epsilon(1e-12));

    grid.to_spectral(sxy, spec);
    const int cols = grid.n() / 2 + 1;
    for (int i = 0; i < grid.n(); ++i)
        for (int j = 0; j < cols; ++j)
            ds[static_cast<std::size_t>(i) * cols + j] =
                -grid.k_squared(i, j) *
                spec[static_cast<std::size_t>(i) * cols + j];
    grid.to_physical(ds, back);
    for (std::size_t i = 0; i < back.size(); ++i)
        CHECK(back[i] == doctest::Approx(-2.0 * sxy[i]).epsilon(1e-11));

    CHECK(grid.mean(spec) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("diffusion eigenmode decays at the exact rate") {
    AnalyticFlow still = make_flow(FlowVariant::ZeroVelocity2D, 1.0);
    SolverConfig cfg;
    cfg.n = 32;
    cfg.dt = 0.01;
    cfg.kappa = 0.1;
    cfg.t_final = 1.0;
    cfg.snapshot_interval = 0.5;
    cfg.ic.kind = InitialCondition::Kind::Eigenmode;

    TransportSolution sol = solve_transport(still, cfg);
    REQUIRE(sol.snapshots.size() == 3);
    const auto& last = sol.snapshots.back();
    CHECK(last.t == doctest::Approx(1.0));
    SpectralGrid2D grid(cfg.n);
    const double decay = std::exp(-0.2); // e^{-kappa*(1+1)*t}
    double max_err = 0.0;
    for (int i = 0; i < cfg.n; ++i)
        for (int j = 0; j < cfg.n; ++j) {
            const double expect =
                0.5 * (1.0 +
                       decay * std::sin(grid.node_x(i)) *
                           std::sin(grid.node_y(j)));
            max_err = std::max(
                max_err, std::abs(last.values[i * cfg.n + j] - expect));
        }
    CHECK(max_err < 1e-8);

    // Energy decay: the L2 norm of the deviation from the mean never grows.
    double prev = 1e300;
    bool first = true;
    for (const auto& snap : sol.snapshots) {
        double mean = 0.0;
        for (double v : snap.values) mean += v;
        mean /= static_cast<double>(snap.values.size());
        double l2 = 0.0;
        for (double v : snap.values) l2 += (v - mean) * (v - mean);
        if (!first) CHECK(l2 <= prev * (1.0 + 1e-12));
        prev = l2;
        first = false;
    }
}

TEST_CASE("uniform drift transports the wave exactly") {
    AnalyticFlow drift = make_flow(FlowVariant::Uniform2D, 1.0);
    SolverConfig cfg;
    cfg.n = 64;
    cfg.dt = 0.005;
    cfg.kappa = 0.0;
    cfg.t_final = 1.0;
    cfg.snapshot_interval = 1.0;
    cfg.ic.kind = InitialCondition::Kind::Wave;

    TransportSolution sol = solve_transport(drift, cfg);
    const auto& last = sol.snapshots.back();
    SpectralGrid2D grid(cfg.n);
    double max_err = 0.0;
    for (int i = 0; i < cfg.n; ++i) {
        const double expect = 0.5 * (1.0 + std::sin(grid.node_x(i) - 1.0));
        for (int j = 0; j < cfg.n; ++j)
            max_err = std::max(
                max_err, std::abs(last.values[i * cfg.n + j] - expect));
    }
    CHECK(max_err < 1e-6);
}

TEST_CASE("vortex advection conserves the mean and respects the bounds") {
    AnalyticFlow tg = make_flow(FlowVariant::TaylorGreen2D, 10.0);
    SolverConfig cfg;
    cfg.n = 64;
    cfg.dt = 0.005;
    cfg.kappa = 0.1; // Pec = 10
    cfg.t_final = 2.0;
    cfg.snapshot_interval = 0.25;
    cfg.ic.kind = InitialCondition::Kind::Mix;

    TransportSolution sol = solve_transport(tg, cfg);
    REQUIRE(sol.snapshots.size() == 9);

    auto mean_of = [](const GridScalar& s) {
        double m = 0.0;
        for (double v : s.values) m += v;
        return m / static_cast<double>(s.values.size());
    };
    const double m0 = mean_of(sol.snapshots.front());
    double c_lo = 1e300, c_hi = -1e300;
    for (double v : sol.snapshots.front().values) {
        c_lo = std::min(c_lo, v);
        c_hi = std::max(c_hi, v);
    }
    for (const auto& snap : sol.snapshots) {
        CHECK(std::abs(mean_of(snap) - m0) < 1e-10);
        for (double v : snap.values) {
            CHECK(v >= c_lo - 1e-6);
            CHECK(v <= c_hi + 1e-6);
        }
    }
}

TEST_CASE("doubling the grid sharpens the advected profile by 10x or more") {
    // exp(sin x - 1) drifting at unit speed: c(t, x) = exp(sin(x - t) - 1).
    // The spectrum decays faster than geometrically, so each doubling of N
    // (and hence of the 2/3-rule cutoff) shrinks the truncation error by a
    // large factor until time-stepping error takes over.
    AnalyticFlow drift = make_flow(FlowVariant::Uniform2D, 1.0);
    auto run_error = [&](int n) {
        SolverConfig cfg;
        cfg.n = n;
        cfg.dt = 0.001;
        cfg.kappa = 0.0;
        cfg.t_final = 0.5;
        cfg.snapshot_interval = 0.5;
        cfg.ic.kind = InitialCondition::Kind::ExpSin;
        TransportSolution sol = solve_transport(drift, cfg);
        const auto& last = sol.snapshots.back();
        SpectralGrid2D grid(n);
        double max_err = 0.0;
        for (int i = 0; i < n; ++i) {
            const double expect = std::exp(std::sin(grid.node_x(i) - 0.5) - 1.0);
            for (int j = 0; j < n; ++j)
                max_err = std::max(max_err,
                                   std::abs(last.values[i * n + j] - expect));
        }
        return max_err;
    };
    const double e8 = run_error(8);
    const double e16 = run_error(16);
    const double e32 = run_error(32);
    CHECK(e8 / e16 > 10.0);
    CHECK(e16 / e32 > 10.0);
    CHECK(e32 < 1e-6);
}

TEST_CASE("solver input validation") {
    AnalyticFlow drift = make_flow(FlowVariant::Uniform2D, 1.0);
    SolverConfig cfg;
    cfg.n = 64;
    cfg.kappa = 0.0;

    cfg.dt = 0.1; // advective bound is 0.5 * (2pi/64) / 1 = 0.0491
    cfg.snapshot_interval = 0.5;
    cfg.t_final = 1.0;
    CHECK_THROWS_WITH_AS(solve_transport(drift, cfg),
                         doctest::Contains("CFL"), Error);

    AnalyticFlow still = make_flow(FlowVariant::ZeroVelocity2D, 1.0);
    cfg.kappa = 0.5; // diffusive bound is 0.25 h^2 / kappa = 0.00482
    cfg.dt = 0.01;
    cfg.snapshot_interval = 0.05;
    CHECK_THROWS_WITH_AS(solve_transport(still, cfg),
                         doctest::Contains("CFL"), Error);

    cfg.kappa = 0.1;
    cfg.dt = 0.004;
    cfg.n = 48; // not a power of two
    CHECK_THROWS_AS(solve_transport(still, cfg), Error);
    cfg.n = 32;
    cfg.snapshot_interval = 0.0101; // not a multiple of dt
    CHECK_THROWS_AS(solve_transport(still, cfg), Error);
    cfg.snapshot_interval = 0.1;
    cfg.ic = InitialCondition::parse("constant:1.5"); // out of [0,1]
    CHECK_THROWS_AS(solve_transport(still, cfg), Error);

    AnalyticFlow stag = make_flow(FlowVariant::Stagnation2D, 1.0);
    cfg.ic = InitialCondition::parse("eigenmode");
    CHECK_THROWS_AS(solve_transport(stag, cfg), Error);
}

TEST_CASE("initial condition parsing") {
    CHECK(InitialCondition::parse("eigenmode").kind ==
          InitialCondition::Kind::Eigenmode);
    CHECK(InitialCondition::parse("constant:0.25").value ==
          doctest::Approx(0.25));
    CHECK(InitialCondition::parse("constant:0.25").name() ==
          InitialCondition::parse(InitialCondition::parse("constant:0.25")
                                      .name())
              .name());
    CHECK_THROWS_AS((void)InitialCondition::parse("ripple"), Error);
    CHECK_THROWS_AS((void)InitialCondition::parse("constant:abc"), Error);
}

namespace {

TransportSolution tiny_solution() {
    AnalyticFlow still = make_flow(FlowVariant::ZeroVelocity2D, 1.0);
    SolverConfig cfg;
    cfg.n = 16;
    cfg.dt = 0.01;
    cfg.kappa = 0.05;
    cfg.t_final = 0.2;
    cfg.snapshot_interval = 0.1;
    cfg.ic.kind = InitialCondition::Kind::Mix;
    return solve_transport(still, cfg);
}

} // namespace

TEST_CASE("sampling: determinism, exactness, and noise statistics") {
    TransportSolution sol = tiny_solution();

    SampledDataset a = sample_points(sol, 500, 99, 0.0);
    SampledDataset b = sample_points(sol, 500, 99, 0.0);
    REQUIRE(a.records.size() == 500);
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        CHECK(a.records[i].t == b.records[i].t);
        CHECK(a.records[i].x == b.records[i].x);
        CHECK(a.records[i].c == b.records[i].c);
    }
    SampledDataset c = sample_points(sol, 500, 100, 0.0);
    bool any_diff = false;
    for (std::size_t i = 0; i < c.records.size(); ++i)
        any_diff = any_diff || c.records[i].c != a.records[i].c;
    CHECK(any_diff);

    // Noise-free draws are bit-equal to stored nodal values.
    const double spacing = 2.0 * kPi / sol.n;
    for (const SampleRecord& r : a.records) {
        const auto snap =
            std::find_if(sol.snapshots.begin(), sol.snapshots.end(),
                         [&](const GridScalar& s) { return s.t == r.t; });
        REQUIRE(snap != sol.snapshots.end());
        const int i = static_cast<int>(std::lround(r.x / spacing));
        const int j = static_cast<int>(std::lround(r.y / spacing));
        CHECK(r.c == snap->values[static_cast<std::size_t>(i) * sol.n + j]);
    }

    // Gaussian noise on a constant-1/2 field: sample std close to sigma,
    // values clamped to [0, 1].
    TransportSolution flat;
    flat.n = 16;
    flat.flow = make_flow(FlowVariant::ZeroVelocity2D, 1.0);
    flat.snapshots.push_back(
        GridScalar{0.0, std::vector<double>(16 * 16, 0.5)});
    SampledDataset noisy = sample_points(flat, 100000, 7, 0.01);
    double mean = 0.0;
    for (const auto& r : noisy.records) mean += r.c;
    mean /= static_cast<double>(noisy.records.size());
    double var = 0.0;
    for (const auto& r : noisy.records)
        var += (r.c - mean) * (r.c - mean);
    var /= static_cast<double>(noisy.records.size() - 1);
    const double sd = std::sqrt(var);
    CHECK(sd > 0.009);
    CHECK(sd < 0.011);

    SampledDataset wild = sample_points(flat, 1000, 8, 5.0);
    for (const auto& r : wild.records) {
        CHECK(r.c >= 0.0);
        CHECK(r.c <= 1.0);
    }

    CHECK_THROWS_AS((void)sample_points(sol, 0, 1, 0.0), Error);
    TransportSolution empty;
    empty.n = 16;
    CHECK_THROWS_AS((void)sample_points(empty, 10, 1, 0.0), Error);
}

TEST_CASE("dataset files: round trip, fixtures, and rejection") {
    TransportSolution sol = tiny_solution();
    SampledDataset ds = sample_points(sol, 200, 4, 0.02);

    TempFile f("hfm_test_dataset.csv");
    export_dataset(ds, f.path);
    SampledDataset back = import_dataset(f.path);
    REQUIRE(back.records.size() == ds.records.size());
    for (std::size_t i = 0; i < ds.records.size(); ++i) {
        CHECK(back.records[i].t == ds.records[i].t);
        CHECK(back.records[i].x == ds.records[i].x);
        CHECK(back.records[i].y == ds.records[i].y);
        CHECK(back.records[i].c == ds.records[i].c);
    }
    CHECK(back.has_meta);
    CHECK(back.meta.flow == "zero");
    CHECK(back.meta.kappa == doctest::Approx(0.05));
    CHECK(back.meta.seed == 4);

    // Hand-written fixture.
    TempFile g("hfm_test_fixture.csv");
    {
        std::ofstream out(g.path);
        out << "t,x,y,c\n0.5,1,2,0.25\n1.5,3.25,0.125,1\n2,0,6.25,0\n";
    }
    SampledDataset fix = import_dataset(g.path);
    REQUIRE(fix.records.size() == 3);
    CHECK(fix.records[0].t == 0.5);
    CHECK(fix.records[1].x == 3.25);
    CHECK(fix.records[2].y == 6.25);
    CHECK(fix.records[1].c == 1.0);
    CHECK_FALSE(fix.has_meta);

    // Malformed content is rejected with the line number.
    TempFile h("hfm_test_bad.csv");
    {
        std::ofstream out(h.path);
        out << "t,x,y,c\n0,0,0,0.5\n0,zero,0,0.5\n";
    }
    CHECK_THROWS_WITH_AS((void)import_dataset(h.path), doctest::Contains(":3"),
                         Error);
    {
        std::ofstream out(h.path);
        out << "t,x,y,c\n0,0,0\n";
    }
    CHECK_THROWS_AS((void)import_dataset(h.path), Error);
    {
        std::ofstream out(h.path);
        out << "t,x,y,c\n";
    }
    CHECK_THROWS_WITH_AS((void)import_dataset(h.path),
                         doctest::Contains("no records"), Error);
    {
        std::ofstream out(h.path);
        out << "time,x,y,c\n0,0,0,0.5\n";
    }
    CHECK_THROWS_AS((void)import_dataset(h.path), Error);
    CHECK_THROWS_AS((void)import_dataset("/nonexistent/nowhere.csv"), Error);
}
