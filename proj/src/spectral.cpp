#include "spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>

#include "errors.hpp"

namespace hfm {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

/// True when value is an integer multiple of step within 1e-9 relative.
bool integer_multiple(double value, double step, long& count) {
    const double q = value / step;
    count = std::lround(q);
    return count > 0 && std::abs(q - static_cast<double>(count)) <=
                            1e-9 * std::max(1.0, std::abs(q));
}

} // namespace

SpectralGrid2D::SpectralGrid2D(int n) : n_(n) {
    if (!power_of_two(n) || n < 4)
        throw_invalid("grid size must be a power of two >= 4, got " +
                      std::to_string(n));
    real_buf_ = fftw_alloc_real(real_size());
    fftw_complex* cb = fftw_alloc_complex(spec_size());
    cplx_buf_ = cb;
    if (!real_buf_ || !cb)
        throw Error(ErrorCode::Internal, "FFT buffer allocation failed");
    plan_r2c_ = fftw_plan_dft_r2c_2d(n_, n_, real_buf_, cb, FFTW_ESTIMATE);
    plan_c2r_ = fftw_plan_dft_c2r_2d(n_, n_, cb, real_buf_, FFTW_ESTIMATE);
    if (!plan_r2c_ || !plan_c2r_)
        throw Error(ErrorCode::Internal, "FFT planning failed");
    kx_.resize(n_);
    for (int i = 0; i < n_; ++i) kx_[i] = i <= n_ / 2 ? i : i - n_;
}

SpectralGrid2D::~SpectralGrid2D() {
    if (plan_r2c_) fftw_destroy_plan(static_cast<fftw_plan>(plan_r2c_));
    if (plan_c2r_) fftw_destroy_plan(static_cast<fftw_plan>(plan_c2r_));
    if (real_buf_) fftw_free(real_buf_);
    if (cplx_buf_) fftw_free(cplx_buf_);
}

double SpectralGrid2D::node_x(int i) const { return kTwoPi * i / n_; }
double SpectralGrid2D::node_y(int j) const { return kTwoPi * j / n_; }

void SpectralGrid2D::to_spectral(std::span<const double> real,
                                 std::span<std::complex<double>> spec) {
    if (real.size() != real_size() || spec.size() != spec_size())
        throw_invalid("to_spectral: buffer sizes do not match the grid");
    std::memcpy(real_buf_, real.data(), real_size() * sizeof(double));
    fftw_execute(static_cast<fftw_plan>(plan_r2c_));
    const auto* cb = static_cast<const fftw_complex*>(cplx_buf_);
    const double scale = 1.0 / static_cast<double>(real_size());
    for (std::size_t k = 0; k < spec_size(); ++k)
        spec[k] = std::complex<double>(cb[k][0] * scale, cb[k][1] * scale);
}

void SpectralGrid2D::to_physical(std::span<const std::complex<double>> spec,
                                 std::span<double> real) {
    if (real.size() != real_size() || spec.size() != spec_size())
        throw_invalid("to_physical: buffer sizes do not match the grid");
    auto* cb = static_cast<fftw_complex*>(cplx_buf_);
    for (std::size_t k = 0; k < spec_size(); ++k) {
        cb[k][0] = spec[k].real();
        cb[k][1] = spec[k].imag();
    }
    fftw_execute(static_cast<fftw_plan>(plan_c2r_));
    std::memcpy(real.data(), real_buf_, real_size() * sizeof(double));
}

void SpectralGrid2D::derivative_x(std::span<const std::complex<double>> in,
                                  std::span<std::complex<double>> out) const {
    const int nyq = n_ / 2;
    const int cols = n_ / 2 + 1;
    for (int i = 0; i < n_; ++i) {
        const double kx = kx_[i];
        for (int j = 0; j < cols; ++j) {
            const std::size_t idx = static_cast<std::size_t>(i) * cols + j;
            out[idx] = i == nyq ? std::complex<double>(0.0, 0.0)
                                : std::complex<double>(0.0, kx) * in[idx];
        }
    }
}

void SpectralGrid2D::derivative_y(std::span<const std::complex<double>> in,
                                  std::span<std::complex<double>> out) const {
    const int nyq = n_ / 2;
    const int cols = n_ / 2 + 1;
    for (int i = 0; i < n_; ++i) {
        for (int j = 0; j < cols; ++j) {
            const std::size_t idx = static_cast<std::size_t>(i) * cols + j;
            out[idx] = j == nyq
                           ? std::complex<double>(0.0, 0.0)
                           : std::complex<double>(0.0, double(j)) * in[idx];
        }
    }
}

double SpectralGrid2D::k_squared(int i, int j) const {
    const double kx = kx_[i];
    const double ky = j;
    return kx * kx + ky * ky;
}

void SpectralGrid2D::apply_dealias(
    std::span<std::complex<double>> spec) const {
    const double kmax = n_ / 3.0;
    const int cols = n_ / 2 + 1;
    for (int i = 0; i < n_; ++i) {
        const bool cut_x = std::abs(kx_[i]) > kmax;
        for (int j = 0; j < cols; ++j)
            if (cut_x || j > kmax)
                spec[static_cast<std::size_t>(i) * cols + j] = 0.0;
    }
}

double InitialCondition::eval(double x, double y) const {
    switch (kind) {
    case Kind::Eigenmode:
        return 0.5 * (1.0 + std::sin(x) * std::sin(y));
    case Kind::Wave:
        return 0.5 * (1.0 + std::sin(x));
    case Kind::Mix:
        return 0.5 + 0.25 * std::sin(x) * std::sin(y) +
               0.15 * std::cos(2.0 * x + 0.9) * std::sin(y + 0.4) +
               0.1 * std::sin(x + 2.0 * y + 1.7);
    case Kind::ExpSin:
        return std::exp(std::sin(x) - 1.0);
    case Kind::Constant:
        return value;
    }
    throw Error(ErrorCode::Internal, "unreachable initial-condition kind");
}

std::string InitialCondition::name() const {
    switch (kind) {
    case Kind::Eigenmode: return "eigenmode";
    case Kind::Wave: return "wave";
    case Kind::Mix: return "mix";
    case Kind::ExpSin: return "expsin";
    case Kind::Constant: return "constant:" + std::to_string(value);
    }
    throw Error(ErrorCode::Internal, "unreachable initial-condition kind");
}

InitialCondition InitialCondition::parse(const std::string& text) {
    InitialCondition ic;
    if (text == "eigenmode") {
        ic.kind = Kind::Eigenmode;
    } else if (text == "wave") {
        ic.kind = Kind::Wave;
    } else if (text == "mix") {
        ic.kind = Kind::Mix;
    } else if (text == "expsin") {
        ic.kind = Kind::ExpSin;
    } else if (text.rfind("constant:", 0) == 0) {
        ic.kind = Kind::Constant;
        try {
            std::size_t used = 0;
            ic.value = std::stod(text.substr(9), &used);
            if (used != text.size() - 9) throw std::invalid_argument(text);
        } catch (const std::exception&) {
            throw_invalid("malformed constant initial condition '" + text +
                          "' (expected constant:<value>)");
        }
    } else {
        throw_invalid("unknown initial condition '" + text +
                      "' (expected eigenmode, wave, mix, expsin, or "
                      "constant:<value>)");
    }
    return ic;
}

void SolverConfig::validate(double max_speed) const {
    if (!power_of_two(n) || n < 4)
        throw_invalid("grid size must be a power of two >= 4, got " +
                      std::to_string(n));
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw_invalid("time step must be positive");
    if (!(kappa >= 0.0) || !std::isfinite(kappa))
        throw_invalid("diffusivity must be finite and >= 0");
    if (!(t_final > t0))
        throw_invalid("final time must exceed the start time");
    long m = 0;
    if (!integer_multiple(snapshot_interval, dt, m))
        throw_invalid("snapshot interval must be a positive integer multiple "
                      "of dt");
    long s = 0;
    if (!integer_multiple(t_final - t0, snapshot_interval, s))
        throw_invalid("the time window must be an integer number of snapshot "
                      "intervals");
    const double h = kTwoPi / n;
    if (max_speed > 0.0) {
        const double bound = 0.5 * h / max_speed;
        if (dt > bound)
            throw_invalid("time step " + std::to_string(dt) +
                          " violates the advective CFL bound dt <= 0.5*h/max|u| = " +
                          std::to_string(bound));
    }
    if (kappa > 0.0) {
        const double bound = 0.25 * h * h / kappa;
        if (dt > bound)
            throw_invalid("time step " + std::to_string(dt) +
                          " violates the diffusive CFL bound dt <= 0.25*h^2/kappa = " +
                          std::to_string(bound));
    }
}

int SolverConfig::steps_per_snapshot() const {
    long m = 0;
    integer_multiple(snapshot_interval, dt, m);
    return static_cast<int>(m);
}

int SolverConfig::steps_total() const {
    long m = 0, s = 0;
    integer_multiple(snapshot_interval, dt, m);
    integer_multiple(t_final - t0, snapshot_interval, s);
    return static_cast<int>(m * s);
}

namespace {

using Spectrum = std::vector<std::complex<double>>;

/// dc/dt in spectral space at stage time t: -FFT[u c_x + v c_y] (dealiased)
/// - kappa k^2 c_hat. Velocities come from the analytic flow at the nodes.
class TransportRhs {
public:
    TransportRhs(SpectralGrid2D& grid, const AnalyticFlow& flow,
                 const SolverConfig& cfg)
        : grid_(grid), flow_(flow), cfg_(cfg), dx_(grid.spec_size()),
          dy_(grid.spec_size()), cx_(grid.real_size()), cy_(grid.real_size()),
          adv_(grid.real_size()), u_(grid.real_size()), v_(grid.real_size()) {
        velocity_static_ = flow.variant != FlowVariant::TaylorGreen2D;
        if (velocity_static_) fill_velocity(0.0);
    }

    void operator()(const Spectrum& c_hat, double t, Spectrum& out) {
        grid_.derivative_x(c_hat, dx_);
        grid_.derivative_y(c_hat, dy_);
        grid_.to_physical(dx_, cx_);
        grid_.to_physical(dy_, cy_);
        if (!velocity_static_) fill_velocity(t);
        for (std::size_t i = 0; i < adv_.size(); ++i)
            adv_[i] = u_[i] * cx_[i] + v_[i] * cy_[i];
        grid_.to_spectral(adv_, out);
        if (cfg_.dealias) grid_.apply_dealias(out);
        const int cols = grid_.n() / 2 + 1;
        for (int i = 0; i < grid_.n(); ++i)
            for (int j = 0; j < cols; ++j) {
                const std::size_t idx =
                    static_cast<std::size_t>(i) * cols + j;
                out[idx] = -out[idx] -
                           cfg_.kappa * grid_.k_squared(i, j) * c_hat[idx];
            }
    }

private:
    void fill_velocity(double t) {
        const int n = grid_.n();
        for (int i = 0; i < n; ++i) {
            const double x = grid_.node_x(i);
            for (int j = 0; j < n; ++j) {
                const std::size_t idx = static_cast<std::size_t>(i) * n + j;
                analytic_velocity(flow_, t, x, grid_.node_y(j), u_[idx],
                                  v_[idx]);
            }
        }
    }

    SpectralGrid2D& grid_;
    const AnalyticFlow& flow_;
    const SolverConfig& cfg_;
    bool velocity_static_ = false;
    Spectrum dx_, dy_;
    std::vector<double> cx_, cy_, adv_, u_, v_;
};

bool spectrum_finite(const Spectrum& s) {
    for (const auto& z : s)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    return true;
}

} // namespace

TransportSolution solve_transport(const AnalyticFlow& flow,
                                  const SolverConfig& cfg) {
    flow.validate();
    if (!flow.periodic())
        throw_invalid("flow variant '" + flow.variant_name() +
                      "' is not periodic; the transport solver accepts "
                      "taylor-green, zero, or uniform");
    cfg.validate(solver_max_speed(flow, cfg.t0));

    SpectralGrid2D grid(cfg.n);
    const int n = cfg.n;

    std::vector<double> c0(grid.real_size());
    double c_min = 1.0, c_max = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double v = cfg.ic.eval(grid.node_x(i), grid.node_y(j));
            c0[static_cast<std::size_t>(i) * n + j] = v;
            c_min = std::min(c_min, v);
            c_max = std::max(c_max, v);
        }
    if (c_min < -1e-12 || c_max > 1.0 + 1e-12)
        throw_invalid("initial condition must stay within [0, 1]; got range [" +
                      std::to_string(c_min) + ", " + std::to_string(c_max) +
                      "]");

    Spectrum c_hat(grid.spec_size());
    grid.to_spectral(c0, c_hat);
    if (cfg.dealias) grid.apply_dealias(c_hat);

    TransportSolution sol;
    sol.n = n;
    sol.kappa = cfg.kappa;
    sol.flow = flow;
    sol.ic = cfg.ic;

    auto snapshot = [&](double t) {
        GridScalar gs;
        gs.t = t;
        gs.values.resize(grid.real_size());
        grid.to_physical(c_hat, gs.values);
        sol.snapshots.push_back(std::move(gs));
    };
    snapshot(cfg.t0);

    TransportRhs rhs(grid, flow, cfg);
    Spectrum k1(grid.spec_size()), k2(grid.spec_size()), k3(grid.spec_size()),
        k4(grid.spec_size()), stage(grid.spec_size());

    const int per_snap = cfg.steps_per_snapshot();
    const int total = cfg.steps_total();
    const double dt = cfg.dt;
    for (int step = 0; step < total; ++step) {
        const double t = cfg.t0 + dt * step;
        rhs(c_hat, t, k1);
        for (std::size_t i = 0; i < stage.size(); ++i)
            stage[i] = c_hat[i] + 0.5 * dt * k1[i];
        rhs(stage, t + 0.5 * dt, k2);
        for (std::size_t i = 0; i < stage.size(); ++i)
            stage[i] = c_hat[i] + 0.5 * dt * k2[i];
        rhs(stage, t + 0.5 * dt, k3);
        for (std::size_t i = 0; i < stage.size(); ++i)
            stage[i] = c_hat[i] + dt * k3[i];
        rhs(stage, t + dt, k4);
        for (std::size_t i = 0; i < c_hat.size(); ++i)
            c_hat[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);

        if (!spectrum_finite(c_hat))
            throw DivergedError("transport solver produced a non-finite "
                                "field at t = " +
                                    std::to_string(t + dt),
                                static_cast<std::size_t>(step));
        if ((step + 1) % per_snap == 0)
            snapshot(cfg.t0 + dt * (step + 1));
    }
    return sol;
}

} // namespace hfm
