#ifndef HFM_SPECTRAL_HPP
#define HFM_SPECTRAL_HPP

#include <complex>
#include <span>
#include <string>
#include <vector>

#include "analytic_flows.hpp"

namespace hfm {

/// Real <-> half-complex FFT pair on the periodic square [0, 2pi)^2 with
/// n x n nodes (row-major, index i*n + j, x = 2pi*i/n, y = 2pi*j/n), plus
/// the spectral operators the transport solver needs. Spectra are stored
/// normalized (to_spectral divides by n^2) so the transforms are exact
/// inverses of each other.
///
/// Plans are created with FFTW_ESTIMATE: plan selection is then a pure
/// function of the problem shape, so repeated runs of the same binary
/// produce bit-identical results (measured planning can pick different
/// algorithms from run to run, which would break log/checkpoint
/// reproducibility downstream).
class SpectralGrid2D {
public:
    explicit SpectralGrid2D(int n);
    ~SpectralGrid2D();
    SpectralGrid2D(const SpectralGrid2D&) = delete;
    SpectralGrid2D& operator=(const SpectralGrid2D&) = delete;

    int n() const { return n_; }
    std::size_t real_size() const { return static_cast<std::size_t>(n_) * n_; }
    std::size_t spec_size() const {
        return static_cast<std::size_t>(n_) * (n_ / 2 + 1);
    }
    double node_x(int i) const;
    double node_y(int j) const;

    void to_spectral(std::span<const double> real,
                     std::span<std::complex<double>> spec);
    /// The inverse transform; the input spectrum is left untouched (the
    /// library's complex-to-real transform destroys its input, so the copy
    /// into internal scratch is load-bearing, not an optimization miss).
    void to_physical(std::span<const std::complex<double>> spec,
                     std::span<double> real);

    /// out = d/dx in spectral space (i*kx multiply, Nyquist row zeroed —
    /// the unpaired mode has no consistent odd derivative).
    void derivative_x(std::span<const std::complex<double>> in,
                      std::span<std::complex<double>> out) const;
    void derivative_y(std::span<const std::complex<double>> in,
                      std::span<std::complex<double>> out) const;
    /// Squared wavenumber kx^2 + ky^2 of spectral entry (i, j).
    double k_squared(int i, int j) const;

    /// Zero every mode with |kx| > n/3 or ky > n/3 (2/3-rule truncation of
    /// aliased products).
    void apply_dealias(std::span<std::complex<double>> spec) const;

    /// Spatial mean of the field with this (normalized) spectrum.
    static double mean(std::span<const std::complex<double>> spec) {
        return spec[0].real();
    }

private:
    int n_ = 0;
    double* real_buf_ = nullptr;
    void* cplx_buf_ = nullptr; // fftw_complex[spec_size]
    void* plan_r2c_ = nullptr;
    void* plan_c2r_ = nullptr;
    std::vector<double> kx_; // signed wavenumber per row index
};

/// How the initial scalar field is built. All named fields are bounded in
/// [0, 1] as the transport contract requires.
struct InitialCondition {
    enum class Kind {
        Eigenmode, ///< (1 + sin x sin y)/2 — pure Laplacian eigenfunction offset
        Wave,      ///< (1 + sin x)/2 — single traveling mode under drift
        Mix,       ///< multi-mode blend exercising several length scales
        ExpSin,    ///< exp(sin x - 1) — full (decaying) spectrum in x
        Constant   ///< uniform value
    };
    Kind kind = Kind::Eigenmode;
    double value = 0.5; // Constant only

    double eval(double x, double y) const;
    std::string name() const;
    static InitialCondition parse(const std::string& text);
};

/// Run parameters for the scalar transport solve. kappa is the diffusivity
/// (the inverse Peclet number); dt must satisfy both stability bounds at
/// validation time.
struct SolverConfig {
    int n = 64;
    double dt = 5e-3;
    double kappa = 0.1;
    double t0 = 0.0;
    double t_final = 1.0;
    double snapshot_interval = 0.1;
    bool dealias = true;
    InitialCondition ic;

    /// Throws unless n is a power of two (>= 4), times/intervals are
    /// consistent multiples of dt, and dt satisfies the advective CFL bound
    /// dt <= 0.5 h / max|u| and the diffusive bound dt <= 0.25 h^2 / kappa
    /// (h = 2pi/n) for the given peak speed.
    void validate(double max_speed) const;

    int steps_total() const;
    int steps_per_snapshot() const;
};

/// One stored scalar field (n*n nodal values, row-major) with its time.
struct GridScalar {
    double t = 0.0;
    std::vector<double> values;
};

/// Ordered snapshots of the advected scalar, first entry at t0.
struct TransportSolution {
    int n = 0;
    double kappa = 0.0;
    AnalyticFlow flow;
    InitialCondition ic;
    std::vector<GridScalar> snapshots;
};

/// Advance dc/dt + u . grad c = kappa lap c on the periodic square with
/// pseudo-spectral derivatives and classical 4th-order Runge-Kutta, sampling
/// the analytic velocity at each stage time. The advective product is formed
/// in physical space and its spectrum truncated by the 2/3 rule when
/// dealiasing is on (the state itself then stays truncated). The flow must
/// be a periodic variant; a non-finite state aborts with the blow-up time.
TransportSolution solve_transport(const AnalyticFlow& flow,
                                  const SolverConfig& cfg);

} // namespace hfm

#endif
