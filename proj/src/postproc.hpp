// Post-processing of trained models and reference fields: boundary force
// integrals (lift/drag), wall shear stress, relative L2 error reports, and
// dense grid exports. All quantities are derived from analytic derivatives
// of the evaluated fields (the jet), never from finite differences of
// exported grids.
#ifndef HFM_POSTPROC_HPP
#define HFM_POSTPROC_HPP

#include <array>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "checkpoint.hpp"
#include "mlp.hpp"

namespace hfm {

/// One quadrature node of a boundary discretization: position, outward unit
/// normal, and trapezoidal arc-length weight.
struct SurfacePoint {
    double x = 0.0, y = 0.0;
    double nx = 0.0, ny = 0.0;
    double ds = 0.0;
};

/// Ordered boundary nodes with outward normals and quadrature weights.
/// Geometry is always user-supplied (loaded or constructed); the engine
/// never reconstructs surfaces from field data.
struct SurfaceDiscretization {
    std::vector<SurfacePoint> points;
    bool closed = true;

    /// Enforces: at least one point, finite entries, positive weights, unit
    /// normals within 1e-12, and (closed surfaces only) a componentwise
    /// discrete closure Σ n·ds within 1e-10 of zero.
    void validate() const;
};

/// Uniformly spaced counterclockwise unit circle centered at the origin
/// with exact outward normals; trapezoidal weights 2*pi/count.
SurfaceDiscretization unit_circle_surface(int count);

/// CSV with header `x,y,nx,ny,ds`. A directive line `# open` (or the
/// default `# closed`) may follow the header to set the topology flag.
SurfaceDiscretization load_surface(const std::string& path);
void save_surface(const SurfaceDiscretization& surface,
                  const std::string& path);

/// Point evaluator used by the integral operators: the full derivative jet
/// of all fields at one (t, x, y). Implementations must be safe to call
/// concurrently from multiple threads.
using FieldSampler = std::function<FieldJet(double t, double x, double y)>;

/// Sampler backed by a trained model (2D checkpoints only).
FieldSampler checkpoint_sampler(const Checkpoint& ck);

/// Lift and drag from the boundary stress integrals
///   F_L = ∮ [-p n_y + 2 Re^-1 v_y n_y + Re^-1 (u_y + v_x) n_x] ds
///   F_D = ∮ [-p n_x + 2 Re^-1 u_x n_x + Re^-1 (u_y + v_x) n_y] ds
/// evaluated with the trapezoidal rule at time t. Requires a closed surface.
std::pair<double, double> lift_drag(const FieldSampler& field,
                                    const SurfaceDiscretization& surface,
                                    double re, double t);

struct ForcePoint {
    double t = 0.0;
    double fl = 0.0;
    double fd = 0.0;
};
struct ForceSeries {
    std::vector<ForcePoint> samples;
};

/// lift_drag at every requested time, in order.
ForceSeries force_series(const FieldSampler& field,
                         const SurfaceDiscretization& surface, double re,
                         std::span<const double> times);

/// CSV with header `t,FL,FD`.
void export_forces(const ForceSeries& series, const std::string& path);

/// Viscous traction at one wall point:
///   tau_x = 2 Re^-1 [u_x n_x + (v_x + u_y)/2 n_y]
///   tau_y = 2 Re^-1 [(u_y + v_x)/2 n_x + v_y n_y]
/// and WSS = sqrt(tau_x^2 + tau_y^2).
struct WssSample {
    double x = 0.0, y = 0.0;
    double taux = 0.0, tauy = 0.0;
    double wss = 0.0;
};

/// Shear stress along the wall at time t, one sample per surface point.
/// Open surfaces are accepted (walls need not close).
std::vector<WssSample> wall_shear_stress(const FieldSampler& field,
                                         const SurfaceDiscretization& wall,
                                         double re, double t);

/// Wall shear stress across a sweep of times.
struct WssField {
    std::vector<double> times;
    std::vector<std::vector<WssSample>> slices; ///< one entry per time
};
WssField wss_field(const FieldSampler& field,
                   const SurfaceDiscretization& wall, double re,
                   std::span<const double> times);

/// CSV with header `t,x,y,taux,tauy,wss`, one row per (time, wall point).
void export_wss(const WssField& field, const std::string& path);

/// Dense field snapshot rows: all model outputs at grid points. The z and w
/// columns exist only in 3D tables.
struct FieldRow {
    double t = 0.0, x = 0.0, y = 0.0, z = 0.0;
    double c = 0.0, d = 0.0, u = 0.0, v = 0.0, w = 0.0, p = 0.0;
};
struct FieldTable {
    int spatial_dim = 2;
    /// Set when any evaluated point maps outside the model's normalized
    /// training box (extrapolation is allowed but worth reporting).
    bool extrapolated = false;
    std::vector<FieldRow> rows;
};

/// CSV with header `t,x,y,c,d,u,v,p` (2D) or `t,x,y,z,c,d,u,v,w,p` (3D).
void export_field_table(const FieldTable& table, const std::string& path);
FieldTable import_field_table(const std::string& path);

/// Axis-aligned evaluation grid: `count[k]` points per axis, endpoints
/// included (count 1 pins the axis at lo).
struct GridSpec {
    int spatial_dim = 2;
    std::array<double, 3> lo{{0.0, 0.0, 0.0}};
    std::array<double, 3> hi{{1.0, 1.0, 1.0}};
    std::array<int, 3> count{{2, 2, 1}};

    void validate() const;
    std::size_t points_per_time() const;
};

/// Evaluates the model over the grid at each time; rows ordered time-major,
/// then x, y[, z] with the last axis fastest. Deterministic.
FieldTable evaluate_on_grid(const Checkpoint& ck, const GridSpec& grid,
                            std::span<const double> times);

/// Relative L2 error of one field at one time. `defined` is false when the
/// reference norm is zero (the ratio does not exist; it is never reported
/// as 0).
struct ErrorEntry {
    double t = 0.0;
    char field = 'c'; ///< 'c', 'u', 'v', 'w', or 'p'
    double rel_l2 = 0.0;
    bool aligned = false; ///< pressure compared after mean alignment
    bool defined = true;
};
struct ErrorReport {
    std::vector<ErrorEntry> entries;
};

/// Per-time relative L2 errors ||pred - exact||_2 / ||exact||_2 for c, u,
/// v[, w], p over matching evaluation points. Both tables must list the
/// same coordinates in the same order. With align_pressure, the spatial
/// mean of (pred_p - exact_p) is subtracted from pred_p per time before
/// comparing (pressure is identifiable only up to a constant).
ErrorReport relative_l2(const FieldTable& pred, const FieldTable& exact,
                        bool align_pressure);

/// CSV with header `t,field,rel_l2,aligned`; undefined ratios are written
/// as the literal `undefined`.
void export_error_report(const ErrorReport& report, const std::string& path);

} // namespace hfm

#endif
