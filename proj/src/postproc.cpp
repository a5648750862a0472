#include "postproc.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>

#include "csv_util.hpp"
#include "errors.hpp"

namespace hfm {

using csv::append_g17;
using csv::parse_field;

void SurfaceDiscretization::validate() const {
    if (points.empty())
        throw_invalid("surface discretization has no points");
    double sum_nx = 0.0, sum_ny = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const SurfacePoint& p = points[i];
        const double vals[] = {p.x, p.y, p.nx, p.ny, p.ds};
        for (double v : vals)
            if (!std::isfinite(v))
                throw_invalid("surface point " + std::to_string(i) +
                              " has a non-finite entry");
        if (!(p.ds > 0.0))
            throw_invalid("surface point " + std::to_string(i) +
                          " has non-positive arc-length weight");
        const double norm = std::hypot(p.nx, p.ny);
        if (std::abs(norm - 1.0) > 1e-12)
            throw_invalid("surface point " + std::to_string(i) +
                          " normal is not unit length (|n| = " +
                          std::to_string(norm) + ")");
        sum_nx += p.nx * p.ds;
        sum_ny += p.ny * p.ds;
    }
    if (closed && (std::abs(sum_nx) > 1e-10 || std::abs(sum_ny) > 1e-10))
        throw_invalid("closed surface fails the closure test: sum of n*ds = (" +
                      std::to_string(sum_nx) + ", " + std::to_string(sum_ny) +
                      ") exceeds 1e-10");
}

SurfaceDiscretization unit_circle_surface(int count) {
    if (count < 3)
        throw_invalid("unit circle discretization needs at least 3 points");
    SurfaceDiscretization surf;
    surf.closed = true;
    surf.points.resize(count);
    const double h = 2.0 * std::numbers::pi / count;
    for (int i = 0; i < count; ++i) {
        const double theta = h * i;
        SurfacePoint& p = surf.points[i];
        p.x = std::cos(theta);
        p.y = std::sin(theta);
        p.nx = p.x;
        p.ny = p.y;
        p.ds = h;
    }
    return surf;
}

void save_surface(const SurfaceDiscretization& surface,
                  const std::string& path) {
    surface.validate();
    std::string body = "x,y,nx,ny,ds\n";
    if (!surface.closed) body += "# open\n";
    for (const SurfacePoint& p : surface.points) {
        append_g17(body, p.x);
        body += ',';
        append_g17(body, p.y);
        body += ',';
        append_g17(body, p.nx);
        body += ',';
        append_g17(body, p.ny);
        body += ',';
        append_g17(body, p.ds);
        body += '\n';
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw_io("cannot open '" + path + "' for writing");
    out << body;
    if (!out.flush()) throw_io("failed writing '" + path + "'");
}

SurfaceDiscretization load_surface(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw_io("cannot open surface file '" + path + "'");

    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw_io(path + ": empty file");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "x,y,nx,ny,ds")
        throw_io(path + ":1: unrecognized header '" + line +
                 "' (expected x,y,nx,ny,ds)");

    SurfaceDiscretization surf;
    surf.closed = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (line == "# open")
                surf.closed = false;
            else if (line == "# closed")
                surf.closed = true;
            else
                throw_io(path + ":" + std::to_string(line_no) +
                         ": unrecognized directive '" + line +
                         "' (expected '# open' or '# closed')");
            continue;
        }
        const auto fields = csv::split_fields(line);
        if (fields.size() != 5)
            throw_io(path + ":" + std::to_string(line_no) +
                     ": expected 5 fields, found " +
                     std::to_string(fields.size()));
        SurfacePoint p;
        p.x = parse_field(fields[0], line_no, path);
        p.y = parse_field(fields[1], line_no, path);
        p.nx = parse_field(fields[2], line_no, path);
        p.ny = parse_field(fields[3], line_no, path);
        p.ds = parse_field(fields[4], line_no, path);
        surf.points.push_back(p);
    }
    if (surf.points.empty()) throw_io(path + ": surface file has no points");
    surf.validate();
    return surf;
}

FieldSampler checkpoint_sampler(const Checkpoint& ck) {
    ck.arch.validate();
    if (ck.arch.spatial_dim != 2)
        throw_invalid("surface post-processing supports 2D models only");
    if (ck.params.data.size() != ck.arch.param_count())
        throw_invalid("checkpoint parameter count does not match its "
                      "architecture");
    // Captured by value: the sampler owns an immutable copy of the model and
    // is safe to call from any thread.
    return [arch = ck.arch, norm = ck.norm,
            params = ck.params](double t, double x, double y) {
        const double point[3] = {t, x, y};
        return forward_jet(params, arch, norm, point);
    };
}

namespace {

void require_time(double t) {
    if (!std::isfinite(t)) throw_invalid("evaluation time must be finite");
}

FieldJet sample_checked(const FieldSampler& field, double t,
                        const SurfacePoint& p, std::size_t index) {
    FieldJet jet = field(t, p.x, p.y);
    const double probe[] = {jet.value[kFieldU], jet.value[kFieldV],
                            jet.value[kFieldP], jet.d1[kFieldU][1],
                            jet.d1[kFieldU][2], jet.d1[kFieldV][1],
                            jet.d1[kFieldV][2]};
    for (double v : probe)
        if (!std::isfinite(v))
            throw NonFiniteError("field evaluation returned a non-finite "
                                 "value at surface point " +
                                     std::to_string(index),
                                 index);
    return jet;
}

} // namespace

std::pair<double, double> lift_drag(const FieldSampler& field,
                                    const SurfaceDiscretization& surface,
                                    double re, double t) {
    surface.validate();
    if (!surface.closed)
        throw_invalid("force integrals require a closed surface");
    if (!(re > 0.0) || !std::isfinite(re))
        throw_invalid("Reynolds number must be positive and finite");
    require_time(t);

    const double i_re = 1.0 / re;
    double fl = 0.0, fd = 0.0;
    for (std::size_t i = 0; i < surface.points.size(); ++i) {
        const SurfacePoint& s = surface.points[i];
        const FieldJet jet = sample_checked(field, t, s, i);
        const double p = jet.value[kFieldP];
        const double u_x = jet.d1[kFieldU][1];
        const double u_y = jet.d1[kFieldU][2];
        const double v_x = jet.d1[kFieldV][1];
        const double v_y = jet.d1[kFieldV][2];
        const double shear = i_re * (u_y + v_x);
        fl += (-p * s.ny + 2.0 * i_re * v_y * s.ny + shear * s.nx) * s.ds;
        fd += (-p * s.nx + 2.0 * i_re * u_x * s.nx + shear * s.ny) * s.ds;
    }
    return {fl, fd};
}

ForceSeries force_series(const FieldSampler& field,
                         const SurfaceDiscretization& surface, double re,
                         std::span<const double> times) {
    if (times.empty()) throw_invalid("force series needs at least one time");
    ForceSeries out;
    out.samples.reserve(times.size());
    for (double t : times) {
        const auto [fl, fd] = lift_drag(field, surface, re, t);
        out.samples.push_back({t, fl, fd});
    }
    return out;
}

void export_forces(const ForceSeries& series, const std::string& path) {
    if (series.samples.empty())
        throw_invalid("refusing to export an empty force series");
    std::string body = "t,FL,FD\n";
    for (const ForcePoint& s : series.samples) {
        append_g17(body, s.t);
        body += ',';
        append_g17(body, s.fl);
        body += ',';
        append_g17(body, s.fd);
        body += '\n';
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw_io("cannot open '" + path + "' for writing");
    out << body;
    if (!out.flush()) throw_io("failed writing '" + path + "'");
}

std::vector<WssSample> wall_shear_stress(const FieldSampler& field,
                                         const SurfaceDiscretization& wall,
                                         double re, double t) {
    wall.validate();
    if (!(re > 0.0) || !std::isfinite(re))
        throw_invalid("Reynolds number must be positive and finite");
    require_time(t);

    const double i_re = 1.0 / re;
    std::vector<WssSample> out;
    out.reserve(wall.points.size());
    for (std::size_t i = 0; i < wall.points.size(); ++i) {
        const SurfacePoint& s = wall.points[i];
        const FieldJet jet = sample_checked(field, t, s, i);
        const double u_x = jet.d1[kFieldU][1];
        const double u_y = jet.d1[kFieldU][2];
        const double v_x = jet.d1[kFieldV][1];
        const double v_y = jet.d1[kFieldV][2];
        const double mixed = 0.5 * (u_y + v_x);
        WssSample w;
        w.x = s.x;
        w.y = s.y;
        w.taux = 2.0 * i_re * (u_x * s.nx + mixed * s.ny);
        w.tauy = 2.0 * i_re * (mixed * s.nx + v_y * s.ny);
        w.wss = std::sqrt(w.taux * w.taux + w.tauy * w.tauy);
        out.push_back(w);
    }
    return out;
}

WssField wss_field(const FieldSampler& field,
                   const SurfaceDiscretization& wall, double re,
                   std::span<const double> times) {
    if (times.empty())
        throw_invalid("wall shear stress sweep needs at least one time");
    WssField out;
    out.times.assign(times.begin(), times.end());
    out.slices.reserve(times.size());
    for (double t : times)
        out.slices.push_back(wall_shear_stress(field, wall, re, t));
    return out;
}

void export_wss(const WssField& field, const std::string& path) {
    if (field.times.size() != field.slices.size())
        throw_invalid("wall shear stress field has mismatched times and "
                      "slices");
    if (field.times.empty())
        throw_invalid("refusing to export an empty wall shear stress field");
    std::string body = "t,x,y,taux,tauy,wss\n";
    for (std::size_t k = 0; k < field.times.size(); ++k) {
        for (const WssSample& s : field.slices[k]) {
            append_g17(body, field.times[k]);
            body += ',';
            append_g17(body, s.x);
            body += ',';
            append_g17(body, s.y);
            body += ',';
            append_g17(body, s.taux);
            body += ',';
            append_g17(body, s.tauy);
            body += ',';
            append_g17(body, s.wss);
            body += '\n';
        }
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw_io("cannot open '" + path + "' for writing");
    out << body;
    if (!out.flush()) throw_io("failed writing '" + path + "'");
}

void GridSpec::validate() const {
    if (spatial_dim != 2 && spatial_dim != 3)
        throw_invalid("grid spatial dimension must be 2 or 3");
    for (int k = 0; k < spatial_dim; ++k) {
        if (count[k] < 1)
            throw_invalid("grid axis " + std::to_string(k) +
                          " needs at least 1 point");
        if (!std::isfinite(lo[k]) || !std::isfinite(hi[k]))
            throw_invalid("grid bounds must be finite");
        if (count[k] > 1 && !(hi[k] > lo[k]))
            throw_invalid("grid axis " + std::to_string(k) +
                          " has more than one point but no extent");
    }
}

std::size_t GridSpec::points_per_time() const {
    std::size_t n = 1;
    for (int k = 0; k < spatial_dim; ++k)
        n *= static_cast<std::size_t>(count[k]);
    return n;
}

FieldTable evaluate_on_grid(const Checkpoint& ck, const GridSpec& grid,
                            std::span<const double> times) {
    ck.arch.validate();
    grid.validate();
    if (ck.arch.spatial_dim != grid.spatial_dim)
        throw_invalid("grid dimension does not match the model");
    if (times.empty()) throw_invalid("grid evaluation needs at least one time");
    for (double t : times) require_time(t);
    if (ck.params.data.size() != ck.arch.param_count())
        throw_invalid("checkpoint parameter count does not match its "
                      "architecture");

    const int dim = grid.spatial_dim;
    auto axis_value = [&](int k, int i) {
        return grid.count[k] == 1
                   ? grid.lo[k]
                   : grid.lo[k] + (grid.hi[k] - grid.lo[k]) * i /
                                      (grid.count[k] - 1);
    };

    FieldTable table;
    table.spatial_dim = dim;
    table.rows.reserve(times.size() * grid.points_per_time());
    const int nout = ck.arch.output_arity();
    std::vector<double> out(nout);

    auto outside = [&](int k, double coord) {
        const double mapped = ck.norm.scale[k] * coord + ck.norm.shift[k];
        return std::abs(mapped) > 1.0 + 1e-9;
    };

    for (double t : times) {
        if (outside(0, t)) table.extrapolated = true;
        for (int ix = 0; ix < grid.count[0]; ++ix) {
            const double x = axis_value(0, ix);
            if (outside(1, x)) table.extrapolated = true;
            for (int iy = 0; iy < grid.count[1]; ++iy) {
                const double y = axis_value(1, iy);
                if (outside(2, y)) table.extrapolated = true;
                const int nz = dim == 3 ? grid.count[2] : 1;
                for (int iz = 0; iz < nz; ++iz) {
                    FieldRow row;
                    row.t = t;
                    row.x = x;
                    row.y = y;
                    double point[4] = {t, x, y, 0.0};
                    if (dim == 3) {
                        row.z = axis_value(2, iz);
                        point[3] = row.z;
                        if (outside(3, row.z)) table.extrapolated = true;
                    }
                    forward(ck.params, ck.arch, ck.norm,
                            std::span<const double>(point, dim + 1), out);
                    row.c = out[0];
                    row.d = out[1];
                    row.u = out[2];
                    row.v = out[3];
                    if (dim == 3) {
                        row.w = out[4];
                        row.p = out[5];
                    } else {
                        row.p = out[4];
                    }
                    table.rows.push_back(row);
                }
            }
        }
    }
    return table;
}

void export_field_table(const FieldTable& table, const std::string& path) {
    if (table.rows.empty())
        throw_invalid("refusing to export an empty field table");
    if (table.spatial_dim != 2 && table.spatial_dim != 3)
        throw_invalid("field table spatial dimension must be 2 or 3");
    const bool three = table.spatial_dim == 3;
    std::string body = three ? "t,x,y,z,c,d,u,v,w,p\n" : "t,x,y,c,d,u,v,p\n";
    for (const FieldRow& r : table.rows) {
        append_g17(body, r.t);
        body += ',';
        append_g17(body, r.x);
        body += ',';
        append_g17(body, r.y);
        body += ',';
        if (three) {
            append_g17(body, r.z);
            body += ',';
        }
        append_g17(body, r.c);
        body += ',';
        append_g17(body, r.d);
        body += ',';
        append_g17(body, r.u);
        body += ',';
        append_g17(body, r.v);
        body += ',';
        if (three) {
            append_g17(body, r.w);
            body += ',';
        }
        append_g17(body, r.p);
        body += '\n';
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw_io("cannot open '" + path + "' for writing");
    out << body;
    if (!out.flush()) throw_io("failed writing '" + path + "'");
}

FieldTable import_field_table(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw_io("cannot open field table '" + path + "'");

    FieldTable table;
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw_io(path + ": empty file");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line == "t,x,y,c,d,u,v,p") {
        table.spatial_dim = 2;
    } else if (line == "t,x,y,z,c,d,u,v,w,p") {
        table.spatial_dim = 3;
    } else {
        throw_io(path + ":1: unrecognized header '" + line +
                 "' (expected t,x,y,c,d,u,v,p or t,x,y,z,c,d,u,v,w,p)");
    }
    const bool three = table.spatial_dim == 3;
    const std::size_t want = three ? 10 : 8;

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = csv::split_fields(line);
        if (fields.size() != want)
            throw_io(path + ":" + std::to_string(line_no) + ": expected " +
                     std::to_string(want) + " fields, found " +
                     std::to_string(fields.size()));
        FieldRow r;
        std::size_t f = 0;
        r.t = parse_field(fields[f++], line_no, path);
        r.x = parse_field(fields[f++], line_no, path);
        r.y = parse_field(fields[f++], line_no, path);
        if (three) r.z = parse_field(fields[f++], line_no, path);
        r.c = parse_field(fields[f++], line_no, path);
        r.d = parse_field(fields[f++], line_no, path);
        r.u = parse_field(fields[f++], line_no, path);
        r.v = parse_field(fields[f++], line_no, path);
        if (three) r.w = parse_field(fields[f++], line_no, path);
        r.p = parse_field(fields[f++], line_no, path);
        table.rows.push_back(r);
    }
    if (table.rows.empty()) throw_io(path + ": field table has no rows");
    return table;
}

ErrorReport relative_l2(const FieldTable& pred, const FieldTable& exact,
                        bool align_pressure) {
    if (pred.spatial_dim != exact.spatial_dim)
        throw_invalid("field tables have different spatial dimensions");
    if (pred.rows.size() != exact.rows.size())
        throw_invalid("field tables have different row counts");
    if (pred.rows.empty()) throw_invalid("field tables are empty");
    for (std::size_t i = 0; i < pred.rows.size(); ++i) {
        const FieldRow& a = pred.rows[i];
        const FieldRow& b = exact.rows[i];
        if (a.t != b.t || a.x != b.x || a.y != b.y || a.z != b.z)
            throw_invalid("field tables do not list matching points (row " +
                          std::to_string(i) + " differs)");
    }

    // Group rows by time, in order of first appearance.
    std::vector<double> times;
    std::vector<std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < pred.rows.size(); ++i) {
        const double t = pred.rows[i].t;
        std::size_t g = 0;
        for (; g < times.size(); ++g)
            if (times[g] == t) break;
        if (g == times.size()) {
            times.push_back(t);
            groups.emplace_back();
        }
        groups[g].push_back(i);
    }

    const bool three = pred.spatial_dim == 3;
    ErrorReport report;
    for (std::size_t g = 0; g < times.size(); ++g) {
        const std::vector<std::size_t>& rows = groups[g];

        auto entry_for = [&](char name, auto&& getter, bool aligned,
                             double offset) {
            double num = 0.0, den = 0.0;
            for (std::size_t i : rows) {
                const double pv = getter(pred.rows[i]) - offset;
                const double ev = getter(exact.rows[i]);
                num += (pv - ev) * (pv - ev);
                den += ev * ev;
            }
            ErrorEntry e;
            e.t = times[g];
            e.field = name;
            e.aligned = aligned;
            if (den == 0.0) {
                e.defined = false;
                e.rel_l2 = std::numeric_limits<double>::quiet_NaN();
            } else {
                e.rel_l2 = std::sqrt(num) / std::sqrt(den);
            }
            report.entries.push_back(e);
        };

        entry_for('c', [](const FieldRow& r) { return r.c; }, false, 0.0);
        entry_for('u', [](const FieldRow& r) { return r.u; }, false, 0.0);
        entry_for('v', [](const FieldRow& r) { return r.v; }, false, 0.0);
        if (three)
            entry_for('w', [](const FieldRow& r) { return r.w; }, false, 0.0);

        double p_offset = 0.0;
        if (align_pressure) {
            for (std::size_t i : rows)
                p_offset += pred.rows[i].p - exact.rows[i].p;
            p_offset /= static_cast<double>(rows.size());
        }
        entry_for('p', [](const FieldRow& r) { return r.p; }, align_pressure,
                  p_offset);
    }
    return report;
}

void export_error_report(const ErrorReport& report, const std::string& path) {
    if (report.entries.empty())
        throw_invalid("refusing to export an empty error report");
    std::string body = "t,field,rel_l2,aligned\n";
    for (const ErrorEntry& e : report.entries) {
        append_g17(body, e.t);
        body += ',';
        body += e.field;
        body += ',';
        if (e.defined)
            append_g17(body, e.rel_l2);
        else
            body += "undefined";
        body += ',';
        body += e.aligned ? '1' : '0';
        body += '\n';
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw_io("cannot open '" + path + "' for writing");
    out << body;
    if (!out.flush()) throw_io("failed writing '" + path + "'");
}

} // namespace hfm
