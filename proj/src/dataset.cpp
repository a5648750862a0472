#include "dataset.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include <nlohmann/json.hpp>

#include "csv_util.hpp"
#include "errors.hpp"

namespace hfm {

SampledDataset sample_points(const TransportSolution& sol, std::size_t count,
                             std::uint64_t seed, double sigma) {
    if (sol.snapshots.empty())
        throw_invalid("cannot sample from an empty snapshot list");
    if (count < 1) throw_invalid("sample count must be at least 1");
    if (!(sigma >= 0.0)) throw_invalid("noise sigma must be >= 0");
    const int n = sol.n;
    const std::size_t nodes = static_cast<std::size_t>(n) * n;

    SampledDataset ds;
    ds.spatial_dim = 2;
    ds.records.resize(count);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick_snap(
        0, sol.snapshots.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_node(0, nodes - 1);
    std::normal_distribution<double> noise(0.0, sigma);

    const double spacing = 2.0 * std::numbers::pi / n;
    for (std::size_t s = 0; s < count; ++s) {
        const auto& snap = sol.snapshots[pick_snap(rng)];
        const std::size_t node = pick_node(rng);
        SampleRecord& r = ds.records[s];
        r.t = snap.t;
        r.x = spacing * static_cast<double>(node / n);
        r.y = spacing * static_cast<double>(node % n);
        r.c = snap.values[node];
        if (sigma > 0.0)
            r.c = std::clamp(r.c + noise(rng), 0.0, 1.0);
    }

    ds.meta.flow = sol.flow.variant_name();
    ds.meta.re = sol.flow.re;
    ds.meta.kappa = sol.kappa;
    ds.meta.grid_n = n;
    ds.meta.ic = sol.ic.name();
    ds.meta.noise_sigma = sigma;
    ds.meta.seed = seed;
    ds.meta.t_min = sol.snapshots.front().t;
    ds.meta.t_max = sol.snapshots.back().t;
    ds.has_meta = true;
    return ds;
}

using csv::append_g17;
using csv::parse_field;

void export_dataset(const SampledDataset& ds, const std::string& path) {
    if (ds.records.empty())
        throw_invalid("refusing to export a dataset with no records");
    if (ds.spatial_dim != 2 && ds.spatial_dim != 3)
        throw_invalid("dataset spatial dimension must be 2 or 3");

    std::string body;
    body.reserve(ds.records.size() * 80);
    body += ds.spatial_dim == 3 ? "t,x,y,z,c\n" : "t,x,y,c\n";
    for (const SampleRecord& r : ds.records) {
        append_g17(body, r.t);
        body += ',';
        append_g17(body, r.x);
        body += ',';
        append_g17(body, r.y);
        body += ',';
        if (ds.spatial_dim == 3) {
            append_g17(body, r.z);
            body += ',';
        }
        append_g17(body, r.c);
        body += '\n';
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw_io("cannot open '" + path + "' for writing");
    out << body;
    if (!out.flush()) throw_io("failed writing '" + path + "'");

    nlohmann::json j;
    j["spatial_dim"] = ds.spatial_dim;
    j["count"] = ds.records.size();
    if (ds.has_meta) {
        j["flow"] = ds.meta.flow;
        j["re"] = ds.meta.re;
        j["kappa"] = ds.meta.kappa;
        j["grid_n"] = ds.meta.grid_n;
        j["ic"] = ds.meta.ic;
        j["noise_sigma"] = ds.meta.noise_sigma;
        j["seed"] = ds.meta.seed;
        j["t_min"] = ds.meta.t_min;
        j["t_max"] = ds.meta.t_max;
    }
    const std::string meta_path = path + ".json";
    std::ofstream mout(meta_path, std::ios::binary | std::ios::trunc);
    if (!mout) throw_io("cannot open '" + meta_path + "' for writing");
    mout << j.dump(2) << '\n';
    if (!mout.flush()) throw_io("failed writing '" + meta_path + "'");
}

SampledDataset import_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw_io("cannot open dataset '" + path + "'");

    SampledDataset ds;
    std::string line;
    std::size_t line_no = 0;

    if (!std::getline(in, line)) throw_io(path + ": empty file");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line == "t,x,y,c") {
        ds.spatial_dim = 2;
    } else if (line == "t,x,y,z,c") {
        ds.spatial_dim = 3;
    } else {
        throw_io(path + ":1: unrecognized header '" + line +
                 "' (expected t,x,y,c or t,x,y,z,c)");
    }
    const std::size_t want = ds.spatial_dim == 3 ? 5 : 4;

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = csv::split_fields(line);
        if (fields.size() != want)
            throw_io(path + ":" + std::to_string(line_no) + ": expected " +
                     std::to_string(want) + " fields, found " +
                     std::to_string(fields.size()));
        SampleRecord r;
        r.t = parse_field(fields[0], line_no, path);
        r.x = parse_field(fields[1], line_no, path);
        r.y = parse_field(fields[2], line_no, path);
        if (ds.spatial_dim == 3) {
            r.z = parse_field(fields[3], line_no, path);
            r.c = parse_field(fields[4], line_no, path);
        } else {
            r.c = parse_field(fields[3], line_no, path);
        }
        ds.records.push_back(r);
    }
    if (ds.records.empty())
        throw_io(path + ": dataset contains no records");

    const std::string meta_path = path + ".json";
    if (std::filesystem::exists(meta_path)) {
        std::ifstream min(meta_path, std::ios::binary);
        if (!min) throw_io("cannot open metadata '" + meta_path + "'");
        nlohmann::json j;
        try {
            min >> j;
        } catch (const nlohmann::json::exception& e) {
            throw_io(meta_path + ": malformed metadata JSON: " + e.what());
        }
        ds.meta.flow = j.value("flow", std::string());
        ds.meta.re = j.value("re", 0.0);
        ds.meta.kappa = j.value("kappa", 0.0);
        ds.meta.grid_n = j.value("grid_n", 0);
        ds.meta.ic = j.value("ic", std::string());
        ds.meta.noise_sigma = j.value("noise_sigma", 0.0);
        ds.meta.seed = j.value("seed", std::uint64_t{0});
        ds.meta.t_min = j.value("t_min", 0.0);
        ds.meta.t_max = j.value("t_max", 0.0);
        ds.has_meta = true;
    }
    return ds;
}

} // namespace hfm
