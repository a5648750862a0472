#include "runconfig.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include "errors.hpp"

namespace hfm {

namespace {

/// Configuration schema: every key a run file may set. Grouped by section;
/// the dotted form is "<section>.<key>".
constexpr const char* kKnownKeys[] = {
    // global defaults applied when section-specific keys are absent
    "run.seed",
    "run.threads",
    // synthetic data generation (transport solver + sampling)
    "generate.flow",
    "generate.re",
    "generate.kappa",
    "generate.grid_n",
    "generate.dt",
    "generate.t0",
    "generate.t_final",
    "generate.snapshot_interval",
    "generate.dealias",
    "generate.ic",
    "generate.count",
    "generate.noise_sigma",
    "generate.seed",
    "generate.dataset",
    "generate.fields",
    "generate.fields_times",
    // network architecture
    "network.hidden_layers",
    "network.hidden_width",
    "network.activation",
    // training
    "train.dataset",
    "train.collocation",
    "train.epochs",
    "train.learning_rates",
    "train.batch_size",
    "train.shuffle_seed",
    "train.init_seed",
    "train.first_layer_scale",
    "train.re",
    "train.pec",
    "train.re_trainable",
    "train.pec_trainable",
    "train.flow_lr_scale",
    "train.w_data_c",
    "train.w_data_d",
    "train.w_e1",
    "train.w_e2",
    "train.w_e3",
    "train.w_e4",
    "train.w_e5",
    "train.w_e6",
    "train.threads",
    "train.checkpoint",
    "train.log",
    "train.resume",
    // dense grid prediction
    "predict.checkpoint",
    "predict.output",
    "predict.times",
    "predict.x_min",
    "predict.x_max",
    "predict.x_count",
    "predict.y_min",
    "predict.y_max",
    "predict.y_count",
    "predict.z_min",
    "predict.z_max",
    "predict.z_count",
    // error report against a reference field table
    "evaluate.checkpoint",
    "evaluate.exact",
    "evaluate.output",
    "evaluate.align_pressure",
    // boundary force integrals
    "forces.checkpoint",
    "forces.surface",
    "forces.re",
    "forces.times",
    "forces.output",
    // wall shear stress
    "wss.checkpoint",
    "wss.surface",
    "wss.re",
    "wss.times",
    "wss.output",
};

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    std::size_t e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const std::string& wanted) {
    throw_invalid("config key '" + key + "': cannot read '" + value +
                  "' as " + wanted);
}

double parse_double(const std::string& key, const std::string& value) {
    double v = 0.0;
    const char* first = value.data();
    const char* last = first + value.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) bad_value(key, value, "a number");
    if (!std::isfinite(v)) bad_value(key, value, "a finite number");
    return v;
}

long long parse_ll(const std::string& key, const std::string& value) {
    long long v = 0;
    const char* first = value.data();
    const char* last = first + value.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) bad_value(key, value, "an integer");
    return v;
}

} // namespace

bool run_config_key_known(const std::string& dotted_key) {
    for (const char* k : kKnownKeys)
        if (dotted_key == k) return true;
    return false;
}

void RunConfig::set(const std::string& dotted_key, const std::string& value) {
    if (!run_config_key_known(dotted_key))
        throw_invalid("unknown config key '" + dotted_key + "'");
    values[dotted_key] = value;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw_io("cannot open config file '" + path + "'");

    RunConfig cfg;
    cfg.source = path;
    std::string line, section;
    std::size_t line_no = 0;
    auto where = [&] { return path + ":" + std::to_string(line_no); };

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::string text = trim(line);
        if (text.empty() || text[0] == '#' || text[0] == ';') continue;

        if (text.front() == '[') {
            if (text.back() != ']' || text.size() < 3)
                throw_invalid(where() + ": malformed section header '" +
                              text + "'");
            section = trim(text.substr(1, text.size() - 2));
            // Validate the section name by probing for any known key in it.
            bool known = false;
            const std::string prefix = section + ".";
            for (const char* k : kKnownKeys)
                if (std::string(k).rfind(prefix, 0) == 0) known = true;
            if (!known)
                throw_invalid(where() + ": unknown section '[" + section +
                              "]'");
            continue;
        }

        const std::size_t eq = text.find('=');
        if (eq == std::string::npos)
            throw_invalid(where() + ": expected 'key = value', got '" + text +
                          "'");
        if (section.empty())
            throw_invalid(where() + ": key outside any [section]");
        const std::string key = trim(text.substr(0, eq));
        const std::string value = trim(text.substr(eq + 1));
        if (key.empty())
            throw_invalid(where() + ": empty key name");
        const std::string dotted = section + "." + key;
        if (!run_config_key_known(dotted))
            throw_invalid(where() + ": unknown key '" + key +
                          "' in section [" + section + "]");
        if (cfg.values.count(dotted))
            throw_invalid(where() + ": duplicate key '" + dotted + "'");
        cfg.values[dotted] = value;
    }
    return cfg;
}

double cfg_double(const RunConfig& cfg, const std::string& key, double def) {
    auto it = cfg.values.find(key);
    if (it == cfg.values.end()) return def;
    return parse_double(key, it->second);
}

double cfg_double_required(const RunConfig& cfg, const std::string& key) {
    auto it = cfg.values.find(key);
    if (it == cfg.values.end())
        throw_invalid("config key '" + key + "' is required");
    return parse_double(key, it->second);
}

int cfg_int(const RunConfig& cfg, const std::string& key, int def) {
    auto it = cfg.values.find(key);
    if (it == cfg.values.end()) return def;
    const long long v = parse_ll(key, it->second);
    if (v < -2147483648LL || v > 2147483647LL)
        bad_value(key, it->second, "a 32-bit integer");
    return static_cast<int>(v);
}

int cfg_int_required(const RunConfig& cfg, const std::string& key) {
    if (!cfg.has(key)) throw_invalid("config key '" + key + "' is required");
    return cfg_int(cfg, key, 0);
}

std::uint64_t cfg_u64(const RunConfig& cfg, const std::string& key,
                      std::uint64_t def) {
    auto it = cfg.values.find(key);
    if (it == cfg.values.end()) return def;
    std::uint64_t v = 0;
    const char* first = it->second.data();
    const char* last = first + it->second.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last)
        bad_value(key, it->second, "an unsigned integer");
    return v;
}

bool cfg_bool(const RunConfig& cfg, const std::string& key, bool def) {
    auto it = cfg.values.find(key);
    if (it == cfg.values.end()) return def;
    const std::string& v = it->second;
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    bad_value(key, v, "a boolean (true/false)");
}

std::string cfg_string(const RunConfig& cfg, const std::string& key,
                       const std::string& def) {
    auto it = cfg.values.find(key);
    return it == cfg.values.end() ? def : it->second;
}

std::string cfg_string_required(const RunConfig& cfg, const std::string& key) {
    auto it = cfg.values.find(key);
    if (it == cfg.values.end() || it->second.empty())
        throw_invalid("config key '" + key + "' is required");
    return it->second;
}

std::vector<double> cfg_double_list_required(const RunConfig& cfg,
                                             const std::string& key) {
    const std::string text = cfg_string_required(cfg, key);
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t comma = text.find(',', start);
        if (comma == std::string::npos) comma = text.size();
        const std::string item = trim(text.substr(start, comma - start));
        if (item.empty())
            throw_invalid("config key '" + key + "': empty list entry");
        out.push_back(parse_double(key, item));
        start = comma + 1;
    }
    return out;
}

std::vector<int> cfg_int_list_required(const RunConfig& cfg,
                                       const std::string& key) {
    const std::vector<double> vals = cfg_double_list_required(cfg, key);
    std::vector<int> out;
    out.reserve(vals.size());
    for (double v : vals) {
        if (v != std::floor(v) || std::abs(v) > 2147483647.0)
            throw_invalid("config key '" + key +
                          "': list entries must be integers");
        out.push_back(static_cast<int>(v));
    }
    return out;
}

} // namespace hfm
