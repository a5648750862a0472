// Run configuration: one INI-style file describes an entire reproducible
// run (data generation, training, and post-processing knobs plus all file
// paths). Parsing is strict -- unknown sections or keys are fatal, so a
// typo in a hyperparameter name cannot silently fall back to a default.
#ifndef HFM_RUNCONFIG_HPP
#define HFM_RUNCONFIG_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace hfm {

/// Parsed key/value store. Keys are dotted "section.key" names; every key
/// must be in the known-key table (see run_config_key_known). Values are
/// kept as strings and interpreted by the typed getters below when a
/// command runs.
struct RunConfig {
    std::string source; ///< file path (or "<override>") for diagnostics
    std::map<std::string, std::string> values;

    bool has(const std::string& dotted_key) const {
        return values.count(dotted_key) != 0;
    }

    /// Sets (or replaces) one value. Rejects unknown keys. Used by the
    /// command-line flag overrides and the C interface.
    void set(const std::string& dotted_key, const std::string& value);
};

/// True when the dotted key appears in the configuration schema.
bool run_config_key_known(const std::string& dotted_key);

/// Parses the INI file at `path`. Syntax: `[section]` headers, `key =
/// value` entries, blank lines, and full-line comments starting with '#' or
/// ';'. Errors carry path:line positions. Duplicate keys are rejected.
RunConfig load_run_config(const std::string& path);

/// Typed getters. The *_required variants fail with the key name when the
/// key is absent; the defaulted variants return `def` instead. All of them
/// fail with the key name when the value does not parse or violates the
/// stated domain.
double cfg_double(const RunConfig& cfg, const std::string& key, double def);
double cfg_double_required(const RunConfig& cfg, const std::string& key);
int cfg_int(const RunConfig& cfg, const std::string& key, int def);
int cfg_int_required(const RunConfig& cfg, const std::string& key);
std::uint64_t cfg_u64(const RunConfig& cfg, const std::string& key,
                      std::uint64_t def);
bool cfg_bool(const RunConfig& cfg, const std::string& key, bool def);
std::string cfg_string(const RunConfig& cfg, const std::string& key,
                       const std::string& def);
std::string cfg_string_required(const RunConfig& cfg, const std::string& key);
/// Comma-separated lists (e.g. "100,200,100" or "0.8,1.0,1.2").
std::vector<double> cfg_double_list_required(const RunConfig& cfg,
                                             const std::string& key);
std::vector<int> cfg_int_list_required(const RunConfig& cfg,
                                       const std::string& key);

} // namespace hfm

#endif
