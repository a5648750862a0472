/// C interface shim: translates between the exception-based C++ core and
/// the status-code contract of include/hfm/hfm.h.

#include "hfm/hfm.h"

#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "errors.hpp"
#include "runconfig.hpp"
#include "runner.hpp"

/// The opaque handle is just a RunConfig.
struct hfm_config {
    hfm::RunConfig cfg;
};

namespace {

thread_local std::string g_last_error;

/// Runs `body`, mapping exceptions to status codes and recording the
/// message. Clears the error slot on success so hfm_last_error() always
/// reflects the most recent call.
template <typename Fn>
hfm_status guarded(Fn&& body) {
    try {
        body();
        g_last_error.clear();
        return HFM_OK;
    } catch (const hfm::Error& e) {
        g_last_error = e.what();
        return static_cast<hfm_status>(static_cast<int>(e.code()));
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return HFM_INTERNAL;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return HFM_INTERNAL;
    } catch (...) {
        g_last_error = "unknown failure";
        return HFM_INTERNAL;
    }
}

hfm_status fail_invalid(const char* msg) {
    g_last_error = msg;
    return HFM_INVALID_INPUT;
}

} // namespace

extern "C" {

const char* hfm_version(void) { return hfm::version_string(); }

const char* hfm_last_error(void) { return g_last_error.c_str(); }

hfm_status hfm_config_load(const char* path, hfm_config** out) {
    if (!path || !out) return fail_invalid("path and out must be non-NULL");
    *out = nullptr;
    return guarded([&] {
        auto* handle = new hfm_config{hfm::load_run_config(path)};
        *out = handle;
    });
}

hfm_status hfm_config_create(hfm_config** out) {
    if (!out) return fail_invalid("out must be non-NULL");
    *out = nullptr;
    return guarded([&] {
        auto* handle = new hfm_config{};
        handle->cfg.source = "<api>";
        *out = handle;
    });
}

hfm_status hfm_config_set(hfm_config* cfg, const char* key,
                          const char* value) {
    if (!cfg || !key || !value)
        return fail_invalid("cfg, key, and value must be non-NULL");
    return guarded([&] { cfg->cfg.set(key, value); });
}

hfm_status hfm_config_get(const hfm_config* cfg, const char* key, char* buf,
                          size_t bufsize) {
    if (!cfg || !key || !buf || bufsize == 0)
        return fail_invalid("cfg, key, and a non-empty buf must be given");
    return guarded([&] {
        if (!hfm::run_config_key_known(key))
            hfm::throw_invalid(std::string("unknown config key '") + key +
                               "'");
        const auto it = cfg->cfg.values.find(key);
        if (it == cfg->cfg.values.end())
            hfm::throw_invalid(std::string("config key '") + key +
                               "' is not set");
        const std::size_t n = std::min(bufsize - 1, it->second.size());
        std::memcpy(buf, it->second.data(), n);
        buf[n] = '\0';
    });
}

void hfm_config_free(hfm_config* cfg) { delete cfg; }

hfm_status hfm_run(const hfm_config* cfg, const char* command) {
    if (!cfg || !command) return fail_invalid("cfg and command must be non-NULL");
    return guarded([&] { hfm::run_command(cfg->cfg, command); });
}

} // extern "C"
