/// Command-line driver. Deliberately thin: parse argv, translate flags into
/// configuration overrides, hand off to the C interface, and turn the
/// returned status into the process exit code. Links only the public shared
/// library, so it doubles as a smoke test of the C surface.

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>

#include "hfm/hfm.h"

namespace {

constexpr const char* kUsage =
    "usage: hfm <command> [options]\n"
    "\n"
    "commands:\n"
    "  generate   run the spectral transport solver and sample observations\n"
    "  train      fit the field network to a sampled dataset\n"
    "  predict    evaluate a trained network on a space-time grid\n"
    "  evaluate   compare a trained network against reference fields\n"
    "  forces     integrate lift and drag over a surface\n"
    "  wss        evaluate wall shear stress along a surface\n"
    "\n"
    "options:\n"
    "  --config PATH, -c PATH  INI run configuration (required)\n"
    "  --seed N                override every sampling/init/shuffle seed\n"
    "  --threads N             override the worker thread count\n"
    "  --resume PATH           continue training from a checkpoint\n"
    "  --help                  print this message and exit\n"
    "  --version               print the build identifier and exit\n";

void print_error(hfm_status rc) {
    const char* msg = hfm_last_error();
    std::fprintf(stderr, "hfm: error: %s\n",
                 (msg && msg[0]) ? msg : "unspecified failure");
    std::fprintf(stderr, "hfm: exit code %d\n", static_cast<int>(rc));
}

/// Applies one value to several config keys, bailing out on the first
/// failure. Used for flags that fan out (--seed seeds every stage).
hfm_status set_all(hfm_config* cfg, const char* const* keys, int count,
                   const char* value) {
    for (int i = 0; i < count; ++i) {
        const hfm_status rc = hfm_config_set(cfg, keys[i], value);
        if (rc != HFM_OK) return rc;
    }
    return HFM_OK;
}

bool is_known_command(const std::string& cmd) {
    return cmd == "generate" || cmd == "train" || cmd == "predict" ||
           cmd == "evaluate" || cmd == "forces" || cmd == "wss";
}

} // namespace

int main(int argc, char** argv) {
    std::string command;
    std::string config_path;
    std::string seed;
    std::string threads;
    std::string resume;

    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--help" || arg == "-h") {
            std::fputs(kUsage, stdout);
            return 0;
        }
        if (arg == "--version") {
            std::printf("%s\n", hfm_version());
            return 0;
        }
        auto take_value = [&](const char* flag) -> const char* {
            if (i + 1 >= argc) {
                std::fprintf(stderr, "hfm: error: %s requires a value\n",
                             flag);
                std::exit(HFM_INVALID_INPUT);
            }
            return argv[++i];
        };
        if (arg == "--config" || arg == "-c") {
            config_path = take_value(arg.c_str());
        } else if (arg == "--seed") {
            seed = take_value("--seed");
        } else if (arg == "--threads") {
            threads = take_value("--threads");
        } else if (arg == "--resume") {
            resume = take_value("--resume");
        } else if (!arg.empty() && arg[0] == '-') {
            std::fprintf(stderr, "hfm: error: unknown option '%s'\n%s",
                         arg.c_str(), kUsage);
            return HFM_INVALID_INPUT;
        } else if (command.empty()) {
            command = arg;
        } else {
            std::fprintf(stderr,
                         "hfm: error: unexpected extra argument '%s'\n",
                         arg.c_str());
            return HFM_INVALID_INPUT;
        }
    }

    if (command.empty()) {
        std::fprintf(stderr, "hfm: error: no command given\n%s", kUsage);
        return HFM_INVALID_INPUT;
    }
    if (!is_known_command(command)) {
        std::fprintf(stderr, "hfm: error: unknown command '%s'\n%s",
                     command.c_str(), kUsage);
        return HFM_INVALID_INPUT;
    }
    if (config_path.empty()) {
        std::fprintf(stderr,
                     "hfm: error: --config is required (see --help)\n");
        return HFM_INVALID_INPUT;
    }

    hfm_config* cfg = nullptr;
    hfm_status rc = hfm_config_load(config_path.c_str(), &cfg);
    if (rc != HFM_OK) {
        print_error(rc);
        return rc;
    }

    if (!seed.empty()) {
        static const char* kSeedKeys[] = {"generate.seed", "train.init_seed",
                                          "train.shuffle_seed", "run.seed"};
        rc = set_all(cfg, kSeedKeys, 4, seed.c_str());
    }
    if (rc == HFM_OK && !threads.empty()) {
        static const char* kThreadKeys[] = {"train.threads", "run.threads"};
        rc = set_all(cfg, kThreadKeys, 2, threads.c_str());
    }
    if (rc == HFM_OK && !resume.empty())
        rc = hfm_config_set(cfg, "train.resume", resume.c_str());

    if (rc == HFM_OK) rc = hfm_run(cfg, command.c_str());
    if (rc != HFM_OK) print_error(rc);

    hfm_config_free(cfg);
    return rc;
}
