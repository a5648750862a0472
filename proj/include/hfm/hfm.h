/*
 * Public C interface to the hidden-flow inference toolkit.
 *
 * The library is driven entirely through run configurations: load one from
 * an INI file (or build one key by key), then execute a named command
 * against it. All functions return a status code from hfm_status; on any
 * failure hfm_last_error() describes what went wrong. Error state is
 * thread-local, so concurrent use from different threads is safe as long as
 * each hfm_config object is confined to one thread at a time.
 */
#ifndef HFM_H
#define HFM_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. Identical to the exit codes of the command-line driver. */
typedef enum hfm_status {
    HFM_OK = 0,
    HFM_INVALID_INPUT = 2, /* bad arguments, malformed config, contract violation */
    HFM_DIVERGED = 3,      /* optimization produced a non-finite value */
    HFM_IO = 4,            /* file could not be read, written, or parsed */
    HFM_INTERNAL = 5       /* should-not-happen conditions */
} hfm_status;

/* Opaque run configuration: a set of dotted keys ("train.dataset", ...)
 * with string values, exactly mirroring the INI file format. */
typedef struct hfm_config hfm_config;

/* Build identifier, e.g. "hfm 1.0.0". Never NULL. */
const char* hfm_version(void);

/* Description of the most recent failure on THIS thread, or an empty string
 * if the last call succeeded. The pointer stays valid until the next hfm_*
 * call on the same thread. Never NULL. */
const char* hfm_last_error(void);

/* Parse an INI run configuration from a file. On HFM_OK, *out owns the new
 * object and must be released with hfm_config_free. */
hfm_status hfm_config_load(const char* path, hfm_config** out);

/* Create an empty configuration. */
hfm_status hfm_config_create(hfm_config** out);

/* Set one dotted key ("generate.dt") to a string value. Unknown keys are
 * rejected with HFM_INVALID_INPUT. */
hfm_status hfm_config_set(hfm_config* cfg, const char* key, const char* value);

/* Copy the value of a key into buf (NUL-terminated, truncated to bufsize-1
 * characters). Fails with HFM_INVALID_INPUT when the key is unknown or not
 * present in this configuration. */
hfm_status hfm_config_get(const hfm_config* cfg, const char* key, char* buf,
                          size_t bufsize);

/* Release a configuration. NULL is a harmless no-op. */
void hfm_config_free(hfm_config* cfg);

/* Execute one command ("generate", "train", "predict", "evaluate",
 * "forces", "wss") against the configuration. Progress and file summaries
 * are printed to stdout; failures set the thread-local error message. */
hfm_status hfm_run(const hfm_config* cfg, const char* command);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* HFM_H */
