#ifndef HFM_CHECKPOINT_HPP
#define HFM_CHECKPOINT_HPP

#include <string>

#include "mlp.hpp"
#include "physics.hpp"

namespace hfm {

/// Everything needed to evaluate a trained model later: the architecture,
/// the input normalization it was trained under (derivatives are reported in
/// original coordinates, so this must travel with the weights), the flow
/// parameters (mode and current values), and the parameter vector.
struct Checkpoint {
    MlpArchitecture arch;
    InputNormalization norm;
    FlowParams flow;
    MlpParams params;
};

/// Binary format, version 1 (all integers and floats little-endian):
///   "HFMC" | u32 version | i32 spatial_dim | i32 hidden_layers |
///   i32 hidden_width | u32 activation | f64 scale[4] | f64 shift[4] |
///   u32 re_trainable | u32 pec_trainable | f64 re | f64 pec |
///   u64 param_count | f64 params[param_count]
/// A human-readable JSON sidecar duplicating the header is written next to
/// the file at path + ".json"; the binary remains authoritative on load.
void save_checkpoint(const Checkpoint& ck, const std::string& path);

/// Parses and validates a checkpoint; malformed or truncated files are
/// rejected with an I/O error naming the problem.
Checkpoint load_checkpoint(const std::string& path);

} // namespace hfm

#endif
