#ifndef HFM_DATASET_HPP
#define HFM_DATASET_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "spectral.hpp"

namespace hfm {

/// One scattered scalar observation: where/when it was taken and the value.
/// z is carried but zero for two-dimensional data.
struct SampleRecord {
    double t = 0.0;
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    double c = 0.0;
};

/// Provenance written next to exported datasets so a training run can be
/// reconstructed. kappa is authoritative for the diffusivity (a Peclet
/// number of infinity has no JSON representation).
struct DatasetMetadata {
    std::string flow;   ///< flow variant name, empty when unknown
    double re = 0.0;
    double kappa = 0.0;
    int grid_n = 0;
    std::string ic;     ///< initial-condition descriptor
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;
    double t_min = 0.0;
    double t_max = 0.0;
};

/// Scattered training observations plus provenance.
struct SampledDataset {
    int spatial_dim = 2;
    std::vector<SampleRecord> records;
    DatasetMetadata meta;
    bool has_meta = false;
};

/// Draw `count` observations uniformly over (snapshot, grid node) — stored
/// values only, no interpolation, so sampled c values are bit-equal to the
/// solver output when sigma is 0. With sigma > 0, adds Gaussian noise to c
/// and clamps to [0, 1]. Identical seeds give identical datasets.
SampledDataset sample_points(const TransportSolution& sol, std::size_t count,
                             std::uint64_t seed, double sigma);

/// Write the records as CSV (`t,x,y,c` or `t,x,y,z,c`, 17 significant
/// digits) plus a JSON metadata sidecar at path + ".json".
void export_dataset(const SampledDataset& ds, const std::string& path);

/// Parse a dataset CSV (plus sidecar metadata when present). Malformed
/// content is rejected with the offending line number; an empty record list
/// is an error.
SampledDataset import_dataset(const std::string& path);

} // namespace hfm

#endif
