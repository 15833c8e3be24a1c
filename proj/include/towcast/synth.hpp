#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "towcast/fusion.hpp"

namespace towcast {

/// Synthetic-trajectory knobs. The generator encodes the maneuverability
/// premise the models are meant to recover: more barges means smoother
/// courses and steadier speeds. Effect sizes are test fixtures, nothing
/// more.
struct SynthConfig {
    int n_samples = 200;
    int count_min = 0;
    int count_max = 12;
    double base_speed_kn = 7.0;
    double course_noise_scale = 30.0;  // course noise stddev (deg) at zero barges
    double speed_noise_scale = 0.30;   // speed coefficient of variation at zero barges
    int ping_interval_s = 60;
    double trip_duration_min_hrs = 1.0;
    double trip_duration_max_hrs = 4.0;
    bool skew_counts = true;  // small tows more frequent
    std::uint64_t seed = 42;
};

/// One simulated trip along a meandering centerline. Course noise scales
/// with 1/(1 + barge_count), speed drops 0.15 kn per barge with a noise
/// CV that also scales with 1/(1 + barge_count), and statics grow with the
/// count (length 20 + 5 per barge). Deterministic in (cfg, seed).
Trip generate_trip(int barge_count, const SynthConfig& cfg, std::uint64_t seed,
                   const std::string& vessel_id = "");

struct SynthDataset {
    std::vector<LabeledSample> samples;
    std::vector<Trip> trips;  // one per sample, same order
};

/// Draws barge counts (skewed toward small tows unless disabled), builds a
/// trip per sample, and extracts the full feature set. Byte-reproducible
/// for a fixed seed.
SynthDataset generate_labeled_dataset(const SynthConfig& cfg, const FeatureConfig& feature_cfg = {});

}  // namespace towcast
