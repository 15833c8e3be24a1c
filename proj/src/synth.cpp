#include "towcast/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "towcast/rng.hpp"

namespace towcast {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kKmPerDegree = kPi * kEarthRadiusKm / 180.0;
// All synthetic voyages start within one simulated quarter.
constexpr UnixSeconds kEpochBase = 1706745600;  // 2024-02-01T00:00:00Z

double wrap360(double deg) {
    double w = std::fmod(deg, 360.0);
    if (w < 0.0) w += 360.0;
    if (w >= 360.0) w = 0.0;
    return w;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
    return base ^ (0x9E3779B97F4A7C15ULL * (index + 1));
}

}  // namespace

Trip generate_trip(int barge_count, const SynthConfig& cfg, std::uint64_t seed,
                   const std::string& vessel_id) {
    Rng rng(seed);
    const double duration_hrs = rng.uniform(cfg.trip_duration_min_hrs, cfg.trip_duration_max_hrs);
    const int n = static_cast<int>(duration_hrs * 3600.0 / cfg.ping_interval_s) + 1;
    const double damping = 1.0 + static_cast<double>(barge_count);

    const double mean_speed = std::max(cfg.base_speed_kn - 0.15 * barge_count, 0.5);
    const double speed_sigma = mean_speed * cfg.speed_noise_scale / damping;
    const double course_sigma = cfg.course_noise_scale / damping;
    const double base_course = rng.uniform(0.0, 360.0);
    const double meander_period_s = 2700.0;
    const double meander_amp_deg = 10.0;
    const double heading_offset = rng.uniform(-3.0, 3.0);

    const UnixSeconds start_time =
        kEpochBase + static_cast<UnixSeconds>(rng.uniform_u32(90 * 24 * 60)) * 60;
    double lat = 32.0 + rng.uniform(-0.5, 0.5);
    double lon = -91.0 + rng.uniform(-0.5, 0.5);

    std::vector<double> speeds(static_cast<std::size_t>(n));
    std::vector<double> courses(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) * cfg.ping_interval_s;
        const double meander = meander_amp_deg * std::sin(2.0 * kPi * t / meander_period_s);
        courses[static_cast<std::size_t>(i)] = base_course + meander + rng.normal(0.0, course_sigma);
        speeds[static_cast<std::size_t>(i)] =
            std::clamp(rng.normal(mean_speed, speed_sigma), 0.05, 30.0);
    }

    Trip trip;
    trip.vessel_id = vessel_id.empty() ? "synth-" + std::to_string(seed) : vessel_id;
    trip.trip_index = 0;
    trip.length_m = 20.0 + 5.0 * barge_count;
    trip.width_m = 10.0 + 0.5 * barge_count;
    trip.draft_m = 2.0 + 0.12 * barge_count;
    trip.open_start = true;
    trip.open_end = true;
    trip.records.reserve(static_cast<std::size_t>(n));

    for (int i = 0; i < n; ++i) {
        AisRecord rec;
        rec.vessel_id = trip.vessel_id;
        rec.timestamp = start_time + static_cast<UnixSeconds>(i) * cfg.ping_interval_s;
        rec.lat = lat;
        rec.lon = lon;
        rec.sog = speeds[static_cast<std::size_t>(i)];
        rec.cog = wrap360(courses[static_cast<std::size_t>(i)]);
        rec.heading = wrap360(courses[static_cast<std::size_t>(i)] + heading_offset +
                              rng.normal(0.0, 2.0));
        rec.length_m = trip.length_m;
        rec.width_m = trip.width_m;
        rec.draft_m = trip.draft_m;
        trip.records.push_back(std::move(rec));

        if (i + 1 < n) {
            // Advance by the trapezoidal displacement so the speed-integrated
            // path length and the positional path agree.
            const double step_km = 0.5 *
                                   (speeds[static_cast<std::size_t>(i)] +
                                    speeds[static_cast<std::size_t>(i + 1)]) *
                                   kKmPerNauticalMile * (cfg.ping_interval_s / 3600.0);
            const double bearing = courses[static_cast<std::size_t>(i)] * kPi / 180.0;
            lat += step_km * std::cos(bearing) / kKmPerDegree;
            lon += step_km * std::sin(bearing) / (kKmPerDegree * std::cos(lat * kPi / 180.0));
        }
    }
    trip.start_time = trip.records.front().timestamp;
    trip.end_time = trip.records.back().timestamp;
    return trip;
}

SynthDataset generate_labeled_dataset(const SynthConfig& cfg, const FeatureConfig& feature_cfg) {
    Rng rng(cfg.seed);
    const int span = cfg.count_max - cfg.count_min + 1;

    // Skewed draw: geometric-ish decay keeps small tows most frequent.
    std::vector<double> cum(static_cast<std::size_t>(span));
    double total = 0.0;
    for (int c = 0; c < span; ++c) {
        total += cfg.skew_counts ? std::pow(0.78, c) : 1.0;
        cum[static_cast<std::size_t>(c)] = total;
    }

    SynthDataset dataset;
    dataset.samples.reserve(static_cast<std::size_t>(cfg.n_samples));
    dataset.trips.reserve(static_cast<std::size_t>(cfg.n_samples));
    std::vector<FeatureVector> features(static_cast<std::size_t>(cfg.n_samples));

    for (int i = 0; i < cfg.n_samples; ++i) {
        const double u = rng.uniform01() * total;
        const int offset = static_cast<int>(std::lower_bound(cum.begin(), cum.end(), u) - cum.begin());
        const int count = cfg.count_min + std::min(offset, span - 1);

        char id[32];
        std::snprintf(id, sizeof(id), "synth-v%04d", i);
        Trip trip = generate_trip(count, cfg, derive_seed(cfg.seed, static_cast<std::uint64_t>(i)), id);
        features[static_cast<std::size_t>(i)] = extract_all(trip, feature_cfg);

        LabeledSample sample;
        std::snprintf(id, sizeof(id), "synth-d%04d", i);
        sample.detection_id = id;
        sample.vessel_id = trip.vessel_id;
        sample.trip_index = 0;
        sample.barge_count = count;
        dataset.samples.push_back(std::move(sample));
        dataset.trips.push_back(std::move(trip));
    }

    // Rarely needed, but keeps the no-missing-markers contract airtight.
    impute_features(features);
    for (int i = 0; i < cfg.n_samples; ++i) {
        dataset.samples[static_cast<std::size_t>(i)].features = features[static_cast<std::size_t>(i)];
    }
    return dataset;
}

}  // namespace towcast
