#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "towcast/features.hpp"
#include "towcast/trajectory.hpp"

namespace towcast {

/// A georeferenced satellite detection. barge_count absent means the
/// detection is unlabeled and only used for prediction.
struct Detection {
    std::string detection_id;
    UnixSeconds scene_time = 0;
    GeoPolygon footprint;
    std::optional<int> barge_count;
};

/// One vessel considered for a detection: it had pings inside the time
/// window; flags say whether its windowed polyline intersected the
/// footprint and whether a trip covers the scene time.
struct MatchCandidate {
    std::string vessel_id;
    bool intersects = false;
    double nearest_dt_s = 0.0;       // min |ping time - scene time|
    double centroid_dist_km = 0.0;   // that ping's distance to the footprint centroid
    std::optional<int> trip_index;
    int window_points = 0;
};

/// A detection is a valid match iff it is within the window, intersects,
/// and a trip covers the scene time.
struct MatchResult {
    std::string detection_id;
    std::string vessel_id;
    std::optional<int> trip_index;
    bool within_window = false;
    bool intersects = false;

    bool is_match() const { return within_window && intersects && trip_index.has_value(); }
};

struct MatchOutcome {
    std::optional<MatchResult> result;       // best candidate, if any intersected
    std::vector<MatchCandidate> candidates;  // every windowed vessel, for audit
};

/// Matches one detection against the record store: pings within window_s of
/// the scene time form per-vessel polylines; a vessel matches when its
/// polyline intersects the footprint. Among matching vessels the one whose
/// nearest ping is closest in time wins (ties by that ping's distance to
/// the footprint centroid, then by vessel id); vessels with a covering trip
/// outrank those without one.
MatchOutcome match_detection(const Detection& detection, const RecordStore& store,
                             std::span<const Trip> trips, int window_s = 120);

struct LabeledSample {
    std::string detection_id;
    std::string vessel_id;
    int trip_index = 0;
    FeatureVector features;  // imputed; no missing markers remain
    int barge_count = 0;
};

/// A matched but unlabeled detection, imputed the same way, for prediction.
struct PredictionSample {
    std::string detection_id;
    std::string vessel_id;
    int trip_index = 0;
    FeatureVector features;
};

struct ImputationEntry {
    std::string feature;
    double value = 0.0;
    int n_imputed = 0;        // labeled samples that needed the fill-in
    bool all_missing = false; // no labeled sample carried the feature at all
};

/// Per-feature medians of the labeled set; reused at prediction time.
struct ImputationReport {
    std::vector<ImputationEntry> entries;  // one per feature, table order
};

struct LabeledDataset {
    std::vector<LabeledSample> samples;
    std::vector<PredictionSample> unlabeled;
    ImputationReport report;
};

/// Median-imputes a set of feature vectors in place; the medians come from
/// the set itself. A feature missing in every vector imputes 0 and is
/// flagged all_missing. Returns one entry per feature in table order.
ImputationReport impute_features(std::vector<FeatureVector>& features);

/// Fills missing values from a previously computed report (prediction-time
/// reuse of training-set medians).
void apply_imputation(FeatureVector& features, const ImputationReport& report);

/// Key for looking up a trip's features: (vessel_id, trip_index).
using TripFeatureMap = std::map<std::pair<std::string, int>, FeatureVector>;

/// Assembles one LabeledSample per matched labeled detection. Missing
/// feature values are imputed with the per-feature median over the labeled
/// set (a feature missing everywhere imputes 0 and is flagged). Matched
/// unlabeled detections come back separately with the same imputation.
/// Throws DomainError when no labeled detection matched.
LabeledDataset build_labeled_dataset(std::span<const Detection> detections,
                                     std::span<const MatchResult> matches,
                                     const TripFeatureMap& trip_features);

}  // namespace towcast
