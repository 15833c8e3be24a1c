#include "towcast/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "towcast/errors.hpp"

namespace towcast {

MatchOutcome match_detection(const Detection& detection, const RecordStore& store,
                             std::span<const Trip> trips, int window_s) {
    MatchOutcome outcome;
    for (const auto& track : store) {
        // Candidate pings: |t - scene_time| <= window (records are sorted).
        std::vector<GeoPoint> polyline;
        double nearest_dt = 0.0;
        GeoPoint nearest_point;
        bool have_nearest = false;
        for (const auto& rec : track.records) {
            const double dt = std::abs(static_cast<double>(rec.timestamp - detection.scene_time));
            if (dt > window_s) continue;
            polyline.push_back(GeoPoint{rec.lat, rec.lon});
            const double centroid_dist =
                haversine_km(GeoPoint{rec.lat, rec.lon}, detection.footprint.centroid());
            if (!have_nearest || dt < nearest_dt ||
                (dt == nearest_dt &&
                 centroid_dist < haversine_km(nearest_point, detection.footprint.centroid()))) {
                nearest_dt = dt;
                nearest_point = GeoPoint{rec.lat, rec.lon};
                have_nearest = true;
            }
        }
        if (polyline.empty()) continue;

        MatchCandidate candidate;
        candidate.vessel_id = track.vessel_id;
        candidate.window_points = static_cast<int>(polyline.size());
        candidate.intersects = polyline_intersects_polygon(polyline, detection.footprint);
        candidate.nearest_dt_s = nearest_dt;
        candidate.centroid_dist_km = haversine_km(nearest_point, detection.footprint.centroid());
        if (candidate.intersects) {
            // Covering trip for this vessel at the scene time.
            std::vector<Trip> vessel_trips;
            for (const auto& trip : trips) {
                if (trip.vessel_id == track.vessel_id) vessel_trips.push_back(trip);
            }
            if (const Trip* trip = trip_containing(vessel_trips, detection.scene_time)) {
                candidate.trip_index = trip->trip_index;
            }
        }
        outcome.candidates.push_back(std::move(candidate));
    }

    // Pick the winner among intersecting candidates; candidates with a
    // covering trip outrank flag-only ones.
    const MatchCandidate* best = nullptr;
    for (const auto& candidate : outcome.candidates) {
        if (!candidate.intersects) continue;
        if (best == nullptr) {
            best = &candidate;
            continue;
        }
        const auto rank = [](const MatchCandidate& c) {
            return std::make_tuple(!c.trip_index.has_value(), c.nearest_dt_s, c.centroid_dist_km,
                                   c.vessel_id);
        };
        if (rank(candidate) < rank(*best)) best = &candidate;
    }
    if (best != nullptr) {
        MatchResult result;
        result.detection_id = detection.detection_id;
        result.vessel_id = best->vessel_id;
        result.trip_index = best->trip_index;
        result.within_window = true;
        result.intersects = true;
        outcome.result = result;
    }
    return outcome;
}

LabeledDataset build_labeled_dataset(std::span<const Detection> detections,
                                     std::span<const MatchResult> matches,
                                     const TripFeatureMap& trip_features) {
    LabeledDataset dataset;

    struct Pending {
        const Detection* detection;
        const MatchResult* match;
        FeatureVector features;
    };
    std::vector<Pending> labeled, unlabeled;
    for (const auto& match : matches) {
        if (!match.is_match()) continue;
        const auto det = std::find_if(detections.begin(), detections.end(), [&](const Detection& d) {
            return d.detection_id == match.detection_id;
        });
        if (det == detections.end()) {
            throw ContractError("match references unknown detection: " + match.detection_id);
        }
        const auto feat = trip_features.find({match.vessel_id, *match.trip_index});
        if (feat == trip_features.end()) {
            throw ContractError("no features for trip of matched detection " + match.detection_id);
        }
        Pending pending{&*det, &match, feat->second};
        (det->barge_count.has_value() ? labeled : unlabeled).push_back(std::move(pending));
    }
    if (labeled.empty()) {
        throw DomainError("empty training set: no labeled detection matched a trip");
    }

    // Medians come from the labeled set only; unlabeled rows reuse them.
    std::vector<FeatureVector> labeled_features;
    labeled_features.reserve(labeled.size());
    for (const auto& pending : labeled) labeled_features.push_back(pending.features);
    dataset.report = impute_features(labeled_features);

    for (std::size_t i = 0; i < labeled.size(); ++i) {
        LabeledSample sample;
        sample.detection_id = labeled[i].detection->detection_id;
        sample.vessel_id = labeled[i].match->vessel_id;
        sample.trip_index = *labeled[i].match->trip_index;
        sample.features = labeled_features[i];
        sample.barge_count = *labeled[i].detection->barge_count;
        dataset.samples.push_back(std::move(sample));
    }
    for (auto& pending : unlabeled) {
        apply_imputation(pending.features, dataset.report);
        PredictionSample sample;
        sample.detection_id = pending.detection->detection_id;
        sample.vessel_id = pending.match->vessel_id;
        sample.trip_index = *pending.match->trip_index;
        sample.features = pending.features;
        dataset.unlabeled.push_back(std::move(sample));
    }
    return dataset;
}

ImputationReport impute_features(std::vector<FeatureVector>& features) {
    ImputationReport report;
    const auto& names = FeatureVector::names();
    for (int f = 0; f < kFeatureCount; ++f) {
        ImputationEntry entry;
        entry.feature = std::string(names[static_cast<std::size_t>(f)]);
        std::vector<double> present;
        for (const auto& fv : features) {
            const auto& v = fv.values[static_cast<std::size_t>(f)];
            if (v.has_value()) present.push_back(*v);
        }
        if (present.empty()) {
            entry.value = 0.0;
            entry.all_missing = true;
        } else {
            std::sort(present.begin(), present.end());
            const std::size_t n = present.size();
            entry.value = (n % 2 == 1) ? present[n / 2] : 0.5 * (present[n / 2 - 1] + present[n / 2]);
        }
        for (auto& fv : features) {
            auto& v = fv.values[static_cast<std::size_t>(f)];
            if (!v.has_value()) {
                v = entry.value;
                ++entry.n_imputed;
            }
        }
        report.entries.push_back(std::move(entry));
    }
    return report;
}

void apply_imputation(FeatureVector& features, const ImputationReport& report) {
    for (const auto& entry : report.entries) {
        const auto feat = FeatureVector::from_name(entry.feature);
        if (!feat.has_value()) {
            throw ContractError("imputation report names unknown feature: " + entry.feature);
        }
        auto& v = features[*feat];
        if (!v.has_value()) v = entry.value;
    }
}

}  // namespace towcast
