#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "towcast/ais.hpp"
#include "towcast/geo.hpp"

namespace towcast {

/// Stop-detection and trip-segmentation parameters. Defaults are the
/// deployed values: 1.0 kn / 60 min / 300 m.
struct StopParams {
    double max_speed_kn = 1.0;     // records slower than this are stop candidates
    double min_duration_min = 60.0;
    double radius_m = 300.0;       // all stop points within this of the centroid
    double max_gap_min = 30.0;     // silence longer than this breaks runs
    int min_trip_points = 10;      // shorter moving runs are discarded
};

/// A sustained low-speed, spatially compact episode; trips begin and end
/// at stops.
struct Stop {
    std::string vessel_id;
    UnixSeconds start_time = 0;
    UnixSeconds end_time = 0;
    GeoPoint centroid;
    int point_count = 0;
    // Index range [first_index, last_index] into the source record sequence.
    int first_index = 0;
    int last_index = 0;
};

/// Movement segment between two consecutive stops (or a data boundary).
struct Trip {
    std::string vessel_id;
    int trip_index = 0;
    std::vector<AisRecord> records;  // n >= 2, strictly increasing timestamps
    UnixSeconds start_time = 0;
    UnixSeconds end_time = 0;
    // Trip-level statics: modal non-missing value across the trip's records.
    std::optional<double> length_m;
    std::optional<double> width_m;
    std::optional<double> draft_m;
    // True when the segment is cut by the data boundary or a coverage gap
    // rather than a detected stop.
    bool open_start = false;
    bool open_end = false;
};

/// Sweeps one vessel's sorted records for maximal low-speed runs; a run
/// becomes a Stop iff it lasts at least min_duration_min and every point
/// lies within radius_m of the run centroid. Throws DomainError if the
/// records are not strictly increasing in time.
std::vector<Stop> detect_stops(std::span<const AisRecord> records, const StopParams& params);

/// Cuts the record sequence at the given stops (and at coverage gaps longer
/// than max_gap_min); each remaining run with at least min_trip_points
/// records becomes a Trip. Trips never share a record with a stop.
std::vector<Trip> segment_trips(std::span<const AisRecord> records, std::span<const Stop> stops,
                                const StopParams& params);

/// The unique trip with start_time <= instant <= end_time, or nullptr.
/// Trips must be time-ordered.
const Trip* trip_containing(std::span<const Trip> trips, UnixSeconds instant);

/// detect_stops + segment_trips for every vessel in the store, with
/// per-vessel trip indices. Results ordered by vessel_id.
std::vector<Trip> build_trips(const RecordStore& store, const StopParams& params);

}  // namespace towcast
