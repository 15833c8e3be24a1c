#include "towcast/trajectory.hpp"

#include <algorithm>
#include <map>

#include "towcast/errors.hpp"

namespace towcast {
namespace {

void require_sorted(std::span<const AisRecord> records) {
    for (std::size_t i = 1; i < records.size(); ++i) {
        if (records[i].timestamp <= records[i - 1].timestamp) {
            throw DomainError("records are not strictly increasing in time");
        }
        if (records[i].vessel_id != records[i - 1].vessel_id) {
            throw DomainError("records span more than one vessel");
        }
    }
}

GeoPoint run_centroid(std::span<const AisRecord> records, int first, int last) {
    double lat = 0.0, lon = 0.0;
    for (int i = first; i <= last; ++i) {
        lat += records[static_cast<std::size_t>(i)].lat;
        lon += records[static_cast<std::size_t>(i)].lon;
    }
    const double n = static_cast<double>(last - first + 1);
    return GeoPoint{lat / n, lon / n};
}

// Most frequent non-missing value; ties resolved toward the smallest value.
std::optional<double> modal_static(std::span<const AisRecord> records,
                                   std::optional<double> AisRecord::* field) {
    std::map<double, int> counts;
    for (const auto& rec : records) {
        if ((rec.*field).has_value()) ++counts[*(rec.*field)];
    }
    if (counts.empty()) return std::nullopt;
    auto best = counts.begin();
    for (auto it = counts.begin(); it != counts.end(); ++it) {
        if (it->second > best->second) best = it;
    }
    return best->first;
}

Trip make_trip(std::span<const AisRecord> records, int first, int last, bool open_start, bool open_end) {
    Trip trip;
    trip.vessel_id = records[static_cast<std::size_t>(first)].vessel_id;
    trip.records.assign(records.begin() + first, records.begin() + last + 1);
    trip.start_time = trip.records.front().timestamp;
    trip.end_time = trip.records.back().timestamp;
    trip.length_m = modal_static(trip.records, &AisRecord::length_m);
    trip.width_m = modal_static(trip.records, &AisRecord::width_m);
    trip.draft_m = modal_static(trip.records, &AisRecord::draft_m);
    trip.open_start = open_start;
    trip.open_end = open_end;
    return trip;
}

}  // namespace

std::vector<Stop> detect_stops(std::span<const AisRecord> records, const StopParams& params) {
    require_sorted(records);
    std::vector<Stop> stops;
    const auto gap_limit_s = static_cast<UnixSeconds>(params.max_gap_min * 60.0);
    const auto min_duration_s = static_cast<UnixSeconds>(params.min_duration_min * 60.0);

    const int n = static_cast<int>(records.size());
    int i = 0;
    while (i < n) {
        if (records[static_cast<std::size_t>(i)].sog >= params.max_speed_kn) {
            ++i;
            continue;
        }
        // Extend a maximal low-speed run, broken by long silences.
        int j = i;
        while (j + 1 < n && records[static_cast<std::size_t>(j + 1)].sog < params.max_speed_kn &&
               records[static_cast<std::size_t>(j + 1)].timestamp -
                       records[static_cast<std::size_t>(j)].timestamp <=
                   gap_limit_s) {
            ++j;
        }
        const UnixSeconds duration =
            records[static_cast<std::size_t>(j)].timestamp - records[static_cast<std::size_t>(i)].timestamp;
        if (duration >= min_duration_s) {
            const GeoPoint centroid = run_centroid(records, i, j);
            bool compact = true;
            for (int k = i; k <= j; ++k) {
                const auto& rec = records[static_cast<std::size_t>(k)];
                if (haversine_km(GeoPoint{rec.lat, rec.lon}, centroid) * 1000.0 > params.radius_m) {
                    compact = false;
                    break;
                }
            }
            if (compact) {
                Stop stop;
                stop.vessel_id = records[static_cast<std::size_t>(i)].vessel_id;
                stop.start_time = records[static_cast<std::size_t>(i)].timestamp;
                stop.end_time = records[static_cast<std::size_t>(j)].timestamp;
                stop.centroid = centroid;
                stop.point_count = j - i + 1;
                stop.first_index = i;
                stop.last_index = j;
                stops.push_back(std::move(stop));
            }
        }
        i = j + 1;
    }
    return stops;
}

std::vector<Trip> segment_trips(std::span<const AisRecord> records, std::span<const Stop> stops,
                                const StopParams& params) {
    require_sorted(records);
    std::vector<Trip> trips;
    const auto gap_limit_s = static_cast<UnixSeconds>(params.max_gap_min * 60.0);
    const int n = static_cast<int>(records.size());

    // Spans of records strictly between consecutive stops, plus the leading
    // and trailing spans. Each span remembers whether a stop bounds it.
    struct Span {
        int first, last;
        bool stop_before, stop_after;
    };
    std::vector<Span> spans;
    int cursor = 0;
    bool stop_before = false;
    for (const auto& stop : stops) {
        if (cursor <= stop.first_index - 1) {
            spans.push_back({cursor, stop.first_index - 1, stop_before, true});
        }
        cursor = stop.last_index + 1;
        stop_before = true;
    }
    if (cursor <= n - 1) {
        spans.push_back({cursor, n - 1, stop_before, false});
    }

    for (const auto& span : spans) {
        // Split the span further wherever coverage is lost.
        int run_start = span.first;
        for (int k = span.first; k <= span.last; ++k) {
            const bool last_in_span = (k == span.last);
            const bool gap_after =
                !last_in_span && records[static_cast<std::size_t>(k + 1)].timestamp -
                                         records[static_cast<std::size_t>(k)].timestamp >
                                     gap_limit_s;
            if (!last_in_span && !gap_after) continue;
            const int run_end = k;
            if (run_end - run_start + 1 >= params.min_trip_points) {
                const bool open_start = !(span.stop_before && run_start == span.first);
                const bool open_end = !(span.stop_after && run_end == span.last);
                trips.push_back(make_trip(records, run_start, run_end, open_start, open_end));
            }
            run_start = k + 1;
        }
    }
    for (std::size_t t = 0; t < trips.size(); ++t) {
        trips[t].trip_index = static_cast<int>(t);
    }
    return trips;
}

const Trip* trip_containing(std::span<const Trip> trips, UnixSeconds instant) {
    for (const auto& trip : trips) {
        if (trip.start_time <= instant && instant <= trip.end_time) return &trip;
        if (trip.start_time > instant) break;
    }
    return nullptr;
}

std::vector<Trip> build_trips(const RecordStore& store, const StopParams& params) {
    std::vector<Trip> all;
    for (const auto& track : store) {
        const auto stops = detect_stops(track.records, params);
        auto trips = segment_trips(track.records, stops, params);
        for (auto& trip : trips) {
            all.push_back(std::move(trip));
        }
    }
    return all;
}

}  // namespace towcast
