#include "towcast/ais.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <utility>

#include "towcast/csv.hpp"
#include "towcast/errors.hpp"

namespace towcast {
namespace {

constexpr double kHeadingUnavailable = 511.0;

int find_column(const std::vector<std::string>& header, const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return static_cast<int>(i);
    }
    return -1;
}

std::string field_at(const std::vector<std::string>& row, int idx) {
    if (idx < 0 || static_cast<std::size_t>(idx) >= row.size()) return {};
    return row[static_cast<std::size_t>(idx)];
}

// Positive-or-missing statics; zero and negative values are treated as
// missing rather than an error (MarineCadastre uses 0 for unknown).
std::optional<double> parse_static(const std::string& field) {
    const auto v = parse_double_field(field);
    if (!v.has_value() || *v <= 0.0) return std::nullopt;
    return v;
}

}  // namespace

std::optional<std::string> validate_record(const AisRecord& rec) {
    if (rec.vessel_id.empty()) return "empty vessel id";
    if (rec.lat < -90.0 || rec.lat > 90.0) return "lat out of range";
    if (rec.lon < -180.0 || rec.lon > 180.0) return "lon out of range";
    if (rec.sog < 0.0) return "sog out of range";
    if (rec.cog < 0.0 || rec.cog >= 360.0) return "cog out of range";
    if (rec.heading.has_value() && (*rec.heading < 0.0 || *rec.heading >= 360.0)) {
        return "heading out of range";
    }
    return std::nullopt;
}

ParseResult parse_ais_csv(const std::string& path, const AisCsvSchema& schema) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open AIS CSV: " + path);
    }
    CsvReader reader(in);
    std::vector<std::string> header;
    if (!reader.next(header)) {
        throw SchemaError("AIS CSV has no header row: " + path);
    }

    struct Columns {
        int vessel_id, timestamp, lat, lon, sog, cog, heading, length, width, draft;
    } col{};
    const std::pair<std::string, int*> required[] = {
        {schema.vessel_id, &col.vessel_id}, {schema.timestamp, &col.timestamp},
        {schema.lat, &col.lat},             {schema.lon, &col.lon},
        {schema.sog, &col.sog},             {schema.cog, &col.cog},
    };
    for (const auto& [name, slot] : required) {
        *slot = find_column(header, name);
        if (*slot < 0) {
            throw SchemaError("AIS CSV is missing required column '" + name + "'");
        }
    }
    // Optional columns: heading and statics may be absent entirely.
    col.heading = find_column(header, schema.heading);
    col.length = find_column(header, schema.length);
    col.width = find_column(header, schema.width);
    col.draft = find_column(header, schema.draft);

    ParseResult result;
    std::vector<std::string> row;
    while (reader.next(row)) {
        auto skip = [&](std::string reason) {
            result.diagnostics.push_back({reader.line_number(), std::move(reason)});
        };
        AisRecord rec;
        rec.vessel_id = field_at(row, col.vessel_id);
        if (rec.vessel_id.empty()) {
            skip("empty vessel id");
            continue;
        }
        const auto ts = parse_timestamp(field_at(row, col.timestamp));
        if (!ts.has_value()) {
            skip("bad timestamp");
            continue;
        }
        rec.timestamp = *ts;
        const auto lat = parse_double_field(field_at(row, col.lat));
        const auto lon = parse_double_field(field_at(row, col.lon));
        if (!lat.has_value() || !lon.has_value()) {
            skip("missing position");
            continue;
        }
        rec.lat = *lat;
        rec.lon = *lon;
        const auto sog = parse_double_field(field_at(row, col.sog));
        if (!sog.has_value()) {
            skip("missing sog");
            continue;
        }
        rec.sog = *sog;
        const auto cog = parse_double_field(field_at(row, col.cog));
        if (!cog.has_value()) {
            skip("missing cog");
            continue;
        }
        rec.cog = *cog;
        const auto heading = parse_double_field(field_at(row, col.heading));
        if (heading.has_value() && *heading != kHeadingUnavailable) {
            rec.heading = *heading;
        }
        rec.length_m = parse_static(field_at(row, col.length));
        rec.width_m = parse_static(field_at(row, col.width));
        rec.draft_m = parse_static(field_at(row, col.draft));

        if (auto reason = validate_record(rec)) {
            skip(std::move(*reason));
            continue;
        }
        result.records.push_back(std::move(rec));
    }
    return result;
}

RecordStore clean_records(std::vector<AisRecord> records) {
    std::map<std::string, std::vector<AisRecord>> groups;
    for (auto& rec : records) {
        groups[rec.vessel_id].push_back(std::move(rec));
    }
    RecordStore store;
    store.reserve(groups.size());
    for (auto& [vessel_id, group] : groups) {
        std::stable_sort(group.begin(), group.end(),
                         [](const AisRecord& a, const AisRecord& b) { return a.timestamp < b.timestamp; });
        VesselTrack track;
        track.vessel_id = vessel_id;
        track.records.reserve(group.size());
        for (auto& rec : group) {
            if (!track.records.empty() && track.records.back().timestamp == rec.timestamp) {
                continue;  // keep the first occurrence of a duplicate timestamp
            }
            track.records.push_back(std::move(rec));
        }
        store.push_back(std::move(track));
    }
    return store;
}

}  // namespace towcast
