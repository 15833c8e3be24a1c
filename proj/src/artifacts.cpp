#include "towcast/artifacts.hpp"

#include <array>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "towcast/csv.hpp"
#include "towcast/errors.hpp"

namespace towcast {
namespace {

using json = nlohmann::ordered_json;

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write file: " + path);
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read file: " + path);
    return in;
}

void write_header(std::ofstream& out, const HeaderLines& header) {
    for (const auto& line : header) out << "# " << line << "\n";
}

json parse_json_file(const std::string& path) {
    auto in = open_in(path);
    try {
        return json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw DomainError("malformed JSON in " + path + ": " + e.what());
    }
}

int require_column(const std::vector<std::string>& header, const std::string& name,
                   const std::string& path) {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return static_cast<int>(i);
    }
    throw SchemaError(path + " is missing required column '" + name + "'");
}

int optional_column(const std::vector<std::string>& header, const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return static_cast<int>(i);
    }
    return -1;
}

}  // namespace

void write_store_csv(const std::string& path, const RecordStore& store, const HeaderLines& header) {
    auto out = open_out(path);
    write_header(out, header);
    out << "vessel_id,timestamp,lat,lon,sog,cog,heading,length_m,width_m,draft_m\n";
    for (const auto& track : store) {
        for (const auto& rec : track.records) {
            out << csv_escape(rec.vessel_id) << ',' << format_timestamp(rec.timestamp) << ','
                << fmt_double(rec.lat) << ',' << fmt_double(rec.lon) << ',' << fmt_double(rec.sog)
                << ',' << fmt_double(rec.cog) << ',' << fmt_optional(rec.heading) << ','
                << fmt_optional(rec.length_m) << ',' << fmt_optional(rec.width_m) << ','
                << fmt_optional(rec.draft_m) << '\n';
        }
    }
}

RecordStore load_store_csv(const std::string& path) {
    auto in = open_in(path);
    CsvReader reader(in);
    std::vector<std::string> header;
    if (!reader.next(header)) throw SchemaError("store CSV has no header: " + path);
    const int c_vessel = require_column(header, "vessel_id", path);
    const int c_time = require_column(header, "timestamp", path);
    const int c_lat = require_column(header, "lat", path);
    const int c_lon = require_column(header, "lon", path);
    const int c_sog = require_column(header, "sog", path);
    const int c_cog = require_column(header, "cog", path);
    const int c_heading = require_column(header, "heading", path);
    const int c_len = require_column(header, "length_m", path);
    const int c_wid = require_column(header, "width_m", path);
    const int c_dft = require_column(header, "draft_m", path);

    std::vector<AisRecord> records;
    std::vector<std::string> row;
    auto col = [&](int idx) -> const std::string& { return row[static_cast<std::size_t>(idx)]; };
    while (reader.next(row)) {
        AisRecord rec;
        rec.vessel_id = col(c_vessel);
        const auto ts = parse_timestamp(col(c_time));
        if (!ts.has_value()) {
            throw DomainError("store CSV line " + std::to_string(reader.line_number()) +
                              ": bad timestamp");
        }
        rec.timestamp = *ts;
        auto need = [&](int idx, const char* what) {
            const auto v = parse_double_field(col(idx));
            if (!v.has_value()) {
                throw DomainError("store CSV line " + std::to_string(reader.line_number()) +
                                  ": bad " + std::string(what));
            }
            return *v;
        };
        rec.lat = need(c_lat, "lat");
        rec.lon = need(c_lon, "lon");
        rec.sog = need(c_sog, "sog");
        rec.cog = need(c_cog, "cog");
        rec.heading = parse_double_field(col(c_heading));
        rec.length_m = parse_double_field(col(c_len));
        rec.width_m = parse_double_field(col(c_wid));
        rec.draft_m = parse_double_field(col(c_dft));
        records.push_back(std::move(rec));
    }
    return clean_records(std::move(records));
}

void write_trips_csv(const std::string& path, std::span<const Trip> trips, const HeaderLines& header) {
    auto out = open_out(path);
    write_header(out, header);
    out << "vessel_id,trip_index,start_time,end_time,n_points\n";
    for (const auto& trip : trips) {
        out << csv_escape(trip.vessel_id) << ',' << trip.trip_index << ','
            << format_timestamp(trip.start_time) << ',' << format_timestamp(trip.end_time) << ','
            << trip.records.size() << '\n';
    }
}

void write_feature_csv(const std::string& path, std::span<const FeatureRow> rows, bool labeled,
                       const HeaderLines& header) {
    auto out = open_out(path);
    write_header(out, header);
    out << "vessel_id,trip_index,start_time,end_time";
    for (const auto& name : FeatureVector::names()) out << ',' << name;
    if (labeled) out << ",barge_count,detection_id";
    out << '\n';
    for (const auto& row : rows) {
        out << csv_escape(row.vessel_id) << ',' << row.trip_index << ','
            << format_timestamp(row.start_time) << ',' << format_timestamp(row.end_time);
        for (const auto& value : row.features.values) out << ',' << fmt_optional(value);
        if (labeled) {
            out << ',';
            if (row.barge_count.has_value()) out << *row.barge_count;
            out << ',' << csv_escape(row.detection_id);
        }
        out << '\n';
    }
}

FeatureTable load_feature_csv(const std::string& path) {
    auto in = open_in(path);
    CsvReader reader(in);
    std::vector<std::string> header;
    if (!reader.next(header)) throw SchemaError("feature CSV has no header: " + path);

    const int c_vessel = require_column(header, "vessel_id", path);
    const int c_trip = require_column(header, "trip_index", path);
    const int c_start = require_column(header, "start_time", path);
    const int c_end = require_column(header, "end_time", path);
    std::array<int, kFeatureCount> c_feat{};
    for (int f = 0; f < kFeatureCount; ++f) {
        c_feat[static_cast<std::size_t>(f)] = require_column(
            header, std::string(FeatureVector::names()[static_cast<std::size_t>(f)]), path);
    }
    const int c_count = optional_column(header, "barge_count");
    const int c_det = optional_column(header, "detection_id");

    FeatureTable table;
    table.labeled = c_count >= 0;
    std::vector<std::string> row;
    auto col = [&](int idx) -> const std::string& { return row[static_cast<std::size_t>(idx)]; };
    while (reader.next(row)) {
        FeatureRow fr;
        fr.vessel_id = col(c_vessel);
        const auto trip_idx = parse_double_field(col(c_trip));
        const auto start = parse_timestamp(col(c_start));
        const auto end = parse_timestamp(col(c_end));
        if (!trip_idx.has_value() || !start.has_value() || !end.has_value()) {
            throw DomainError("feature CSV line " + std::to_string(reader.line_number()) +
                              ": bad key fields");
        }
        fr.trip_index = static_cast<int>(*trip_idx);
        fr.start_time = *start;
        fr.end_time = *end;
        for (int f = 0; f < kFeatureCount; ++f) {
            fr.features.values[static_cast<std::size_t>(f)] =
                parse_double_field(col(c_feat[static_cast<std::size_t>(f)]));
        }
        if (c_count >= 0) {
            const auto count = parse_double_field(col(c_count));
            if (count.has_value()) fr.barge_count = static_cast<int>(*count);
        }
        if (c_det >= 0) fr.detection_id = col(c_det);
        table.rows.push_back(std::move(fr));
    }
    return table;
}

FeatureRow feature_row_from_trip(const Trip& trip, const FeatureVector& features) {
    FeatureRow row;
    row.vessel_id = trip.vessel_id;
    row.trip_index = trip.trip_index;
    row.start_time = trip.start_time;
    row.end_time = trip.end_time;
    row.features = features;
    return row;
}

DesignMatrix to_design_matrix(std::span<const FeatureRow> rows) {
    DesignMatrix data;
    for (const auto& name : FeatureVector::names()) data.feature_names.emplace_back(name);
    for (const auto& row : rows) {
        if (!row.barge_count.has_value()) {
            throw DomainError("row without barge_count cannot enter the design matrix");
        }
        std::vector<double> values;
        values.reserve(kFeatureCount);
        for (const auto& v : row.features.values) {
            if (!v.has_value()) {
                throw DomainError("missing feature value; impute before modeling");
            }
            values.push_back(*v);
        }
        data.rows.push_back(std::move(values));
        data.targets.push_back(static_cast<double>(*row.barge_count));
    }
    return data;
}

std::vector<Detection> load_detections_geojson(const std::string& path) {
    const json doc = parse_json_file(path);
    if (doc.value("type", "") != "FeatureCollection") {
        throw DomainError(path + ": expected a GeoJSON FeatureCollection");
    }
    std::vector<Detection> detections;
    for (const auto& feature : doc.at("features")) {
        const auto& geometry = feature.at("geometry");
        if (geometry.value("type", "") != "Polygon") {
            throw DomainError(path + ": every detection geometry must be a Polygon");
        }
        const auto& rings = geometry.at("coordinates");
        if (rings.empty()) throw DomainError(path + ": polygon without rings");
        std::vector<GeoPoint> ring;
        for (const auto& coord : rings.at(0)) {
            // GeoJSON order: [lon, lat]
            ring.push_back(GeoPoint{coord.at(1).get<double>(), coord.at(0).get<double>()});
        }
        const auto& props = feature.at("properties");
        const auto scene_time = parse_timestamp(props.at("scene_time").get<std::string>());
        if (!scene_time.has_value()) {
            throw DomainError(path + ": bad scene_time for detection " +
                              props.value("detection_id", std::string("?")));
        }
        std::optional<int> count;
        if (props.contains("barge_count") && !props.at("barge_count").is_null()) {
            count = props.at("barge_count").get<int>();
        }
        detections.push_back(Detection{props.at("detection_id").get<std::string>(), *scene_time,
                                       GeoPolygon(std::move(ring)), count});
    }
    return detections;
}

void write_matches_csv(const std::string& path, std::span<const MatchResult> results,
                       std::span<const std::string> unmatched_ids, const HeaderLines& header) {
    auto out = open_out(path);
    write_header(out, header);
    out << "detection_id,vessel_id,within_window,intersects,trip_index,is_match\n";
    for (const auto& result : results) {
        out << csv_escape(result.detection_id) << ',' << csv_escape(result.vessel_id) << ','
            << (result.within_window ? 1 : 0) << ',' << (result.intersects ? 1 : 0) << ',';
        if (result.trip_index.has_value()) out << *result.trip_index;
        out << ',' << (result.is_match() ? 1 : 0) << '\n';
    }
    for (const auto& id : unmatched_ids) {
        out << csv_escape(id) << ",,0,0,,0\n";
    }
}

void write_candidates_csv(const std::string& path,
                          std::span<const std::pair<std::string, MatchCandidate>> candidates,
                          const HeaderLines& header) {
    auto out = open_out(path);
    write_header(out, header);
    out << "detection_id,vessel_id,intersects,nearest_dt_s,centroid_dist_km,trip_index,window_points\n";
    for (const auto& [detection_id, candidate] : candidates) {
        out << csv_escape(detection_id) << ',' << csv_escape(candidate.vessel_id) << ','
            << (candidate.intersects ? 1 : 0) << ',' << fmt_double(candidate.nearest_dt_s) << ','
            << fmt_double(candidate.centroid_dist_km) << ',';
        if (candidate.trip_index.has_value()) out << *candidate.trip_index;
        out << ',' << candidate.window_points << '\n';
    }
}

void write_predictions_csv(const std::string& path, std::span<const PredictionRow> rows,
                           const HeaderLines& header) {
    auto out = open_out(path);
    write_header(out, header);
    out << "detection_id,vessel_id,trip_index,predicted_count\n";
    for (const auto& row : rows) {
        out << csv_escape(row.detection_id) << ',' << csv_escape(row.vessel_id) << ','
            << row.trip_index << ',' << fmt_double(row.predicted) << '\n';
    }
}

void write_imputation_json(const std::string& path, const ImputationReport& report) {
    json entries = json::array();
    for (const auto& entry : report.entries) {
        entries.push_back({{"feature", entry.feature},
                           {"value", entry.value},
                           {"n_imputed", entry.n_imputed},
                           {"all_missing", entry.all_missing}});
    }
    auto out = open_out(path);
    out << json{{"schema_version", 1}, {"medians", std::move(entries)}}.dump(2) << "\n";
}

ImputationReport load_imputation_json(const std::string& path) {
    const json doc = parse_json_file(path);
    ImputationReport report;
    for (const auto& entry : doc.at("medians")) {
        report.entries.push_back(ImputationEntry{entry.at("feature").get<std::string>(),
                                                 entry.at("value").get<double>(),
                                                 entry.at("n_imputed").get<int>(),
                                                 entry.at("all_missing").get<bool>()});
    }
    return report;
}

void write_cv_report_json(const std::string& path, const CvReport& report,
                          std::span<const double> score_trace) {
    json folds = json::array();
    for (const auto& fold : report.per_fold) {
        json f = {{"fold", fold.fold}, {"n", fold.n}};
        if (fold.ok) {
            f["mae"] = fold.mae;
        } else {
            f["error"] = fold.error;
        }
        folds.push_back(std::move(f));
    }
    json doc = {{"family", family_name(report.family)},
                {"k", report.k},
                {"seed", report.seed},
                {"per_fold", std::move(folds)},
                {"mean_mae", report.mean_mae},
                {"selected_features", report.feature_subset},
                {"score_trace", std::vector<double>(score_trace.begin(), score_trace.end())}};
    if (report.has_fold_errors) doc["has_fold_errors"] = true;
    auto out = open_out(path);
    out << doc.dump(2) << "\n";
}

void write_rfecv_json(const std::string& path, const RfecvResult& result) {
    json trace = json::array();
    for (std::size_t i = 0; i < result.trace_sizes.size(); ++i) {
        trace.push_back({{"n_features", result.trace_sizes[i]},
                         {"score", result.trace_scores[i]},
                         {"subset", result.trace_subsets[i]}});
    }
    json doc = {{"family", family_name(result.family)},
                {"k", result.k},
                {"seed", result.seed},
                {"elimination_order", result.elimination_order},
                {"score_trace", std::move(trace)},
                {"chosen_features", result.chosen},
                {"chosen_size", result.chosen_size}};
    auto out = open_out(path);
    out << doc.dump(2) << "\n";
}

RfecvResult load_rfecv_json(const std::string& path) {
    const json doc = parse_json_file(path);
    RfecvResult result;
    const auto family = family_from_name(doc.at("family").get<std::string>());
    if (!family.has_value()) throw DomainError(path + ": unknown family");
    result.family = *family;
    result.k = doc.at("k").get<int>();
    result.seed = doc.at("seed").get<std::uint64_t>();
    result.elimination_order = doc.at("elimination_order").get<std::vector<std::string>>();
    for (const auto& entry : doc.at("score_trace")) {
        result.trace_sizes.push_back(entry.at("n_features").get<int>());
        result.trace_scores.push_back(entry.at("score").get<double>());
        result.trace_subsets.push_back(entry.at("subset").get<std::vector<std::string>>());
    }
    result.chosen = doc.at("chosen_features").get<std::vector<std::string>>();
    result.chosen_size = doc.at("chosen_size").get<int>();
    return result;
}

void write_selection_frequency_csv(const std::string& path,
                                   std::span<const std::pair<std::string, int>> table,
                                   const HeaderLines& header) {
    auto out = open_out(path);
    write_header(out, header);
    out << "feature,selected_by\n";
    for (const auto& [feature, count] : table) {
        out << csv_escape(feature) << ',' << count << '\n';
    }
}

}  // namespace towcast
