#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "towcast/artifacts.hpp"
#include "towcast/errors.hpp"
#include "towcast/synth.hpp"

using namespace towcast;

namespace {

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("store CSV round trip is lossless") {
    SynthConfig cfg;
    cfg.n_samples = 3;
    const auto dataset = generate_labeled_dataset(cfg);
    RecordStore store;
    for (const auto& trip : dataset.trips) {
        store.push_back(VesselTrack{trip.vessel_id, trip.records});
    }
    // Knock out some optionals to exercise empty-field serialization.
    store[0].records[0].heading = std::nullopt;
    store[0].records[1].draft_m = std::nullopt;

    const auto path = temp_path("store_roundtrip.csv");
    write_store_csv(path, store, {"config echo line"});
    const auto loaded = load_store_csv(path);
    REQUIRE(loaded.size() == store.size());
    for (std::size_t v = 0; v < store.size(); ++v) {
        REQUIRE(loaded[v].records.size() == store[v].records.size());
        CHECK(loaded[v].vessel_id == store[v].vessel_id);
        for (std::size_t i = 0; i < store[v].records.size(); ++i) {
            const auto& a = store[v].records[i];
            const auto& b = loaded[v].records[i];
            CHECK(a.timestamp == b.timestamp);
            CHECK(a.lat == b.lat);
            CHECK(a.lon == b.lon);
            CHECK(a.sog == b.sog);
            CHECK(a.cog == b.cog);
            CHECK(a.heading == b.heading);
            CHECK(a.length_m == b.length_m);
            CHECK(a.width_m == b.width_m);
            CHECK(a.draft_m == b.draft_m);
        }
    }
}

TEST_CASE("feature CSV round trip is lossless, labeled and not") {
    SynthConfig cfg;
    cfg.n_samples = 5;
    const auto dataset = generate_labeled_dataset(cfg);
    std::vector<FeatureRow> rows;
    for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
        FeatureRow row = feature_row_from_trip(dataset.trips[i], dataset.samples[i].features);
        row.barge_count = dataset.samples[i].barge_count;
        row.detection_id = dataset.samples[i].detection_id;
        rows.push_back(std::move(row));
    }
    rows[2].features[Feat::DFT] = std::nullopt;  // exercise a missing marker

    const auto labeled_path = temp_path("features_labeled.csv");
    write_feature_csv(labeled_path, rows, true);
    const auto loaded = load_feature_csv(labeled_path);
    CHECK(loaded.labeled);
    REQUIRE(loaded.rows.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(loaded.rows[i].vessel_id == rows[i].vessel_id);
        CHECK(loaded.rows[i].start_time == rows[i].start_time);
        CHECK(loaded.rows[i].barge_count == rows[i].barge_count);
        CHECK(loaded.rows[i].detection_id == rows[i].detection_id);
        for (int f = 0; f < kFeatureCount; ++f) {
            CHECK(loaded.rows[i].features.values[std::size_t(f)] ==
                  rows[i].features.values[std::size_t(f)]);
        }
    }

    const auto plain_path = temp_path("features_plain.csv");
    write_feature_csv(plain_path, rows, false);
    const auto plain = load_feature_csv(plain_path);
    CHECK_FALSE(plain.labeled);
    CHECK_FALSE(plain.rows[0].barge_count.has_value());
}

TEST_CASE("detections GeoJSON: labeled, unlabeled, and malformed") {
    const auto path = temp_path("detections.geojson");
    {
        std::ofstream out(path);
        out << R"({"type":"FeatureCollection","features":[
          {"type":"Feature","geometry":{"type":"Polygon","coordinates":
            [[[-91.002,31.998],[-90.998,31.998],[-90.998,32.002],[-91.002,32.002],[-91.002,31.998]]]},
           "properties":{"detection_id":"d1","scene_time":"2024-02-01T06:00:00","barge_count":5}},
          {"type":"Feature","geometry":{"type":"Polygon","coordinates":
            [[[-91.2,31.8],[-91.1,31.8],[-91.1,31.9],[-91.2,31.9],[-91.2,31.8]]]},
           "properties":{"detection_id":"d2","scene_time":"2024-02-01T07:30:00"}}
        ]})";
    }
    const auto detections = load_detections_geojson(path);
    REQUIRE(detections.size() == 2);
    CHECK(detections[0].detection_id == "d1");
    CHECK(detections[0].barge_count == 5);
    CHECK_FALSE(detections[1].barge_count.has_value());
    CHECK(detections[0].footprint.ring().size() == 5);
    // lon/lat order honored: latitude ~32.
    CHECK(detections[0].footprint.centroid().lat == doctest::Approx(32.0));

    const auto bad = temp_path("bad.geojson");
    {
        std::ofstream out(bad);
        out << R"({"type":"FeatureCollection","features":[
          {"type":"Feature","geometry":{"type":"Point","coordinates":[-91,32]},
           "properties":{"detection_id":"d","scene_time":"2024-02-01T06:00:00"}}]})";
    }
    CHECK_THROWS_AS(load_detections_geojson(bad), DomainError);
}

TEST_CASE("imputation JSON round trip") {
    ImputationReport report;
    report.entries.push_back({"LEN", 30.25, 2, false});
    report.entries.push_back({"DFT", 0.0, 5, true});
    const auto path = temp_path("imputation.json");
    write_imputation_json(path, report);
    const auto loaded = load_imputation_json(path);
    REQUIRE(loaded.entries.size() == 2);
    CHECK(loaded.entries[0].feature == "LEN");
    CHECK(loaded.entries[0].value == 30.25);
    CHECK(loaded.entries[1].all_missing);
}

TEST_CASE("rfecv JSON round trip") {
    RfecvResult result;
    result.family = ModelFamily::kPoisson;
    result.k = 2;
    result.seed = 42;
    result.elimination_order = {"B", "C"};
    result.trace_sizes = {3, 2, 1};
    result.trace_scores = {-1.5, -1.25, -2.0};
    result.trace_subsets = {{"A", "B", "C"}, {"A", "C"}, {"A"}};
    result.chosen = {"A", "C"};
    result.chosen_size = 2;
    const auto path = temp_path("rfecv.json");
    write_rfecv_json(path, result);
    const auto loaded = load_rfecv_json(path);
    CHECK(loaded.family == result.family);
    CHECK(loaded.elimination_order == result.elimination_order);
    CHECK(loaded.trace_scores == result.trace_scores);
    CHECK(loaded.trace_subsets == result.trace_subsets);
    CHECK(loaded.chosen == result.chosen);
    CHECK(loaded.chosen_size == 2);
}

TEST_CASE("to_design_matrix rejects missing values and missing labels") {
    SynthConfig cfg;
    cfg.n_samples = 3;
    const auto dataset = generate_labeled_dataset(cfg);
    std::vector<FeatureRow> rows;
    for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
        FeatureRow row = feature_row_from_trip(dataset.trips[i], dataset.samples[i].features);
        row.barge_count = dataset.samples[i].barge_count;
        rows.push_back(std::move(row));
    }
    const auto data = to_design_matrix(rows);
    CHECK(data.n_rows() == 3);
    CHECK(data.n_features() == std::size_t(kFeatureCount));
    data.validate();

    auto broken = rows;
    broken[0].features[Feat::LEN] = std::nullopt;
    CHECK_THROWS_AS(to_design_matrix(broken), DomainError);
    auto unlabeled = rows;
    unlabeled[1].barge_count = std::nullopt;
    CHECK_THROWS_AS(to_design_matrix(unlabeled), DomainError);
}
