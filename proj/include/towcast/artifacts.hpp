#pragma once

#include <optional>
#include <string>
#include <vector>

#include "towcast/evaluation.hpp"
#include "towcast/fusion.hpp"
#include "towcast/synth.hpp"

namespace towcast {

/// Comment lines ("# ...") written at the top of CSV artifacts; callers
/// fill them with the effective configuration echo.
using HeaderLines = std::vector<std::string>;

// --- cleaned record store ---------------------------------------------------
// CSV: vessel_id,timestamp,lat,lon,sog,cog,heading,length_m,width_m,draft_m
// Missing optionals serialize as empty fields; doubles keep full precision,
// so a write/load cycle is lossless.

void write_store_csv(const std::string& path, const RecordStore& store,
                     const HeaderLines& header = {});
RecordStore load_store_csv(const std::string& path);

// --- trips -------------------------------------------------------------------
// CSV: vessel_id,trip_index,start_time,end_time,n_points

void write_trips_csv(const std::string& path, std::span<const Trip> trips,
                     const HeaderLines& header = {});

// --- feature tables ----------------------------------------------------------

/// One exported trip row; barge_count/detection_id are present only in
/// labeled tables.
struct FeatureRow {
    std::string vessel_id;
    int trip_index = 0;
    UnixSeconds start_time = 0;
    UnixSeconds end_time = 0;
    FeatureVector features;
    std::optional<int> barge_count;
    std::string detection_id;
};

/// Columns: vessel_id,trip_index,start_time,end_time,<39 acronyms>
/// plus barge_count,detection_id when labeled is true.
void write_feature_csv(const std::string& path, std::span<const FeatureRow> rows, bool labeled,
                       const HeaderLines& header = {});

struct FeatureTable {
    std::vector<FeatureRow> rows;
    bool labeled = false;
};

FeatureTable load_feature_csv(const std::string& path);

FeatureRow feature_row_from_trip(const Trip& trip, const FeatureVector& features);

/// Labeled rows -> modeling matrix over all 39 features. Rows must carry
/// no missing values (impute first) and a barge count.
DesignMatrix to_design_matrix(std::span<const FeatureRow> rows);

// --- detections ---------------------------------------------------------------

/// GeoJSON FeatureCollection of Polygon features with properties
/// detection_id (string), scene_time (ISO 8601 UTC), optional barge_count.
std::vector<Detection> load_detections_geojson(const std::string& path);

// --- match / prediction outputs ----------------------------------------------

void write_matches_csv(const std::string& path, std::span<const MatchResult> results,
                       std::span<const std::string> unmatched_ids, const HeaderLines& header = {});

void write_candidates_csv(const std::string& path,
                          std::span<const std::pair<std::string, MatchCandidate>> candidates,
                          const HeaderLines& header = {});

struct PredictionRow {
    std::string detection_id;  // may be empty
    std::string vessel_id;
    int trip_index = 0;
    double predicted = 0.0;
};

void write_predictions_csv(const std::string& path, std::span<const PredictionRow> rows,
                           const HeaderLines& header = {});

// --- JSON reports --------------------------------------------------------------

void write_imputation_json(const std::string& path, const ImputationReport& report);
ImputationReport load_imputation_json(const std::string& path);

/// {family, k, seed, per_fold:[{fold,n,mae}], mean_mae, selected_features,
///  score_trace}; score_trace is empty unless the report came from RFECV.
void write_cv_report_json(const std::string& path, const CvReport& report,
                          std::span<const double> score_trace = {});

void write_rfecv_json(const std::string& path, const RfecvResult& result);
RfecvResult load_rfecv_json(const std::string& path);

void write_selection_frequency_csv(const std::string& path,
                                   std::span<const std::pair<std::string, int>> table,
                                   const HeaderLines& header = {});

}  // namespace towcast
