// towcast: trajectory analytics and barge-count modeling pipeline.
//
// Subcommands: ingest, trips, features, match, train, select, evaluate,
// predict, synth, report. Exit codes: 0 success, 1 domain error, 2 usage
// error. Every tunable resolves CLI flag > config file > built-in default,
// and the effective values are echoed into each artifact's header.

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "towcast/artifacts.hpp"
#include "towcast/csv.hpp"
#include "towcast/errors.hpp"

using namespace towcast;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PipelineConfig {
    StopParams stop;
    FeatureConfig features;
    int window_seconds = 120;
    Hyperparams model;
    int cv_k = 2;
    std::uint64_t seed = 42;
    SynthConfig synth;
    bool no_timestamps = false;
};

// One tunable: its config-file key, CLI option, and string round-trip.
struct KeyBinding {
    std::string key;
    CLI::Option* option = nullptr;
    std::function<void(const std::string&)> apply;
    std::function<std::string()> render;
};

std::set<std::string>& all_known_keys() {
    static std::set<std::string> keys;
    return keys;
}

template <typename T>
void parse_into(const std::string& text, T& target, const std::string& key) {
    if constexpr (std::is_same_v<T, bool>) {
        if (text == "true" || text == "1") {
            target = true;
        } else if (text == "false" || text == "0") {
            target = false;
        } else {
            throw UsageError("config key " + key + ": expected true/false");
        }
    } else if constexpr (std::is_floating_point_v<T>) {
        const auto v = parse_double_field(text);
        if (!v.has_value()) throw UsageError("config key " + key + ": bad number '" + text + "'");
        target = *v;
    } else if constexpr (std::is_same_v<T, std::string>) {
        target = text;
    } else {
        try {
            target = static_cast<T>(std::stoll(text));
        } catch (const std::exception&) {
            throw UsageError("config key " + key + ": bad integer '" + text + "'");
        }
    }
}

template <typename T>
std::string render_value(const T& value) {
    if constexpr (std::is_same_v<T, bool>) {
        return value ? "true" : "false";
    } else if constexpr (std::is_floating_point_v<T>) {
        return fmt_double(value);
    } else if constexpr (std::is_same_v<T, std::string>) {
        return value;
    } else {
        return std::to_string(value);
    }
}

template <typename T>
void bind_option(CLI::App* cmd, std::vector<KeyBinding>& bindings, const std::string& flag,
          const std::string& key, T& target, const std::string& desc) {
    KeyBinding binding;
    binding.key = key;
    binding.option = cmd->add_option(flag, target, desc);
    binding.apply = [&target, key](const std::string& text) { parse_into(text, target, key); };
    binding.render = [&target]() { return render_value(target); };
    bindings.push_back(std::move(binding));
    all_known_keys().insert(key);
}

void bind_flag(CLI::App* cmd, std::vector<KeyBinding>& bindings, const std::string& flag,
               const std::string& key, bool& target, const std::string& desc) {
    KeyBinding binding;
    binding.key = key;
    binding.option = cmd->add_flag(flag, target, desc);
    binding.apply = [&target, key](const std::string& text) { parse_into(text, target, key); };
    binding.render = [&target]() { return render_value(target); };
    bindings.push_back(std::move(binding));
    all_known_keys().insert(key);
}

std::map<std::string, std::string> load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config file: " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string trimmed = line;
        trimmed.erase(0, trimmed.find_first_not_of(" \t"));
        if (trimmed.empty() || trimmed[0] == '#') continue;
        const auto eq = trimmed.find('=');
        if (eq == std::string::npos) {
            throw UsageError(path + ":" + std::to_string(line_no) + ": expected key = value");
        }
        auto strip = [](std::string s) {
            s.erase(0, s.find_first_not_of(" \t"));
            s.erase(s.find_last_not_of(" \t") + 1);
            return s;
        };
        const std::string key = strip(trimmed.substr(0, eq));
        const std::string value = strip(trimmed.substr(eq + 1));
        if (!all_known_keys().count(key)) {
            throw UsageError(path + ": unknown config key '" + key + "'");
        }
        kv[key] = value;
    }
    return kv;
}

void apply_config_file(const std::string& path, std::vector<KeyBinding>& bindings) {
    if (path.empty()) return;
    const auto kv = load_config_file(path);
    for (auto& binding : bindings) {
        if (binding.option != nullptr && binding.option->count() > 0) continue;  // flag wins
        const auto it = kv.find(binding.key);
        if (it != kv.end()) binding.apply(it->second);
    }
}

HeaderLines make_header(const std::string& subcommand, const std::vector<KeyBinding>& bindings,
                        bool no_timestamps) {
    HeaderLines header;
    header.push_back("towcast " + subcommand);
    for (const auto& binding : bindings) {
        header.push_back(binding.key + " = " + binding.render());
    }
    if (!no_timestamps) {
        const std::time_t now = std::time(nullptr);
        char buf[32];
        std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%S", std::gmtime(&now));
        header.push_back(std::string("generated_at = ") + buf);
    }
    return header;
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::string token;
    std::istringstream in(text);
    while (std::getline(in, token, ',')) {
        if (!token.empty()) out.push_back(token);
    }
    return out;
}

// --- shared option groups ----------------------------------------------------

void add_stop_options(CLI::App* cmd, PipelineConfig& cfg, std::vector<KeyBinding>& bindings) {
    bind_option(cmd, bindings, "--stop-speed-kn", "stop.speed_kn", cfg.stop.max_speed_kn,
         "Speed threshold below which a ping can belong to a stop (knots)");
    bind_option(cmd, bindings, "--stop-min-minutes", "stop.min_minutes", cfg.stop.min_duration_min,
         "Minimum stop duration (minutes)");
    bind_option(cmd, bindings, "--stop-radius-m", "stop.radius_m", cfg.stop.radius_m,
         "Maximum distance of any stop ping from the stop centroid (meters)");
    bind_option(cmd, bindings, "--max-gap-minutes", "stop.max_gap_min", cfg.stop.max_gap_min,
         "Coverage gap that splits runs (minutes)");
    bind_option(cmd, bindings, "--min-trip-points", "stop.min_trip_points", cfg.stop.min_trip_points,
         "Minimum records for a movement run to become a trip");
}

void add_feature_options(CLI::App* cmd, PipelineConfig& cfg, std::vector<KeyBinding>& bindings) {
    bind_option(cmd, bindings, "--speed-bins", "features.entropy_bins_speed",
         cfg.features.entropy_bins_speed, "Speed entropy bins");
    bind_option(cmd, bindings, "--course-bins", "features.entropy_bins_course",
         cfg.features.entropy_bins_course, "Course entropy bins over [0,360)");
    bind_option(cmd, bindings, "--low-speed-kn", "features.low_speed_kn", cfg.features.low_speed_kn,
         "SOG_PCT_LOW threshold (knots)");
    bind_option(cmd, bindings, "--high-speed-kn", "features.high_speed_kn", cfg.features.high_speed_kn,
         "SOG_PCT_HIGH threshold (knots)");
    bind_option(cmd, bindings, "--optimal-low-kn", "features.optimal_low_kn", cfg.features.optimal_low_kn,
         "SOG_PCT_OPT lower bound (knots)");
    bind_option(cmd, bindings, "--optimal-high-kn", "features.optimal_high_kn",
         cfg.features.optimal_high_kn, "SOG_PCT_OPT upper bound (knots)");
    bind_option(cmd, bindings, "--min-direct-km", "features.min_direct_km", cfg.features.min_direct_km,
         "Displacement below which SINO_IDX is marked missing (km)");
}

void add_model_options(CLI::App* cmd, PipelineConfig& cfg, std::vector<KeyBinding>& bindings) {
    bind_option(cmd, bindings, "--poisson-l2", "model.poisson_l2", cfg.model.poisson_l2,
         "Poisson ridge strength");
    bind_option(cmd, bindings, "--poisson-tol", "model.poisson_tol", cfg.model.poisson_tol,
         "Poisson deviance-change tolerance");
    bind_option(cmd, bindings, "--poisson-max-iter", "model.poisson_max_iter", cfg.model.poisson_max_iter,
         "Poisson IRLS iteration cap");
    bind_option(cmd, bindings, "--enet-alpha", "model.enet_alpha", cfg.model.enet_alpha,
         "ElasticNet penalty strength");
    bind_option(cmd, bindings, "--enet-l1-ratio", "model.enet_l1_ratio", cfg.model.enet_l1_ratio,
         "ElasticNet L1 share in [0,1]");
    bind_option(cmd, bindings, "--enet-tol", "model.enet_tol", cfg.model.enet_tol,
         "ElasticNet coordinate-descent tolerance");
    bind_option(cmd, bindings, "--enet-max-sweeps", "model.enet_max_sweeps", cfg.model.enet_max_sweeps,
         "ElasticNet sweep cap");
    bind_option(cmd, bindings, "--rf-trees", "model.rf_trees", cfg.model.rf_trees, "Forest size");
    bind_option(cmd, bindings, "--rf-mtry", "model.rf_mtry", cfg.model.rf_mtry,
         "Features per split (0 = p/3)");
    bind_option(cmd, bindings, "--rf-min-leaf", "model.rf_min_leaf", cfg.model.rf_min_leaf,
         "Minimum samples per leaf");
    bind_option(cmd, bindings, "--rf-max-depth", "model.rf_max_depth", cfg.model.rf_max_depth,
         "Tree depth cap (0 = unlimited)");
    bind_option(cmd, bindings, "--ada-estimators", "model.ada_estimators", cfg.model.ada_estimators,
         "AdaBoost round cap");
    bind_option(cmd, bindings, "--ada-depth", "model.ada_depth", cfg.model.ada_depth,
         "AdaBoost base tree depth");
}

void add_common(CLI::App* cmd, PipelineConfig& cfg, std::string& config_path,
                std::vector<KeyBinding>& bindings) {
    cmd->add_option("--config", config_path, "key = value configuration file");
    bind_flag(cmd, bindings, "--no-timestamps", "output.no_timestamps", cfg.no_timestamps,
              "Omit the generated_at header line (for reproducible artifacts)");
}

// --- helpers shared by several subcommands ------------------------------------

std::vector<FeatureRow> compute_feature_rows(const RecordStore& store, const PipelineConfig& cfg,
                                             std::vector<Trip>* trips_out = nullptr) {
    auto trips = build_trips(store, cfg.stop);
    std::vector<FeatureRow> rows;
    rows.reserve(trips.size());
    for (const auto& trip : trips) {
        rows.push_back(feature_row_from_trip(trip, extract_all(trip, cfg.features)));
    }
    if (trips_out != nullptr) *trips_out = std::move(trips);
    return rows;
}

struct LabelEntry {
    std::string detection_id;
    int barge_count = 0;
};

std::map<std::string, LabelEntry> load_labels_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read labels file: " + path);
    CsvReader reader(in);
    std::vector<std::string> header;
    if (!reader.next(header)) throw SchemaError("labels CSV has no header: " + path);
    int c_det = -1, c_vessel = -1, c_count = -1;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == "detection_id") c_det = static_cast<int>(i);
        if (header[i] == "vessel_id") c_vessel = static_cast<int>(i);
        if (header[i] == "barge_count") c_count = static_cast<int>(i);
    }
    if (c_vessel < 0 || c_count < 0) {
        throw SchemaError(path + " needs vessel_id and barge_count columns");
    }
    std::map<std::string, LabelEntry> labels;
    std::vector<std::string> row;
    while (reader.next(row)) {
        const auto count = parse_double_field(row[static_cast<std::size_t>(c_count)]);
        if (!count.has_value()) {
            throw DomainError(path + " line " + std::to_string(reader.line_number()) +
                              ": bad barge_count");
        }
        LabelEntry entry;
        entry.barge_count = static_cast<int>(*count);
        if (c_det >= 0) entry.detection_id = row[static_cast<std::size_t>(c_det)];
        labels[row[static_cast<std::size_t>(c_vessel)]] = std::move(entry);
    }
    return labels;
}

ModelFamily parse_family(const std::string& name) {
    const auto family = family_from_name(name);
    if (!family.has_value()) {
        throw UsageError("unknown model family '" + name +
                         "' (expected poisson|elasticnet|random_forest|adaboost_r2)");
    }
    return *family;
}

void print_cv_report(const CvReport& report) {
    std::cout << "family: " << family_name(report.family) << "  k: " << report.k
              << "  seed: " << report.seed << "\n";
    for (const auto& fold : report.per_fold) {
        std::cout << "  fold " << fold.fold << "  n=" << fold.n << "  ";
        if (fold.ok) {
            std::cout << "mae=" << fmt_double(fold.mae) << "\n";
        } else {
            std::cout << "error: " << fold.error << "\n";
        }
    }
    std::cout << "  mean mae: " << fmt_double(report.mean_mae) << "\n";
}

DesignMatrix matrix_from_table(std::vector<FeatureRow> rows) {
    if (rows.empty()) throw DomainError("no rows in the labeled dataset");
    std::vector<FeatureVector> features;
    features.reserve(rows.size());
    for (const auto& row : rows) features.push_back(row.features);
    impute_features(features);
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i].features = features[i];
    return to_design_matrix(rows);
}

// --- subcommand implementations ------------------------------------------------

int run_ingest(const PipelineConfig& cfg, const std::vector<KeyBinding>& bindings,
               const std::string& input, const std::string& out, const AisCsvSchema& schema,
               const std::string& vessel_list, const std::string& diagnostics_out) {
    auto result = parse_ais_csv(input, schema);
    std::size_t filtered = 0;
    if (!vessel_list.empty()) {
        const auto allowed_vec = split_list(vessel_list);
        const std::set<std::string> allowed(allowed_vec.begin(), allowed_vec.end());
        std::vector<AisRecord> kept;
        for (auto& rec : result.records) {
            if (allowed.count(rec.vessel_id)) {
                kept.push_back(std::move(rec));
            } else {
                ++filtered;
            }
        }
        result.records = std::move(kept);
    }
    const auto store = clean_records(std::move(result.records));
    write_store_csv(out, store, make_header("ingest", bindings, cfg.no_timestamps));

    if (!diagnostics_out.empty()) {
        std::ofstream diag(diagnostics_out);
        if (!diag) throw IoError("cannot write diagnostics file: " + diagnostics_out);
        diag << "line,reason\n";
        for (const auto& d : result.diagnostics) {
            diag << d.line << ',' << csv_escape(d.reason) << '\n';
        }
    }
    std::size_t total = 0;
    for (const auto& track : store) total += track.records.size();
    std::cerr << "ingest: " << total << " records across " << store.size() << " vessels ("
              << result.diagnostics.size() << " rows skipped";
    if (filtered > 0) std::cerr << ", " << filtered << " outside the vessel allow-list";
    std::cerr << ")\n";
    return 0;
}

int run_trips(const PipelineConfig& cfg, const std::vector<KeyBinding>& bindings,
              const std::string& store_path, const std::string& out) {
    const auto store = load_store_csv(store_path);
    const auto trips = build_trips(store, cfg.stop);
    write_trips_csv(out, trips, make_header("trips", bindings, cfg.no_timestamps));
    std::cerr << "trips: " << trips.size() << " trips from " << store.size() << " vessels\n";
    return 0;
}

int run_features(const PipelineConfig& cfg, const std::vector<KeyBinding>& bindings,
                 const std::string& store_path, const std::string& out,
                 const std::string& labels_path, const std::string& imputation_out) {
    const auto store = load_store_csv(store_path);
    auto rows = compute_feature_rows(store, cfg);
    const auto header = make_header("features", bindings, cfg.no_timestamps);

    if (labels_path.empty()) {
        write_feature_csv(out, rows, false, header);
        std::cerr << "features: " << rows.size() << " trips\n";
        return 0;
    }
    const auto labels = load_labels_csv(labels_path);
    std::vector<FeatureRow> labeled;
    for (auto& row : rows) {
        const auto it = labels.find(row.vessel_id);
        if (it == labels.end()) continue;
        row.barge_count = it->second.barge_count;
        row.detection_id = it->second.detection_id;
        labeled.push_back(std::move(row));
    }
    if (labeled.empty()) throw DomainError("no trip matched any label row");
    std::vector<FeatureVector> features;
    for (const auto& row : labeled) features.push_back(row.features);
    const auto report = impute_features(features);
    for (std::size_t i = 0; i < labeled.size(); ++i) labeled[i].features = features[i];
    write_feature_csv(out, labeled, true, header);
    if (!imputation_out.empty()) write_imputation_json(imputation_out, report);
    std::cerr << "features: " << labeled.size() << " labeled trips\n";
    return 0;
}

int run_match(const PipelineConfig& cfg, const std::vector<KeyBinding>& bindings,
              const std::string& store_path, const std::string& detections_path,
              const std::string& out, const std::string& matches_out,
              const std::string& candidates_out, const std::string& unlabeled_out,
              const std::string& imputation_out) {
    const auto store = load_store_csv(store_path);
    const auto detections = load_detections_geojson(detections_path);
    std::vector<Trip> trips;
    const auto feature_rows = compute_feature_rows(store, cfg, &trips);

    TripFeatureMap trip_features;
    std::map<std::pair<std::string, int>, const Trip*> trip_lookup;
    for (std::size_t i = 0; i < trips.size(); ++i) {
        trip_features[{trips[i].vessel_id, trips[i].trip_index}] = feature_rows[i].features;
        trip_lookup[{trips[i].vessel_id, trips[i].trip_index}] = &trips[i];
    }

    std::vector<MatchResult> results;
    std::vector<std::string> unmatched;
    std::vector<std::pair<std::string, MatchCandidate>> all_candidates;
    for (const auto& detection : detections) {
        auto outcome = match_detection(detection, store, trips, cfg.window_seconds);
        for (auto& candidate : outcome.candidates) {
            all_candidates.emplace_back(detection.detection_id, std::move(candidate));
        }
        if (outcome.result.has_value()) {
            results.push_back(std::move(*outcome.result));
        } else {
            unmatched.push_back(detection.detection_id);
        }
    }

    const auto dataset = build_labeled_dataset(detections, results, trip_features);
    const auto header = make_header("match", bindings, cfg.no_timestamps);

    std::vector<FeatureRow> labeled_rows;
    for (const auto& sample : dataset.samples) {
        const Trip* trip = trip_lookup.at({sample.vessel_id, sample.trip_index});
        FeatureRow row = feature_row_from_trip(*trip, sample.features);
        row.detection_id = sample.detection_id;
        row.barge_count = sample.barge_count;
        labeled_rows.push_back(std::move(row));
    }
    write_feature_csv(out, labeled_rows, true, header);

    if (!unlabeled_out.empty()) {
        std::vector<FeatureRow> unlabeled_rows;
        for (const auto& sample : dataset.unlabeled) {
            const Trip* trip = trip_lookup.at({sample.vessel_id, sample.trip_index});
            FeatureRow row = feature_row_from_trip(*trip, sample.features);
            row.detection_id = sample.detection_id;
            unlabeled_rows.push_back(std::move(row));
        }
        write_feature_csv(unlabeled_out, unlabeled_rows, true, header);
    }
    if (!matches_out.empty()) write_matches_csv(matches_out, results, unmatched, header);
    if (!candidates_out.empty()) write_candidates_csv(candidates_out, all_candidates, header);
    if (!imputation_out.empty()) write_imputation_json(imputation_out, dataset.report);
    std::cerr << "match: " << dataset.samples.size() << " labeled samples, "
              << dataset.unlabeled.size() << " unlabeled, " << unmatched.size()
              << " detections unmatched\n";
    return 0;
}

int run_train(const PipelineConfig& cfg, const std::string& data_path,
              const std::string& family_name_arg, const std::string& features_arg,
              const std::string& model_out, const std::string& report_out) {
    const auto family = parse_family(family_name_arg);
    const auto table = load_feature_csv(data_path);
    if (!table.labeled) throw DomainError(data_path + " carries no barge_count column");
    DesignMatrix data = matrix_from_table(table.rows);
    if (!features_arg.empty()) data = data.select_features(split_list(features_arg));

    const auto folds = stratified_kfold(data.targets, cfg.cv_k, cfg.seed);
    const auto report = cross_validate(data, family, cfg.model, folds);
    print_cv_report(report);

    const auto model = fit_model(data, family, cfg.model, cfg.seed);
    if (!model_out.empty()) save_model(model, model_out);
    if (!report_out.empty()) write_cv_report_json(report_out, report);
    return 0;
}

int run_select(const PipelineConfig& cfg, const std::string& data_path,
               const std::string& family_name_arg, const std::string& features_arg,
               const std::string& out) {
    const auto family = parse_family(family_name_arg);
    const auto table = load_feature_csv(data_path);
    if (!table.labeled) throw DomainError(data_path + " carries no barge_count column");
    DesignMatrix data = matrix_from_table(table.rows);
    if (!features_arg.empty()) data = data.select_features(split_list(features_arg));

    auto result = rfecv(data, family, cfg.model, cfg.cv_k, cfg.seed);
    std::cout << "family: " << family_name(family) << "  chosen size: " << result.chosen_size
              << "\n";
    for (std::size_t i = 0; i < result.trace_sizes.size(); ++i) {
        std::cout << "  size " << result.trace_sizes[i] << "  score "
                  << fmt_double(result.trace_scores[i]) << "\n";
    }
    std::cout << "chosen:";
    for (const auto& name : result.chosen) std::cout << ' ' << name;
    std::cout << "\n";
    if (!out.empty()) write_rfecv_json(out, result);
    return 0;
}

int run_evaluate(const PipelineConfig& cfg, const std::string& data_path,
                 const std::string& model_path, const std::string& report_out) {
    const auto model = load_model(model_path);
    const auto table = load_feature_csv(data_path);
    if (!table.labeled) throw DomainError(data_path + " carries no barge_count column");
    DesignMatrix data = matrix_from_table(table.rows);
    data = data.select_features(model.feature_names);

    const auto folds = stratified_kfold(data.targets, cfg.cv_k, cfg.seed);
    const auto report = cross_validate(data, model.family, model.hyper, folds);
    print_cv_report(report);
    if (!report_out.empty()) write_cv_report_json(report_out, report);
    return 0;
}

int run_predict(const PipelineConfig& cfg, const std::vector<KeyBinding>& bindings,
                const std::string& data_path, const std::string& model_path,
                const std::string& imputation_path, const std::string& out, bool round_output) {
    const auto model = load_model(model_path);
    auto table = load_feature_csv(data_path);
    if (!imputation_path.empty()) {
        const auto report = load_imputation_json(imputation_path);
        for (auto& row : table.rows) apply_imputation(row.features, report);
    }

    std::vector<std::vector<double>> rows;
    const std::vector<std::string>& names = model.feature_names;
    for (const auto& row : table.rows) {
        std::vector<double> values;
        for (const auto& name : names) {
            const auto feat = FeatureVector::from_name(name);
            if (!feat.has_value()) throw DomainError("model uses unknown feature " + name);
            const auto& v = row.features[*feat];
            if (!v.has_value()) {
                throw DomainError("missing value for " + name + " in trip " + row.vessel_id + "/" +
                                  std::to_string(row.trip_index) +
                                  "; supply --imputation with training medians");
            }
            values.push_back(*v);
        }
        rows.push_back(std::move(values));
    }
    auto predictions = predict(model, names, rows);
    if (round_output) {
        for (auto& p : predictions) p = std::nearbyint(p);
    }
    std::vector<PredictionRow> out_rows;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        out_rows.push_back(PredictionRow{table.rows[i].detection_id, table.rows[i].vessel_id,
                                         table.rows[i].trip_index, predictions[i]});
    }
    write_predictions_csv(out, out_rows, make_header("predict", bindings, cfg.no_timestamps));
    std::cerr << "predict: " << out_rows.size() << " rows\n";
    return 0;
}

int run_synth(const PipelineConfig& cfg, const std::vector<KeyBinding>& bindings,
              const std::string& out, const std::string& records_out,
              const std::string& labels_out, const std::string& trips_out) {
    const auto dataset = generate_labeled_dataset(cfg.synth, cfg.features);
    const auto header = make_header("synth", bindings, cfg.no_timestamps);

    std::vector<FeatureRow> rows;
    for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
        FeatureRow row = feature_row_from_trip(dataset.trips[i], dataset.samples[i].features);
        row.barge_count = dataset.samples[i].barge_count;
        row.detection_id = dataset.samples[i].detection_id;
        rows.push_back(std::move(row));
    }
    write_feature_csv(out, rows, true, header);

    if (!records_out.empty()) {
        RecordStore store;
        for (const auto& trip : dataset.trips) {
            store.push_back(VesselTrack{trip.vessel_id, trip.records});
        }
        write_store_csv(records_out, store, header);
    }
    if (!labels_out.empty()) {
        std::ofstream labels(labels_out);
        if (!labels) throw IoError("cannot write labels file: " + labels_out);
        for (const auto& line : header) labels << "# " << line << "\n";
        labels << "detection_id,vessel_id,barge_count\n";
        for (const auto& sample : dataset.samples) {
            labels << csv_escape(sample.detection_id) << ',' << csv_escape(sample.vessel_id) << ','
                   << sample.barge_count << '\n';
        }
    }
    if (!trips_out.empty()) write_trips_csv(trips_out, dataset.trips, header);
    std::cerr << "synth: " << dataset.samples.size() << " labeled samples\n";
    return 0;
}

int run_report(const PipelineConfig& cfg, const std::vector<KeyBinding>& bindings,
               const std::vector<std::string>& inputs, const std::string& out) {
    std::vector<RfecvResult> results;
    for (const auto& path : inputs) results.push_back(load_rfecv_json(path));
    const auto table = selection_frequency(results);
    std::cout << "feature selection frequency across " << results.size() << " model(s):\n";
    for (const auto& [feature, count] : table) {
        std::cout << "  " << feature << "  " << count << "\n";
    }
    if (!out.empty()) {
        write_selection_frequency_csv(out, table, make_header("report", bindings, cfg.no_timestamps));
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"AIS trajectory analytics and barge tow size estimation"};
    app.require_subcommand(1);

    PipelineConfig cfg;
    std::string config_path;

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Parse and clean raw AIS CSV into a record store");
    std::vector<KeyBinding> ingest_binds;
    std::string ingest_input, ingest_out, ingest_vessels, ingest_diag;
    AisCsvSchema schema;
    ingest->add_option("--input", ingest_input, "Raw AIS CSV")->required();
    ingest->add_option("--out", ingest_out, "Cleaned store CSV")->required();
    ingest->add_option("--vessel-ids", ingest_vessels, "Comma-separated vessel allow-list");
    ingest->add_option("--diagnostics-out", ingest_diag, "Skipped-row report CSV");
    ingest->add_option("--col-vessel-id", schema.vessel_id, "Column holding the vessel id");
    ingest->add_option("--col-timestamp", schema.timestamp, "Column holding the timestamp");
    ingest->add_option("--col-lat", schema.lat, "Latitude column");
    ingest->add_option("--col-lon", schema.lon, "Longitude column");
    ingest->add_option("--col-sog", schema.sog, "Speed-over-ground column");
    ingest->add_option("--col-cog", schema.cog, "Course-over-ground column");
    ingest->add_option("--col-heading", schema.heading, "Heading column");
    ingest->add_option("--col-length", schema.length, "Length column");
    ingest->add_option("--col-width", schema.width, "Width column");
    ingest->add_option("--col-draft", schema.draft, "Draft column");
    add_common(ingest, cfg, config_path, ingest_binds);

    // trips
    auto* trips_cmd = app.add_subcommand("trips", "Detect stops and segment trips");
    std::vector<KeyBinding> trips_binds;
    std::string trips_store, trips_out;
    trips_cmd->add_option("--store", trips_store, "Cleaned store CSV")->required();
    trips_cmd->add_option("--out", trips_out, "Trips CSV")->required();
    add_stop_options(trips_cmd, cfg, trips_binds);
    add_common(trips_cmd, cfg, config_path, trips_binds);

    // features
    auto* features_cmd = app.add_subcommand("features", "Compute the 39 trip features");
    std::vector<KeyBinding> features_binds;
    std::string features_store, features_out, features_labels, features_imp;
    features_cmd->add_option("--store", features_store, "Cleaned store CSV")->required();
    features_cmd->add_option("--out", features_out, "Feature CSV")->required();
    features_cmd->add_option("--labels", features_labels,
                             "Optional labels CSV (vessel_id,barge_count) for a labeled output");
    features_cmd->add_option("--imputation-out", features_imp,
                             "Imputation medians JSON (labeled output only)");
    add_stop_options(features_cmd, cfg, features_binds);
    add_feature_options(features_cmd, cfg, features_binds);
    add_common(features_cmd, cfg, config_path, features_binds);

    // match
    auto* match_cmd = app.add_subcommand("match", "Fuse detections with trajectories");
    std::vector<KeyBinding> match_binds;
    std::string match_store, match_dets, match_out, match_matches, match_cands, match_unlabeled,
        match_imp;
    match_cmd->add_option("--store", match_store, "Cleaned store CSV")->required();
    match_cmd->add_option("--detections", match_dets, "Detections GeoJSON")->required();
    match_cmd->add_option("--out", match_out, "Labeled dataset CSV")->required();
    match_cmd->add_option("--matches-out", match_matches, "Per-detection match results CSV");
    match_cmd->add_option("--candidates-out", match_cands, "All windowed candidates CSV");
    match_cmd->add_option("--unlabeled-out", match_unlabeled,
                          "Matched unlabeled detections, imputed, for prediction");
    match_cmd->add_option("--imputation-out", match_imp, "Imputation medians JSON");
    bind_option(match_cmd, match_binds, "--window-seconds", "fusion.window_seconds", cfg.window_seconds,
         "Temporal matching half-window (seconds)");
    add_stop_options(match_cmd, cfg, match_binds);
    add_feature_options(match_cmd, cfg, match_binds);
    add_common(match_cmd, cfg, config_path, match_binds);

    // train
    auto* train_cmd = app.add_subcommand("train", "Cross-validate and fit one model family");
    std::vector<KeyBinding> train_binds;
    std::string train_data, train_family, train_features, train_model_out, train_report;
    train_cmd->add_option("--data", train_data, "Labeled dataset CSV")->required();
    train_cmd->add_option("--model", train_family, "poisson|elasticnet|random_forest|adaboost_r2")
        ->required();
    train_cmd->add_option("--features", train_features, "Comma-separated feature subset");
    train_cmd->add_option("--model-out", train_model_out, "Fitted model JSON");
    train_cmd->add_option("--report-out", train_report, "CvReport JSON");
    bind_option(train_cmd, train_binds, "--k", "cv.k", cfg.cv_k, "Stratified fold count");
    bind_option(train_cmd, train_binds, "--seed", "seed", cfg.seed, "Random seed");
    add_model_options(train_cmd, cfg, train_binds);
    add_common(train_cmd, cfg, config_path, train_binds);

    // select
    auto* select_cmd = app.add_subcommand("select", "Recursive feature elimination with CV");
    std::vector<KeyBinding> select_binds;
    std::string select_data, select_family, select_features, select_out;
    select_cmd->add_option("--data", select_data, "Labeled dataset CSV")->required();
    select_cmd->add_option("--model", select_family, "Model family")->required();
    select_cmd->add_option("--features", select_features, "Starting feature subset");
    select_cmd->add_option("--out", select_out, "RfecvResult JSON");
    bind_option(select_cmd, select_binds, "--k", "cv.k", cfg.cv_k, "Stratified fold count");
    bind_option(select_cmd, select_binds, "--seed", "seed", cfg.seed, "Random seed");
    add_model_options(select_cmd, cfg, select_binds);
    add_common(select_cmd, cfg, config_path, select_binds);

    // evaluate
    auto* eval_cmd = app.add_subcommand("evaluate", "Cross-validate an existing model's recipe");
    std::vector<KeyBinding> eval_binds;
    std::string eval_data, eval_model, eval_report;
    eval_cmd->add_option("--data", eval_data, "Labeled dataset CSV")->required();
    eval_cmd->add_option("--model-file", eval_model, "Fitted model JSON")->required();
    eval_cmd->add_option("--report-out", eval_report, "CvReport JSON");
    bind_option(eval_cmd, eval_binds, "--k", "cv.k", cfg.cv_k, "Stratified fold count");
    bind_option(eval_cmd, eval_binds, "--seed", "seed", cfg.seed, "Random seed");
    add_common(eval_cmd, cfg, config_path, eval_binds);

    // predict
    auto* predict_cmd = app.add_subcommand("predict", "Apply a fitted model to feature rows");
    std::vector<KeyBinding> predict_binds;
    std::string predict_data, predict_model, predict_imp, predict_out;
    bool predict_round = false;
    predict_cmd->add_option("--data", predict_data, "Feature CSV")->required();
    predict_cmd->add_option("--model-file", predict_model, "Fitted model JSON")->required();
    predict_cmd->add_option("--imputation", predict_imp, "Training-median JSON for missing values");
    predict_cmd->add_option("--out", predict_out, "Predictions CSV")->required();
    predict_cmd->add_flag("--round", predict_round, "Round predictions to whole barges");
    add_common(predict_cmd, cfg, config_path, predict_binds);

    // synth
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic labeled dataset");
    std::vector<KeyBinding> synth_binds;
    std::string synth_out, synth_records, synth_labels, synth_trips;
    synth_cmd->add_option("--out", synth_out, "Labeled dataset CSV")->required();
    synth_cmd->add_option("--records-out", synth_records, "AIS-style record store CSV");
    synth_cmd->add_option("--labels-out", synth_labels, "Labels CSV (detection_id,vessel_id,count)");
    synth_cmd->add_option("--trips-out", synth_trips, "Trips CSV");
    bind_option(synth_cmd, synth_binds, "--n", "synth.n_samples", cfg.synth.n_samples, "Sample count");
    bind_option(synth_cmd, synth_binds, "--count-min", "synth.count_min", cfg.synth.count_min,
         "Smallest barge count");
    bind_option(synth_cmd, synth_binds, "--count-max", "synth.count_max", cfg.synth.count_max,
         "Largest barge count");
    bind_option(synth_cmd, synth_binds, "--base-speed-kn", "synth.base_speed_kn", cfg.synth.base_speed_kn,
         "Unladen cruise speed");
    bind_option(synth_cmd, synth_binds, "--course-noise", "synth.course_noise_scale",
         cfg.synth.course_noise_scale, "Course noise stddev at zero barges (deg)");
    bind_option(synth_cmd, synth_binds, "--speed-noise", "synth.speed_noise_scale",
         cfg.synth.speed_noise_scale, "Speed CV at zero barges");
    bind_option(synth_cmd, synth_binds, "--ping-interval-s", "synth.ping_interval_s",
         cfg.synth.ping_interval_s, "Seconds between pings");
    bind_option(synth_cmd, synth_binds, "--duration-min-hrs", "synth.duration_min_hrs",
         cfg.synth.trip_duration_min_hrs, "Shortest trip (hours)");
    bind_option(synth_cmd, synth_binds, "--duration-max-hrs", "synth.duration_max_hrs",
         cfg.synth.trip_duration_max_hrs, "Longest trip (hours)");
    bool synth_uniform = false;
    synth_cmd->add_flag("--uniform-counts", synth_uniform, "Disable the small-tow skew");
    bind_option(synth_cmd, synth_binds, "--seed", "seed", cfg.synth.seed, "Random seed");
    add_feature_options(synth_cmd, cfg, synth_binds);
    add_common(synth_cmd, cfg, config_path, synth_binds);

    // report
    auto* report_cmd = app.add_subcommand("report", "Selection-frequency table from RFECV results");
    std::vector<KeyBinding> report_binds;
    std::vector<std::string> report_inputs;
    std::string report_out;
    report_cmd->add_option("--inputs", report_inputs, "RfecvResult JSON files")
        ->required()
        ->delimiter(',');
    report_cmd->add_option("--out", report_out, "Frequency table CSV");
    add_common(report_cmd, cfg, config_path, report_binds);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (ingest->parsed()) {
            apply_config_file(config_path, ingest_binds);
            return run_ingest(cfg, ingest_binds, ingest_input, ingest_out, schema, ingest_vessels,
                              ingest_diag);
        }
        if (trips_cmd->parsed()) {
            apply_config_file(config_path, trips_binds);
            return run_trips(cfg, trips_binds, trips_store, trips_out);
        }
        if (features_cmd->parsed()) {
            apply_config_file(config_path, features_binds);
            return run_features(cfg, features_binds, features_store, features_out, features_labels,
                                features_imp);
        }
        if (match_cmd->parsed()) {
            apply_config_file(config_path, match_binds);
            return run_match(cfg, match_binds, match_store, match_dets, match_out, match_matches,
                             match_cands, match_unlabeled, match_imp);
        }
        if (train_cmd->parsed()) {
            apply_config_file(config_path, train_binds);
            return run_train(cfg, train_data, train_family, train_features, train_model_out,
                             train_report);
        }
        if (select_cmd->parsed()) {
            apply_config_file(config_path, select_binds);
            return run_select(cfg, select_data, select_family, select_features, select_out);
        }
        if (eval_cmd->parsed()) {
            apply_config_file(config_path, eval_binds);
            return run_evaluate(cfg, eval_data, eval_model, eval_report);
        }
        if (predict_cmd->parsed()) {
            apply_config_file(config_path, predict_binds);
            return run_predict(cfg, predict_binds, predict_data, predict_model, predict_imp,
                               predict_out, predict_round);
        }
        if (synth_cmd->parsed()) {
            apply_config_file(config_path, synth_binds);
            cfg.synth.skew_counts = !synth_uniform;
            return run_synth(cfg, synth_binds, synth_out, synth_records, synth_labels, synth_trips);
        }
        if (report_cmd->parsed()) {
            apply_config_file(config_path, report_binds);
            return run_report(cfg, report_binds, report_inputs, report_out);
        }
        std::cerr << "error: no subcommand\n";
        return 2;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const ContractError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
