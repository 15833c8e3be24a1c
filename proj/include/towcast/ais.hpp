#pragma once

#include <optional>
#include <string>
#include <vector>

#include "towcast/timeutil.hpp"

namespace towcast {

/// One validated AIS position report.
///
/// heading is nullopt when the transponder sent the "not available" code
/// (raw 511) or the field was empty; the sentinel is never stored as a
/// numeric heading. Statics (length/width/draft) are nullopt when missing.
struct AisRecord {
    std::string vessel_id;  // MMSI
    UnixSeconds timestamp = 0;
    double lat = 0.0;   // [-90, 90]
    double lon = 0.0;   // [-180, 180]
    double sog = 0.0;   // knots, >= 0
    double cog = 0.0;   // degrees, [0, 360)
    std::optional<double> heading;   // degrees, [0, 360)
    std::optional<double> length_m;  // > 0
    std::optional<double> width_m;   // > 0
    std::optional<double> draft_m;   // > 0
};

/// Maps logical fields to CSV column names. Defaults follow the
/// MarineCadastre export layout.
struct AisCsvSchema {
    std::string vessel_id = "MMSI";
    std::string timestamp = "BaseDateTime";
    std::string lat = "LAT";
    std::string lon = "LON";
    std::string sog = "SOG";
    std::string cog = "COG";
    std::string heading = "Heading";
    std::string length = "Length";
    std::string width = "Width";
    std::string draft = "Draft";
};

struct ParseDiagnostic {
    long line = 0;
    std::string reason;
};

struct ParseResult {
    std::vector<AisRecord> records;
    std::vector<ParseDiagnostic> diagnostics;
};

/// All records of one vessel, chronologically ordered.
struct VesselTrack {
    std::string vessel_id;
    std::vector<AisRecord> records;
};

/// Cleaned per-vessel record store, ordered by vessel_id.
using RecordStore = std::vector<VesselTrack>;

/// Parses AIS position reports from a CSV file. Well-formed rows become
/// records; malformed rows are skipped and reported with their line number.
/// Rows missing SOG or COG are dropped (kinematic features need them); rows
/// missing only statics are kept with missing markers.
///
/// Throws IoError if the file cannot be read and SchemaError when a
/// required column is absent from the header.
ParseResult parse_ais_csv(const std::string& path, const AisCsvSchema& schema = {});

/// Validates a single already-decoded record against the field ranges.
/// Returns the failure reason, or nullopt when valid.
std::optional<std::string> validate_record(const AisRecord& rec);

/// Groups records by vessel, sorts each group by timestamp (stable for
/// equal non-key fields), and collapses exact (vessel_id, timestamp)
/// duplicates to the first occurrence. Idempotent.
RecordStore clean_records(std::vector<AisRecord> records);

}  // namespace towcast
