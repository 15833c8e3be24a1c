#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "towcast/ais.hpp"
#include "towcast/errors.hpp"
#include "towcast/timeutil.hpp"

using namespace towcast;

namespace {

std::string write_temp_csv(const std::string& name, const std::string& content) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream out(path);
    out << content;
    return path.string();
}

const std::string kHeader =
    "MMSI,BaseDateTime,LAT,LON,SOG,COG,Heading,VesselName,Length,Width,Draft\n";

}  // namespace

TEST_CASE("parse_ais_csv: well-formed rows parse with no diagnostics") {
    const auto path = write_temp_csv(
        "ais_ok.csv",
        kHeader +
            "367000001,2024-02-01T00:00:00,32.1,-91.0,5.2,180.0,181,\"TUG, ONE\",30,10,2.5\n"
            "367000001,2024-02-01T00:01:00,32.11,-91.0,5.3,181.0,182,TUG ONE,30,10,2.5\n"
            "367000002,2024-02-01T00:00:30,32.2,-91.1,0.4,10.0,511,OTHER,25,9,2.0\n");
    const auto result = parse_ais_csv(path);
    REQUIRE(result.records.size() == 3);
    CHECK(result.diagnostics.empty());
    CHECK(result.records[0].vessel_id == "367000001");
    CHECK(result.records[0].heading == 181.0);
    CHECK(result.records[0].length_m == 30.0);
    CHECK(result.records[2].sog == 0.4);
}

TEST_CASE("parse_ais_csv: heading sentinel 511 becomes unavailable") {
    const auto path = write_temp_csv(
        "ais_hdg.csv", kHeader + "367000001,2024-02-01T00:00:00,32.1,-91.0,5.2,180.0,511,X,30,10,2\n");
    const auto result = parse_ais_csv(path);
    REQUIRE(result.records.size() == 1);
    CHECK_FALSE(result.records[0].heading.has_value());
}

TEST_CASE("parse_ais_csv: out-of-range and malformed rows are skipped with reasons") {
    const auto path = write_temp_csv(
        "ais_bad.csv",
        kHeader +
            "367000001,2024-02-01T00:00:00,95.0,-91.0,5.2,180.0,181,X,30,10,2\n"     // lat
            "367000001,2024-02-01T00:01:00,32.0,-191.0,5.2,180.0,181,X,30,10,2\n"    // lon
            "367000001,2024-02-01T00:02:00,32.0,-91.0,-1.0,180.0,181,X,30,10,2\n"    // sog
            "367000001,2024-02-01T00:03:00,32.0,-91.0,5.0,360.0,181,X,30,10,2\n"     // cog
            "367000001,not-a-time,32.0,-91.0,5.0,180.0,181,X,30,10,2\n"              // timestamp
            "367000001,2024-02-01T00:05:00,32.0,-91.0,,180.0,181,X,30,10,2\n"        // missing sog
            "367000001,2024-02-01T00:06:00,32.0,-91.0,5.0,180.0,181,X,30,10,2\n");   // good
    const auto result = parse_ais_csv(path);
    CHECK(result.records.size() == 1);
    REQUIRE(result.diagnostics.size() == 6);
    CHECK(result.diagnostics[0].reason == "lat out of range");
    CHECK(result.diagnostics[0].line == 2);
    CHECK(result.diagnostics[4].reason == "bad timestamp");
    CHECK(result.diagnostics[5].reason == "missing sog");
}

TEST_CASE("parse_ais_csv: rows missing only statics are kept") {
    const auto path = write_temp_csv(
        "ais_statics.csv",
        kHeader + "367000001,2024-02-01T00:00:00,32.1,-91.0,5.2,180.0,181,X,,,\n");
    const auto result = parse_ais_csv(path);
    REQUIRE(result.records.size() == 1);
    CHECK_FALSE(result.records[0].length_m.has_value());
    CHECK_FALSE(result.records[0].draft_m.has_value());
}

TEST_CASE("parse_ais_csv: missing required column raises SchemaError naming it") {
    const auto path = write_temp_csv("ais_nocol.csv",
                                     "MMSI,BaseDateTime,LAT,LON,COG,Heading\n"
                                     "367000001,2024-02-01T00:00:00,32.1,-91.0,180.0,181\n");
    CHECK_THROWS_WITH_AS(parse_ais_csv(path), doctest::Contains("SOG"), SchemaError);
}

TEST_CASE("parse_ais_csv: unreadable file raises IoError") {
    CHECK_THROWS_AS(parse_ais_csv("/nonexistent/path/ais.csv"), IoError);
}

TEST_CASE("parse_ais_csv: custom schema mapping") {
    const auto path = write_temp_csv("ais_schema.csv",
                                     "id,when,y,x,speed,course\n"
                                     "V1,2024-02-01T00:00:00,32.0,-91.0,4.0,90.0\n");
    AisCsvSchema schema;
    schema.vessel_id = "id";
    schema.timestamp = "when";
    schema.lat = "y";
    schema.lon = "x";
    schema.sog = "speed";
    schema.cog = "course";
    const auto result = parse_ais_csv(path, schema);
    REQUIRE(result.records.size() == 1);
    CHECK(result.records[0].cog == 90.0);
}

TEST_CASE("clean_records: groups, sorts, dedups") {
    std::vector<AisRecord> records;
    auto rec = [](const char* vessel, UnixSeconds t, double sog) {
        AisRecord r;
        r.vessel_id = vessel;
        r.timestamp = t;
        r.lat = 32.0;
        r.lon = -91.0;
        r.sog = sog;
        r.cog = 0.0;
        return r;
    };
    records.push_back(rec("B", 100, 1.0));
    records.push_back(rec("A", 200, 2.0));
    records.push_back(rec("B", 50, 3.0));
    records.push_back(rec("A", 100, 4.0));
    records.push_back(rec("A", 100, 9.0));  // duplicate timestamp, first kept

    const auto store = clean_records(records);
    REQUIRE(store.size() == 2);
    CHECK(store[0].vessel_id == "A");
    REQUIRE(store[0].records.size() == 2);
    CHECK(store[0].records[0].timestamp == 100);
    CHECK(store[0].records[0].sog == 4.0);  // stability: first occurrence wins
    CHECK(store[0].records[1].timestamp == 200);
    CHECK(store[1].vessel_id == "B");
    CHECK(store[1].records[0].timestamp == 50);

    // Output never exceeds input.
    std::size_t total = 0;
    for (const auto& track : store) total += track.records.size();
    CHECK(total == 4);
}

TEST_CASE("clean_records: idempotent and identity on sorted input") {
    std::vector<AisRecord> records;
    for (int i = 0; i < 5; ++i) {
        AisRecord r;
        r.vessel_id = "V";
        r.timestamp = 100 + i * 60;
        r.lat = 32.0;
        r.lon = -91.0;
        r.sog = 5.0;
        r.cog = 10.0 * i;
        records.push_back(r);
    }
    const auto once = clean_records(records);
    REQUIRE(once.size() == 1);
    CHECK(once[0].records.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(once[0].records[i].timestamp == records[i].timestamp);
        CHECK(once[0].records[i].cog == records[i].cog);
    }
    const auto twice = clean_records(once[0].records);
    REQUIRE(twice.size() == 1);
    REQUIRE(twice[0].records.size() == once[0].records.size());
    for (std::size_t i = 0; i < twice[0].records.size(); ++i) {
        CHECK(twice[0].records[i].timestamp == once[0].records[i].timestamp);
    }
}

TEST_CASE("clean_records: empty input gives empty output") {
    CHECK(clean_records({}).empty());
}

TEST_CASE("timestamps: parse and format round trip") {
    const auto t = parse_timestamp("2024-02-29T23:59:59");
    REQUIRE(t.has_value());
    CHECK(format_timestamp(*t) == "2024-02-29T23:59:59");
    CHECK(parse_timestamp("2024-02-01 06:30:00") == parse_timestamp("2024-02-01T06:30:00"));
    CHECK_FALSE(parse_timestamp("2023-02-29T00:00:00").has_value());  // not a leap year
    CHECK_FALSE(parse_timestamp("2024-13-01T00:00:00").has_value());
    CHECK_FALSE(parse_timestamp("2024-01-01T24:00:00").has_value());
    CHECK_FALSE(parse_timestamp("garbage").has_value());
    CHECK(format_timestamp(0) == "1970-01-01T00:00:00");
}
