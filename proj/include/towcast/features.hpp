#pragma once

#include <array>
#include <optional>
#include <string_view>

#include "towcast/trajectory.hpp"

namespace towcast {

/// Tunables for the trip-feature computation. Speed thresholds are
/// conventions, not measured constants, and every output artifact echoes
/// them in its header.
struct FeatureConfig {
    int entropy_bins_speed = 10;   // equal-width bins over the trip's own speed span
    int entropy_bins_course = 36;  // fixed 10-degree world bins over [0, 360)
    double low_speed_kn = 2.0;     // SOG_PCT_LOW counts s < low
    double high_speed_kn = 8.0;    // SOG_PCT_HIGH counts s > high
    double optimal_low_kn = 4.0;   // SOG_PCT_OPT counts low <= s <= high
    double optimal_high_kn = 8.0;
    double min_direct_km = 0.05;   // SINO_IDX is missing below this displacement
};

/// Indices of the 39 trip features, in table order.
enum class Feat : int {
    LEN, WID, DFT,
    SOG_MEAN, SOG_MED, SOG_STD, SOG_IQR, SOG_MAD, SOG_MAX, SOG_MIN, SOG_RANGE, SOG_CV,
    SOG_PCT_LOW, SOG_PCT_HIGH, SOG_PCT_OPT, SOG_ENT,
    ACC_POS_MEAN, ACC_NEG_MEAN, ACC_STD, ACC_MIN, ACC_ZC,
    COG_STD, COG_ENT, TRN_STD, COG_TOTAL_CHANGE, COG_HDG_DIFF_MEAN, COG_HDG_DIFF_STD,
    DUR_HRS, DIST_KM, DIST_HAVERSINE_KM, SINO_IDX,
    AREA, DLT_RATIO, DUR_SOGCV, SOG_LEN, SOGSTD_DFT, SOG_WID, SOG_MEAN_SQ, DFT_SQ,
};

inline constexpr int kFeatureCount = 39;

/// The 39 trip statistics. A value that cannot be computed is an explicit
/// missing marker, never a silent zero.
struct FeatureVector {
    std::array<std::optional<double>, kFeatureCount> values;

    std::optional<double>& operator[](Feat f) { return values[static_cast<int>(f)]; }
    const std::optional<double>& operator[](Feat f) const { return values[static_cast<int>(f)]; }

    /// Acronym column names, table order.
    static const std::array<std::string_view, kFeatureCount>& names();
    static std::optional<Feat> from_name(std::string_view name);
};

/// Speed family: SOG_MEAN .. SOG_ENT (13 values). Percent-time metrics are
/// time-weighted: each record carries its forward gap, the last record the
/// mean gap. Entropy bins span [SOG_MIN, SOG_MAX]; a zero-width span has
/// entropy 0.
void speed_features(const Trip& trip, const FeatureConfig& cfg, FeatureVector& out);

/// Acceleration family: ACC_POS_MEAN .. ACC_ZC (5 values), knots/minute.
/// ACC_STD and ACC_ZC need n >= 3 and are missing for 2-point trips.
void acceleration_features(const Trip& trip, FeatureVector& out);

/// Course family: COG_STD .. COG_HDG_DIFF_STD (6 values). COG_STD works on
/// the unwrapped series; turn rates and total change use wrap-aware
/// differences. COG-HDG offsets need at least 2 heading-bearing records.
void course_features(const Trip& trip, const FeatureConfig& cfg, FeatureVector& out);

/// DUR_HRS, DIST_KM, DIST_HAVERSINE_KM, SINO_IDX. Path length integrates
/// the trapezoid of speeds over actual gaps (knots x hours -> km at 1.852).
void trip_geometry_features(const Trip& trip, const FeatureConfig& cfg, FeatureVector& out);

/// LEN .. DFT_SQ (11 values). Requires the speed and geometry families to
/// be filled in first; any missing factor makes the product missing.
void static_and_interaction_features(const Trip& trip, FeatureVector& out);

/// All 39 features for one trip. Throws DomainError when the trip has
/// fewer than 2 records or non-increasing timestamps.
FeatureVector extract_all(const Trip& trip, const FeatureConfig& cfg = {});

/// Conversion used for DIST_KM: nautical miles (knot-hours) to kilometers.
inline constexpr double kKmPerNauticalMile = 1.852;

}  // namespace towcast
