#include "towcast/features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "towcast/errors.hpp"

namespace towcast {
namespace {

double mean_of(std::span<const double> v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Sample standard deviation (n-1 denominator); nullopt below 2 values.
std::optional<double> sample_std(std::span<const double> v) {
    if (v.size() < 2) return std::nullopt;
    const double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double median_sorted(std::span<const double> sorted) {
    const std::size_t n = sorted.size();
    if (n % 2 == 1) return sorted[n / 2];
    return 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

// Linear-interpolation quantile (the common "R-7" rule) on sorted data.
double quantile_sorted(std::span<const double> sorted, double p) {
    const std::size_t n = sorted.size();
    if (n == 1) return sorted[0];
    const double h = static_cast<double>(n - 1) * p;
    const auto lo = static_cast<std::size_t>(h);
    if (lo + 1 >= n) return sorted[n - 1];
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

// Shannon entropy in bits from bin counts; empty bins contribute nothing.
double entropy_bits(std::span<const int> counts, int total) {
    double h = 0.0;
    for (int c : counts) {
        if (c <= 0) continue;
        const double p = static_cast<double>(c) / static_cast<double>(total);
        h -= p * std::log2(p);
    }
    return std::max(h, 0.0);
}

std::vector<double> speed_series(const Trip& trip) {
    std::vector<double> s;
    s.reserve(trip.records.size());
    for (const auto& rec : trip.records) s.push_back(rec.sog);
    return s;
}

// Per-step gaps in minutes; throws if any is non-positive.
std::vector<double> gaps_minutes(const Trip& trip) {
    std::vector<double> gaps;
    gaps.reserve(trip.records.size() - 1);
    for (std::size_t i = 1; i < trip.records.size(); ++i) {
        const double dt =
            static_cast<double>(trip.records[i].timestamp - trip.records[i - 1].timestamp) / 60.0;
        if (dt <= 0.0) throw DomainError("trip has non-increasing timestamps");
        gaps.push_back(dt);
    }
    return gaps;
}

void require_trip(const Trip& trip) {
    if (trip.records.size() < 2) throw DomainError("trip needs at least 2 records");
}

std::optional<double> product(const std::optional<double>& a, const std::optional<double>& b) {
    if (!a.has_value() || !b.has_value()) return std::nullopt;
    return *a * *b;
}

}  // namespace

const std::array<std::string_view, kFeatureCount>& FeatureVector::names() {
    static const std::array<std::string_view, kFeatureCount> kNames = {
        "LEN", "WID", "DFT",
        "SOG_MEAN", "SOG_MED", "SOG_STD", "SOG_IQR", "SOG_MAD", "SOG_MAX", "SOG_MIN",
        "SOG_RANGE", "SOG_CV", "SOG_PCT_LOW", "SOG_PCT_HIGH", "SOG_PCT_OPT", "SOG_ENT",
        "ACC_POS_MEAN", "ACC_NEG_MEAN", "ACC_STD", "ACC_MIN", "ACC_ZC",
        "COG_STD", "COG_ENT", "TRN_STD", "COG_TOTAL_CHANGE", "COG_HDG_DIFF_MEAN",
        "COG_HDG_DIFF_STD",
        "DUR_HRS", "DIST_KM", "DIST_HAVERSINE_KM", "SINO_IDX",
        "AREA", "DLT_RATIO", "DUR_SOGCV", "SOG_LEN", "SOGSTD_DFT", "SOG_WID",
        "SOG_MEAN_SQ", "DFT_SQ",
    };
    return kNames;
}

std::optional<Feat> FeatureVector::from_name(std::string_view name) {
    const auto& all = names();
    for (int i = 0; i < kFeatureCount; ++i) {
        if (all[static_cast<std::size_t>(i)] == name) return static_cast<Feat>(i);
    }
    return std::nullopt;
}

void speed_features(const Trip& trip, const FeatureConfig& cfg, FeatureVector& out) {
    require_trip(trip);
    const auto s = speed_series(trip);
    const auto gaps = gaps_minutes(trip);
    const std::size_t n = s.size();

    const double mean = mean_of(s);
    auto sorted = s;
    std::sort(sorted.begin(), sorted.end());
    const double med = median_sorted(sorted);
    const double q1 = quantile_sorted(sorted, 0.25);
    const double q3 = quantile_sorted(sorted, 0.75);
    std::vector<double> abs_dev(n);
    for (std::size_t i = 0; i < n; ++i) abs_dev[i] = std::abs(s[i] - med);
    std::sort(abs_dev.begin(), abs_dev.end());
    const double mad = median_sorted(abs_dev);
    const double s_min = sorted.front();
    const double s_max = sorted.back();
    const auto stddev = sample_std(s);

    out[Feat::SOG_MEAN] = mean;
    out[Feat::SOG_MED] = med;
    out[Feat::SOG_STD] = stddev;
    out[Feat::SOG_IQR] = q3 - q1;
    out[Feat::SOG_MAD] = mad;
    out[Feat::SOG_MAX] = s_max;
    out[Feat::SOG_MIN] = s_min;
    out[Feat::SOG_RANGE] = s_max - s_min;
    if (mean != 0.0 && stddev.has_value()) {
        out[Feat::SOG_CV] = *stddev / mean;
    }

    // Percent-time metrics: each record weighted by its forward gap, the
    // last record by the mean gap, so irregular sampling does not bias the
    // duration shares.
    const double mean_gap = std::accumulate(gaps.begin(), gaps.end(), 0.0) / static_cast<double>(gaps.size());
    double total_w = 0.0, w_low = 0.0, w_high = 0.0, w_opt = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = (i + 1 < n) ? gaps[i] : mean_gap;
        total_w += w;
        if (s[i] < cfg.low_speed_kn) w_low += w;
        if (s[i] > cfg.high_speed_kn) w_high += w;
        if (s[i] >= cfg.optimal_low_kn && s[i] <= cfg.optimal_high_kn) w_opt += w;
    }
    out[Feat::SOG_PCT_LOW] = 100.0 * w_low / total_w;
    out[Feat::SOG_PCT_HIGH] = 100.0 * w_high / total_w;
    out[Feat::SOG_PCT_OPT] = 100.0 * w_opt / total_w;

    if (s_max == s_min) {
        out[Feat::SOG_ENT] = 0.0;
    } else {
        std::vector<int> counts(static_cast<std::size_t>(cfg.entropy_bins_speed), 0);
        const double width = (s_max - s_min) / static_cast<double>(cfg.entropy_bins_speed);
        for (double x : s) {
            auto k = static_cast<int>((x - s_min) / width);
            k = std::clamp(k, 0, cfg.entropy_bins_speed - 1);
            ++counts[static_cast<std::size_t>(k)];
        }
        out[Feat::SOG_ENT] = entropy_bits(counts, static_cast<int>(n));
    }
}

void acceleration_features(const Trip& trip, FeatureVector& out) {
    require_trip(trip);
    const auto s = speed_series(trip);
    const auto gaps = gaps_minutes(trip);

    std::vector<double> acc(gaps.size());
    for (std::size_t i = 0; i < gaps.size(); ++i) {
        acc[i] = (s[i + 1] - s[i]) / gaps[i];  // knots per minute
    }

    std::vector<double> pos, neg;
    for (double a : acc) {
        if (a > 0.0) pos.push_back(a);
        if (a < 0.0) neg.push_back(a);
    }
    if (!pos.empty()) out[Feat::ACC_POS_MEAN] = mean_of(pos);
    if (!neg.empty()) out[Feat::ACC_NEG_MEAN] = mean_of(neg);
    out[Feat::ACC_STD] = sample_std(acc);
    out[Feat::ACC_MIN] = *std::min_element(acc.begin(), acc.end());

    if (acc.size() >= 2) {
        // Sign reversals, skipping zero accelerations.
        int reversals = 0;
        int prev_sign = 0;
        for (double a : acc) {
            const int sg = (a > 0.0) - (a < 0.0);
            if (sg == 0) continue;
            if (prev_sign != 0 && sg != prev_sign) ++reversals;
            prev_sign = sg;
        }
        out[Feat::ACC_ZC] = static_cast<double>(reversals);
    }
}

void course_features(const Trip& trip, const FeatureConfig& cfg, FeatureVector& out) {
    require_trip(trip);
    const auto gaps = gaps_minutes(trip);
    std::vector<double> cog;
    cog.reserve(trip.records.size());
    for (const auto& rec : trip.records) cog.push_back(rec.cog);

    const auto unwrapped = unwrap_angles(cog);
    out[Feat::COG_STD] = sample_std(unwrapped);

    std::vector<int> counts(static_cast<std::size_t>(cfg.entropy_bins_course), 0);
    const double width = 360.0 / static_cast<double>(cfg.entropy_bins_course);
    for (double c : cog) {
        auto k = static_cast<int>(c / width);
        k = std::clamp(k, 0, cfg.entropy_bins_course - 1);
        ++counts[static_cast<std::size_t>(k)];
    }
    out[Feat::COG_ENT] = entropy_bits(counts, static_cast<int>(cog.size()));

    std::vector<double> abs_turn_rate(gaps.size());
    double total_change = 0.0;
    for (std::size_t i = 0; i < gaps.size(); ++i) {
        const double d = signed_angle_diff(cog[i], cog[i + 1]);
        abs_turn_rate[i] = std::abs(d) / gaps[i];  // degrees per minute
        total_change += std::abs(d);
    }
    out[Feat::TRN_STD] = sample_std(abs_turn_rate);
    out[Feat::COG_TOTAL_CHANGE] = total_change;

    std::vector<double> offsets;
    for (const auto& rec : trip.records) {
        if (rec.heading.has_value()) {
            offsets.push_back(signed_angle_diff(*rec.heading, rec.cog));
        }
    }
    if (offsets.size() >= 2) {
        out[Feat::COG_HDG_DIFF_MEAN] = mean_of(offsets);
        out[Feat::COG_HDG_DIFF_STD] = sample_std(offsets);
    }
}

void trip_geometry_features(const Trip& trip, const FeatureConfig& cfg, FeatureVector& out) {
    require_trip(trip);
    const auto s = speed_series(trip);
    const auto gaps = gaps_minutes(trip);

    const double duration_hrs =
        static_cast<double>(trip.records.back().timestamp - trip.records.front().timestamp) / 3600.0;
    out[Feat::DUR_HRS] = duration_hrs;

    double dist_km = 0.0;
    for (std::size_t i = 0; i < gaps.size(); ++i) {
        dist_km += 0.5 * (s[i] + s[i + 1]) * (gaps[i] / 60.0) * kKmPerNauticalMile;
    }
    out[Feat::DIST_KM] = dist_km;

    const auto& first = trip.records.front();
    const auto& last = trip.records.back();
    const double direct =
        haversine_km(GeoPoint{first.lat, first.lon}, GeoPoint{last.lat, last.lon});
    out[Feat::DIST_HAVERSINE_KM] = direct;
    if (direct >= cfg.min_direct_km) {
        out[Feat::SINO_IDX] = dist_km / direct;
    }
}

void static_and_interaction_features(const Trip& trip, FeatureVector& out) {
    out[Feat::LEN] = trip.length_m;
    out[Feat::WID] = trip.width_m;
    out[Feat::DFT] = trip.draft_m;
    out[Feat::AREA] = product(trip.length_m, trip.width_m);
    if (trip.draft_m.has_value() && trip.length_m.has_value() && *trip.length_m != 0.0) {
        out[Feat::DLT_RATIO] = *trip.draft_m / *trip.length_m;
    }
    out[Feat::DUR_SOGCV] = product(out[Feat::DUR_HRS], out[Feat::SOG_CV]);
    out[Feat::SOG_LEN] = product(out[Feat::SOG_MEAN], trip.length_m);
    out[Feat::SOGSTD_DFT] = product(out[Feat::SOG_STD], trip.draft_m);
    out[Feat::SOG_WID] = product(out[Feat::SOG_MEAN], trip.width_m);
    out[Feat::SOG_MEAN_SQ] = product(out[Feat::SOG_MEAN], out[Feat::SOG_MEAN]);
    out[Feat::DFT_SQ] = product(trip.draft_m, trip.draft_m);
}

FeatureVector extract_all(const Trip& trip, const FeatureConfig& cfg) {
    FeatureVector out;
    speed_features(trip, cfg, out);
    acceleration_features(trip, out);
    course_features(trip, cfg, out);
    trip_geometry_features(trip, cfg, out);
    static_and_interaction_features(trip, out);
    return out;
}

}  // namespace towcast
