#pragma once

#include <doctest.h>

#include <cmath>

#include "towcast/features.hpp"

namespace testutil {

/// Asserts every FeatureVector type invariant that is directly checkable.
inline void check_feature_invariants(const towcast::FeatureVector& v,
                                     const towcast::FeatureConfig& cfg) {
    using towcast::Feat;
    auto val = [&](Feat f) { return v[f]; };

    REQUIRE(val(Feat::SOG_MIN).has_value());
    CHECK(*val(Feat::SOG_MIN) <= *val(Feat::SOG_MED));
    CHECK(*val(Feat::SOG_MED) <= *val(Feat::SOG_MAX));
    CHECK(*val(Feat::SOG_RANGE) ==
          doctest::Approx(*val(Feat::SOG_MAX) - *val(Feat::SOG_MIN)).epsilon(1e-12));

    for (Feat f : {Feat::SOG_STD, Feat::SOG_IQR, Feat::SOG_MAD, Feat::ACC_STD, Feat::TRN_STD,
                   Feat::COG_STD}) {
        if (val(f).has_value()) CHECK(*val(f) >= 0.0);
    }
    if (val(Feat::SOG_ENT).has_value()) {
        CHECK(*val(Feat::SOG_ENT) >= 0.0);
        CHECK(*val(Feat::SOG_ENT) <= std::log2(double(cfg.entropy_bins_speed)) + 1e-12);
    }
    if (val(Feat::COG_ENT).has_value()) {
        CHECK(*val(Feat::COG_ENT) >= 0.0);
        CHECK(*val(Feat::COG_ENT) <= std::log2(double(cfg.entropy_bins_course)) + 1e-12);
    }
    for (Feat f : {Feat::SOG_PCT_LOW, Feat::SOG_PCT_HIGH, Feat::SOG_PCT_OPT}) {
        CHECK(*val(f) >= 0.0);
        CHECK(*val(f) <= 100.0);
    }
    if (val(Feat::SINO_IDX).has_value()) CHECK(*val(Feat::SINO_IDX) >= 1.0 - 1e-6);
    if (val(Feat::AREA).has_value()) {
        CHECK(*val(Feat::AREA) ==
              doctest::Approx(*val(Feat::LEN) * *val(Feat::WID)).epsilon(1e-12));
    }
    if (val(Feat::DFT_SQ).has_value()) {
        CHECK(*val(Feat::DFT_SQ) == doctest::Approx(*val(Feat::DFT) * *val(Feat::DFT)).epsilon(1e-12));
    }
    if (val(Feat::SOG_MEAN_SQ).has_value()) {
        CHECK(*val(Feat::SOG_MEAN_SQ) ==
              doctest::Approx(*val(Feat::SOG_MEAN) * *val(Feat::SOG_MEAN)).epsilon(1e-12));
    }
}

}  // namespace testutil
