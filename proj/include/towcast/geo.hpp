#pragma once

#include <span>
#include <vector>

namespace towcast {

/// Mean Earth radius, kilometers. Fixed so distance tests are bit-stable.
inline constexpr double kEarthRadiusKm = 6371.0088;

struct GeoPoint {
    double lat = 0.0;  // degrees, [-90, 90]
    double lon = 0.0;  // degrees, [-180, 180]
};

/// Closed, non-self-intersecting ring in lon/lat. Planar geometry; the
/// study-area footprints are far too small for spherical polygon math to
/// matter.
class GeoPolygon {
public:
    /// ring must be closed (first == last) with >= 4 vertices including the
    /// closing one. Throws DomainError on open, short, or self-intersecting
    /// rings.
    explicit GeoPolygon(std::vector<GeoPoint> ring);

    const std::vector<GeoPoint>& ring() const { return ring_; }

    /// Arithmetic mean of the distinct ring vertices.
    GeoPoint centroid() const;

    double min_lat() const { return min_lat_; }
    double max_lat() const { return max_lat_; }
    double min_lon() const { return min_lon_; }
    double max_lon() const { return max_lon_; }

private:
    std::vector<GeoPoint> ring_;
    double min_lat_, max_lat_, min_lon_, max_lon_;
};

/// Great-circle distance in km between two points (haversine form).
double haversine_km(const GeoPoint& a, const GeoPoint& b);

/// Minimal signed rotation from one bearing to another, in (-180, 180].
/// Exactly opposite bearings return +180.
double signed_angle_diff(double from_deg, double to_deg);

/// Removes artificial 360-degree seam jumps: output[0] = input[0] and each
/// successive step equals signed_angle_diff of the inputs. Throws
/// DomainError on an empty series.
std::vector<double> unwrap_angles(std::span<const double> series_deg);

/// True iff the point is inside the polygon or on its boundary.
bool point_in_polygon(const GeoPoint& p, const GeoPolygon& poly);

/// True iff any polyline vertex lies inside/on the polygon or any polyline
/// segment crosses a polygon edge. Planar test in lon/lat. The polyline
/// needs at least one point.
bool polyline_intersects_polygon(std::span<const GeoPoint> polyline, const GeoPolygon& polygon);

}  // namespace towcast
