#include "towcast/geo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "towcast/errors.hpp"

namespace towcast {
namespace {

constexpr double kPi = 3.14159265358979323846;

double deg2rad(double deg) { return deg * kPi / 180.0; }

// 2D orientation of the (b - a) x (c - a) cross product in lon/lat space.
double cross(const GeoPoint& a, const GeoPoint& b, const GeoPoint& c) {
    return (b.lon - a.lon) * (c.lat - a.lat) - (b.lat - a.lat) * (c.lon - a.lon);
}

bool on_segment(const GeoPoint& a, const GeoPoint& b, const GeoPoint& p) {
    if (cross(a, b, p) != 0.0) return false;
    return std::min(a.lon, b.lon) <= p.lon && p.lon <= std::max(a.lon, b.lon) &&
           std::min(a.lat, b.lat) <= p.lat && p.lat <= std::max(a.lat, b.lat);
}

int sign(double v) { return (v > 0.0) - (v < 0.0); }

// Proper or touching intersection of segments ab and cd.
bool segments_intersect(const GeoPoint& a, const GeoPoint& b, const GeoPoint& c, const GeoPoint& d) {
    const int d1 = sign(cross(a, b, c));
    const int d2 = sign(cross(a, b, d));
    const int d3 = sign(cross(c, d, a));
    const int d4 = sign(cross(c, d, b));
    if (d1 != d2 && d3 != d4) return true;
    if (d1 == 0 && on_segment(a, b, c)) return true;
    if (d2 == 0 && on_segment(a, b, d)) return true;
    if (d3 == 0 && on_segment(c, d, a)) return true;
    if (d4 == 0 && on_segment(c, d, b)) return true;
    return false;
}

bool segments_share_endpoint(const GeoPoint& a, const GeoPoint& b, const GeoPoint& c, const GeoPoint& d) {
    auto same = [](const GeoPoint& p, const GeoPoint& q) { return p.lat == q.lat && p.lon == q.lon; };
    return same(a, c) || same(a, d) || same(b, c) || same(b, d);
}

}  // namespace

GeoPolygon::GeoPolygon(std::vector<GeoPoint> ring) : ring_(std::move(ring)) {
    if (ring_.size() < 4) {
        throw DomainError("polygon ring needs at least 4 vertices (closed)");
    }
    if (ring_.front().lat != ring_.back().lat || ring_.front().lon != ring_.back().lon) {
        throw DomainError("polygon ring is not closed (first vertex != last)");
    }
    min_lat_ = min_lon_ = std::numeric_limits<double>::infinity();
    max_lat_ = max_lon_ = -std::numeric_limits<double>::infinity();
    for (const auto& p : ring_) {
        min_lat_ = std::min(min_lat_, p.lat);
        max_lat_ = std::max(max_lat_, p.lat);
        min_lon_ = std::min(min_lon_, p.lon);
        max_lon_ = std::max(max_lon_, p.lon);
    }
    // Non-adjacent edges must not intersect.
    const std::size_t m = ring_.size() - 1;  // edge count
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            const bool adjacent = (j == i + 1) || (i == 0 && j == m - 1);
            if (adjacent) continue;
            const GeoPoint& a = ring_[i];
            const GeoPoint& b = ring_[i + 1];
            const GeoPoint& c = ring_[j];
            const GeoPoint& d = ring_[j + 1];
            if (segments_share_endpoint(a, b, c, d)) continue;
            if (segments_intersect(a, b, c, d)) {
                throw DomainError("polygon ring is self-intersecting");
            }
        }
    }
}

GeoPoint GeoPolygon::centroid() const {
    double lat = 0.0, lon = 0.0;
    const std::size_t n = ring_.size() - 1;  // skip the closing duplicate
    for (std::size_t i = 0; i < n; ++i) {
        lat += ring_[i].lat;
        lon += ring_[i].lon;
    }
    return GeoPoint{lat / static_cast<double>(n), lon / static_cast<double>(n)};
}

double haversine_km(const GeoPoint& a, const GeoPoint& b) {
    const double lat1 = deg2rad(a.lat);
    const double lat2 = deg2rad(b.lat);
    const double dlat = deg2rad(b.lat - a.lat);
    const double dlon = deg2rad(b.lon - a.lon);
    const double sin_lat = std::sin(dlat / 2.0);
    const double sin_lon = std::sin(dlon / 2.0);
    double h = sin_lat * sin_lat + std::cos(lat1) * std::cos(lat2) * sin_lon * sin_lon;
    h = std::clamp(h, 0.0, 1.0);
    return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(h));
}

double signed_angle_diff(double from_deg, double to_deg) {
    double d = std::fmod(to_deg - from_deg, 360.0);
    if (d <= -180.0) {
        d += 360.0;
    } else if (d > 180.0) {
        d -= 360.0;
    }
    return d;
}

std::vector<double> unwrap_angles(std::span<const double> series_deg) {
    if (series_deg.empty()) {
        throw DomainError("unwrap_angles: empty series");
    }
    std::vector<double> out;
    out.reserve(series_deg.size());
    out.push_back(series_deg[0]);
    for (std::size_t i = 1; i < series_deg.size(); ++i) {
        out.push_back(out.back() + signed_angle_diff(series_deg[i - 1], series_deg[i]));
    }
    return out;
}

bool point_in_polygon(const GeoPoint& p, const GeoPolygon& poly) {
    if (p.lat < poly.min_lat() || p.lat > poly.max_lat() || p.lon < poly.min_lon() ||
        p.lon > poly.max_lon()) {
        return false;
    }
    const auto& ring = poly.ring();
    const std::size_t m = ring.size() - 1;
    // Boundary counts as inside.
    for (std::size_t i = 0; i < m; ++i) {
        if (on_segment(ring[i], ring[i + 1], p)) return true;
    }
    // Ray casting toward +lon.
    bool inside = false;
    for (std::size_t i = 0; i < m; ++i) {
        const GeoPoint& a = ring[i];
        const GeoPoint& b = ring[i + 1];
        if ((a.lat > p.lat) != (b.lat > p.lat)) {
            const double x = a.lon + (p.lat - a.lat) * (b.lon - a.lon) / (b.lat - a.lat);
            if (p.lon < x) inside = !inside;
        }
    }
    return inside;
}

bool polyline_intersects_polygon(std::span<const GeoPoint> polyline, const GeoPolygon& polygon) {
    if (polyline.empty()) {
        throw DomainError("polyline_intersects_polygon: polyline needs at least one point");
    }
    for (const auto& p : polyline) {
        if (point_in_polygon(p, polygon)) return true;
    }
    const auto& ring = polygon.ring();
    const std::size_t m = ring.size() - 1;
    for (std::size_t i = 0; i + 1 < polyline.size(); ++i) {
        const GeoPoint& a = polyline[i];
        const GeoPoint& b = polyline[i + 1];
        // Cheap reject against the polygon's bounding box.
        if (std::max(a.lat, b.lat) < polygon.min_lat() || std::min(a.lat, b.lat) > polygon.max_lat() ||
            std::max(a.lon, b.lon) < polygon.min_lon() || std::min(a.lon, b.lon) > polygon.max_lon()) {
            continue;
        }
        for (std::size_t j = 0; j < m; ++j) {
            if (segments_intersect(a, b, ring[j], ring[j + 1])) return true;
        }
    }
    return false;
}

}  // namespace towcast
