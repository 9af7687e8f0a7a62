#include "gaze_affect/geometry.hpp"

#include "gaze_affect/error.hpp"

#include <algorithm>
#include <string>

namespace gaze_affect {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kUnitTolerance = 1e-9;

void check_lonlat(const LonLat& c)
{
    if (!std::isfinite(c.lon) || !std::isfinite(c.lat) || c.lon <= -kPi - 1e-12 || c.lon > kPi + 1e-12 ||
        std::abs(c.lat) > kPi / 2 + 1e-12) {
        throw DomainError("lon/lat out of range: (" + std::to_string(c.lon) + ", " + std::to_string(c.lat) + ")");
    }
}

}  // namespace

Vec3 normalized(const Vec3& v)
{
    const double n = norm(v);
    if (!(n > 0.0) || !std::isfinite(n)) {
        throw DomainError("cannot normalize a zero or non-finite vector");
    }
    return v / n;
}

Vec3 rotate_about_y(const Vec3& v, double angle)
{
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    // lon = atan2(x, z), so rotating (z, x) by +angle adds angle to lon.
    return {v.x * c + v.z * s, v.y, v.z * c - v.x * s};
}

void SphereConfig::validate() const
{
    if (!(radius > 0.0) || !std::isfinite(radius)) {
        throw DomainError("sphere radius must be positive, got " + std::to_string(radius));
    }
    if (!is_finite(viewer_origin) || !(norm(viewer_origin) < radius)) {
        throw DomainError("viewer origin must lie strictly inside the environment sphere");
    }
}

Vec3 ray_sphere_intersect(const Vec3& origin, const Vec3& direction, const SphereConfig& cfg)
{
    if (!(cfg.radius > 0.0)) {
        throw DomainError("sphere radius must be positive");
    }
    const double dn = norm(direction);
    if (!(dn > 0.0)) {
        throw DomainError("ray direction is zero");
    }
    if (std::abs(dn - 1.0) > kUnitTolerance) {
        throw DomainError("ray direction is not unit length (|d| = " + std::to_string(dn) + ")");
    }
    if (!is_finite(origin)) {
        throw DomainError("ray origin is not finite");
    }
    // t^2 + 2 t b + c = 0 with b = o.d, c = |o|^2 - R^2 < 0 for an inside origin.
    const double b = dot(origin, direction);
    const double c = dot(origin, origin) - cfg.radius * cfg.radius;
    if (!(c < 0.0)) {
        throw DomainError("ray origin is not strictly inside the sphere");
    }
    const double root = std::sqrt(b * b - c);
    // Positive root -b + root, written without cancellation when b > 0.
    const double t = b > 0.0 ? -c / (b + root) : root - b;
    return origin + direction * t;
}

LonLat cart_to_lonlat(const Vec3& p)
{
    const double n = norm(p);
    if (!(n > 0.0) || !std::isfinite(n)) {
        throw DomainError("cart_to_lonlat: zero or non-finite vector");
    }
    double lon = std::atan2(p.x, p.z);
    if (lon == -kPi) {
        lon = kPi;
    }
    return {lon, std::asin(std::clamp(p.y / n, -1.0, 1.0))};
}

Vec3 lonlat_to_unit(const LonLat& c)
{
    check_lonlat(c);
    const double cl = std::cos(c.lat);
    return {cl * std::sin(c.lon), std::sin(c.lat), cl * std::cos(c.lon)};
}

Vec3 lonlat_to_cart(const LonLat& c, const SphereConfig& cfg)
{
    return lonlat_to_unit(c) * cfg.radius;
}

MercatorPoint lonlat_to_mercator(const LonLat& c, double lat_clamp)
{
    check_lonlat(c);
    const double lat = std::clamp(c.lat, -lat_clamp, lat_clamp);
    // asinh(tan(lat)) == ln(tan(pi/4 + lat/2)); this form is exactly odd in lat.
    return {c.lon, std::asinh(std::tan(lat))};
}

double mercator_v_to_lat(double v)
{
    return std::atan(std::sinh(v));
}

double angular_distance(const Vec3& a, const Vec3& b)
{
    const double na = norm(a);
    const double nb = norm(b);
    if (!(na > 0.0) || !(nb > 0.0)) {
        throw DomainError("angular_distance: zero vector");
    }
    return std::acos(std::clamp(dot(a, b) / (na * nb), -1.0, 1.0));
}

PixelIndex equirect_pixel(const LonLat& c, int width, int height)
{
    const int col = static_cast<int>(std::floor((c.lon + kPi) / (2.0 * kPi) * width));
    const int row = static_cast<int>(std::floor((kPi / 2 - c.lat) / kPi * height));
    return {std::clamp(col, 0, width - 1), std::clamp(row, 0, height - 1)};
}

LonLat equirect_cell_center(int col, int row, int width, int height)
{
    return {(col + 0.5) / width * 2.0 * kPi - kPi, kPi / 2 - (row + 0.5) / height * kPi};
}

}  // namespace gaze_affect
