#pragma once

// Environment-sphere geometry.
//
// Axis convention used everywhere in the toolkit: y is up, z is forward (the
// viewer's initial look direction), x is right. Longitude is atan2(x, z) in
// (-pi, pi], latitude is asin(y / |p|) in [-pi/2, pi/2].

#include <cmath>
#include <numbers>

namespace gaze_affect {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    constexpr Vec3 operator-() const { return {-x, -y, -z}; }
    constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    constexpr Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
    constexpr Vec3& operator+=(const Vec3& o)
    {
        x += o.x;
        y += o.y;
        z += o.z;
        return *this;
    }
    constexpr bool operator==(const Vec3&) const = default;
};

constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Vec3 cross(const Vec3& a, const Vec3& b)
{
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }
inline bool is_finite(const Vec3& v) { return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z); }

/// Unit vector along v. Throws DomainError for a zero or non-finite vector.
Vec3 normalized(const Vec3& v);

/// Rotation about the y (up) axis by `angle` radians; increases longitude by `angle`.
Vec3 rotate_about_y(const Vec3& v, double angle);

struct LonLat {
    double lon = 0.0;  // (-pi, pi]
    double lat = 0.0;  // [-pi/2, pi/2]
};

inline constexpr double kDefaultSphereRadius = 102.73;

struct SphereConfig {
    double radius = kDefaultSphereRadius;
    Vec3 viewer_origin{};

    /// Throws DomainError unless radius > 0 and the viewer is strictly inside.
    void validate() const;
};

struct MercatorPoint {
    double u = 0.0;
    double v = 0.0;
};

inline constexpr double kDefaultLatClamp = 85.0 * std::numbers::pi / 180.0;

/// Forward intersection of the ray origin + t*direction (t > 0) with the sphere
/// centred at the world origin. `direction` must be unit length within 1e-9.
Vec3 ray_sphere_intersect(const Vec3& origin, const Vec3& direction, const SphereConfig& cfg);

LonLat cart_to_lonlat(const Vec3& p);
Vec3 lonlat_to_cart(const LonLat& c, const SphereConfig& cfg);
Vec3 lonlat_to_unit(const LonLat& c);

/// u = lon, v = ln(tan(pi/4 + lat'/2)) with lat' clamped to +-lat_clamp.
MercatorPoint lonlat_to_mercator(const LonLat& c, double lat_clamp = kDefaultLatClamp);

/// Inverse of the Mercator ordinate: latitude for a given v.
double mercator_v_to_lat(double v);

/// Angle between two nonzero vectors, in [0, pi].
double angular_distance(const Vec3& a, const Vec3& b);

// Equirectangular grid addressing. Column 0 starts at lon = -pi, row 0 at lat = +pi/2.
struct PixelIndex {
    int col = 0;
    int row = 0;
};

PixelIndex equirect_pixel(const LonLat& c, int width, int height);
LonLat equirect_cell_center(int col, int row, int width, int height);

}  // namespace gaze_affect
