#pragma once

// Signed preference heatmap on the environment sphere.
//
// The internal grid is equirectangular (W = 2H). Each ranked point deposits an
// isotropic Gaussian in angular distance, so splats are seamless across
// lon = +-pi and at the poles. The Mercator unfolding is an export only.

#include "gaze_affect/fusion_ranking.hpp"
#include "gaze_affect/geometry.hpp"
#include "gaze_affect/image.hpp"

#include <optional>
#include <span>
#include <vector>

namespace gaze_affect {

inline constexpr double kPreferenceLimit = 100.0;

struct PreferencePoint {
    Vec3 point;
    double preference = 0.0;  // [-100, 100]
};

struct HeatmapParams {
    int width = 1024;
    int height = 512;
    double kernel_sigma = 0.05;  // radians
    double cutoff_sigmas = 4.0;  // contributions beyond this many sigmas are dropped

    void validate() const;
};

class SphericalHeatmap {
public:
    SphericalHeatmap(const HeatmapParams& params, std::vector<double> values);

    int width() const noexcept { return params_.width; }
    int height() const noexcept { return params_.height; }
    const HeatmapParams& params() const noexcept { return params_; }

    double at(int col, int row) const
    {
        return values_[static_cast<std::size_t>(row) * static_cast<std::size_t>(params_.width) +
                       static_cast<std::size_t>(col)];
    }
    const std::vector<double>& values() const noexcept { return values_; }

    /// Bilinear sample at an arbitrary direction; wraps in longitude, clamps in latitude.
    double sample(const LonLat& c) const;

private:
    HeatmapParams params_;
    std::vector<double> values_;
};

/// Unscaled kernel sum for one direction: sum of preference * exp(-theta^2 / (2 sigma^2)).
double kernel_sum(const Vec3& unit_direction, std::span<const PreferencePoint> points, const HeatmapParams& params);

/// Accumulates every point's kernel into the grid, then scales by
/// min(1, 100 / max|cell|) so the neutral zero level is preserved.
SphericalHeatmap splat(std::span<const PreferencePoint> points, const HeatmapParams& params = {});
SphericalHeatmap splat(std::span<const RankedPoint> points, const HeatmapParams& params = {});

struct ColorStop {
    double preference = 0.0;
    Rgb color;
};

/// Piecewise-linear preference -> colour map. Default: blue at -100, green at 0, red at +100.
class ColorRamp {
public:
    ColorRamp();
    explicit ColorRamp(std::vector<ColorStop> stops);

    Rgb operator()(double preference) const;
    const std::vector<ColorStop>& stops() const noexcept { return stops_; }

private:
    std::vector<ColorStop> stops_;
};

inline constexpr Rgb kMaskedColor{128, 128, 128};

RgbImage colorize(const SphericalHeatmap& heatmap, const ColorRamp& ramp = {},
                  const std::optional<Mask>& mask = std::nullopt);

/// Output height for a Mercator unfolding of a `width`-pixel-wide equirectangular grid.
int mercator_height(int width, double lat_clamp = kDefaultLatClamp);

/// Nearest-neighbour resampling of an equirectangular raster onto a Mercator
/// raster of the same width with square pixels. Columns map one to one; the
/// two rows either side of the equator are copied unchanged.
RgbImage unfold_mercator(const RgbImage& equirect, double lat_clamp = kDefaultLatClamp);
RgbImage unfold_mercator(const SphericalHeatmap& heatmap, const ColorRamp& ramp = {},
                         double lat_clamp = kDefaultLatClamp);

}  // namespace gaze_affect
