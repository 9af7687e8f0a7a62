#include "gaze_affect/heatmap.hpp"

#include "gaze_affect/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <thread>

namespace gaze_affect {
namespace {

constexpr double kPi = std::numbers::pi;

struct UnitSplat {
    Vec3 direction;
    double preference;
};

std::vector<UnitSplat> to_unit(std::span<const PreferencePoint> points)
{
    std::vector<UnitSplat> out;
    out.reserve(points.size());
    for (const auto& p : points) {
        out.push_back({normalized(p.point), p.preference});
    }
    return out;
}

double accumulate(const Vec3& d, std::span<const UnitSplat> points, double inv_two_sigma2, double cos_cutoff)
{
    double sum = 0.0;
    for (const auto& p : points) {
        const double c = dot(d, p.direction);
        if (c < cos_cutoff) {
            continue;
        }
        const double theta = std::acos(std::clamp(c, -1.0, 1.0));
        sum += p.preference * std::exp(-theta * theta * inv_two_sigma2);
    }
    return sum;
}

std::uint8_t lerp_channel(std::uint8_t a, std::uint8_t b, double t)
{
    return static_cast<std::uint8_t>(std::lround(a + (static_cast<double>(b) - a) * t));
}

}  // namespace

void HeatmapParams::validate() const
{
    if (width <= 0 || height <= 0 || width != 2 * height) {
        throw DomainError("equirectangular grid must be W = 2H with H > 0, got " + std::to_string(width) + "x" +
                          std::to_string(height));
    }
    if (!(kernel_sigma > 0.0) || !(cutoff_sigmas > 0.0)) {
        throw DomainError("kernel sigma and cutoff must be positive");
    }
}

SphericalHeatmap::SphericalHeatmap(const HeatmapParams& params, std::vector<double> values)
    : params_(params), values_(std::move(values))
{
    params_.validate();
    if (values_.size() != static_cast<std::size_t>(params_.width) * static_cast<std::size_t>(params_.height)) {
        throw DomainError("heatmap value count does not match grid");
    }
}

double SphericalHeatmap::sample(const LonLat& c) const
{
    const int w = params_.width;
    const int h = params_.height;
    const double x = (c.lon + kPi) / (2.0 * kPi) * w - 0.5;
    const double y = std::clamp((kPi / 2 - c.lat) / kPi * h - 0.5, 0.0, static_cast<double>(h - 1));
    const double x0f = std::floor(x);
    const double y0f = std::floor(y);
    const double fx = x - x0f;
    const double fy = y - y0f;
    const int x0 = ((static_cast<int>(x0f) % w) + w) % w;
    const int x1 = (x0 + 1) % w;
    const int y0 = static_cast<int>(y0f);
    const int y1 = std::min(y0 + 1, h - 1);
    const double top = at(x0, y0) * (1.0 - fx) + at(x1, y0) * fx;
    const double bottom = at(x0, y1) * (1.0 - fx) + at(x1, y1) * fx;
    return top * (1.0 - fy) + bottom * fy;
}

double kernel_sum(const Vec3& unit_direction, std::span<const PreferencePoint> points, const HeatmapParams& params)
{
    const auto units = to_unit(points);
    return accumulate(unit_direction, units, 1.0 / (2.0 * params.kernel_sigma * params.kernel_sigma),
                      std::cos(std::min(kPi, params.cutoff_sigmas * params.kernel_sigma)));
}

SphericalHeatmap splat(std::span<const PreferencePoint> points, const HeatmapParams& params)
{
    params.validate();
    if (points.empty()) {
        throw Error("splat: no points");
    }
    const auto units = to_unit(points);
    const double inv_two_sigma2 = 1.0 / (2.0 * params.kernel_sigma * params.kernel_sigma);
    const double cos_cutoff = std::cos(std::min(kPi, params.cutoff_sigmas * params.kernel_sigma));
    const int w = params.width;
    const int h = params.height;

    std::vector<Vec3> column_dirs(static_cast<std::size_t>(w));  // (sin lon, -, cos lon)
    for (int col = 0; col < w; ++col) {
        const double lon = equirect_cell_center(col, 0, w, h).lon;
        column_dirs[static_cast<std::size_t>(col)] = {std::sin(lon), 0.0, std::cos(lon)};
    }

    std::vector<double> values(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
    const auto fill_rows = [&](int row_begin, int row_end) {
        for (int row = row_begin; row < row_end; ++row) {
            const double lat = equirect_cell_center(0, row, w, h).lat;
            const double cl = std::cos(lat);
            const double sl = std::sin(lat);
            for (int col = 0; col < w; ++col) {
                const Vec3& cd = column_dirs[static_cast<std::size_t>(col)];
                const Vec3 d{cl * cd.x, sl, cl * cd.z};
                values[static_cast<std::size_t>(row) * w + col] = accumulate(d, units, inv_two_sigma2, cos_cutoff);
            }
        }
    };

    // Rows are independent and each cell sums points in input order, so the
    // result does not depend on how rows are split across threads.
    const int threads = static_cast<int>(std::clamp(std::thread::hardware_concurrency(), 1u, 16u));
    const int chunk = (h + threads - 1) / threads;
    std::vector<std::jthread> workers;
    for (int begin = 0; begin < h; begin += chunk) {
        workers.emplace_back(fill_rows, begin, std::min(h, begin + chunk));
    }
    workers.clear();

    double max_abs = 0.0;
    for (const double v : values) {
        max_abs = std::max(max_abs, std::abs(v));
    }
    if (max_abs > kPreferenceLimit) {
        const double scale = kPreferenceLimit / max_abs;
        for (double& v : values) {
            v = std::clamp(v * scale, -kPreferenceLimit, kPreferenceLimit);
        }
    }
    return SphericalHeatmap(params, std::move(values));
}

SphericalHeatmap splat(std::span<const RankedPoint> points, const HeatmapParams& params)
{
    std::vector<PreferencePoint> pts;
    pts.reserve(points.size());
    for (const auto& p : points) {
        pts.push_back({p.point, p.preference});
    }
    return splat(std::span<const PreferencePoint>(pts), params);
}

ColorRamp::ColorRamp()
    : ColorRamp({{-100.0, {0, 0, 255}}, {0.0, {0, 255, 0}}, {100.0, {255, 0, 0}}})
{
}

ColorRamp::ColorRamp(std::vector<ColorStop> stops)
    : stops_(std::move(stops))
{
    if (stops_.size() < 2 || stops_.front().preference != -kPreferenceLimit ||
        stops_.back().preference != kPreferenceLimit) {
        throw DomainError("colour ramp needs at least two stops with endpoints at -100 and +100");
    }
    for (std::size_t i = 1; i < stops_.size(); ++i) {
        if (!(stops_[i].preference > stops_[i - 1].preference)) {
            throw DomainError("colour ramp stops must be strictly increasing");
        }
    }
}

Rgb ColorRamp::operator()(double preference) const
{
    const double v = std::clamp(preference, -kPreferenceLimit, kPreferenceLimit);
    const auto hi = std::upper_bound(stops_.begin(), stops_.end(), v,
                                     [](double x, const ColorStop& s) { return x < s.preference; });
    if (hi == stops_.end()) {
        return stops_.back().color;
    }
    const auto lo = std::prev(hi);
    const double t = (v - lo->preference) / (hi->preference - lo->preference);
    return {lerp_channel(lo->color.r, hi->color.r, t), lerp_channel(lo->color.g, hi->color.g, t),
            lerp_channel(lo->color.b, hi->color.b, t)};
}

RgbImage colorize(const SphericalHeatmap& hm, const ColorRamp& ramp, const std::optional<Mask>& mask)
{
    if (mask && (mask->width != hm.width() || mask->height != hm.height())) {
        throw DomainError("mask is " + std::to_string(mask->width) + "x" + std::to_string(mask->height) +
                          ", heatmap is " + std::to_string(hm.width()) + "x" + std::to_string(hm.height()));
    }
    RgbImage img(hm.width(), hm.height());
    for (int row = 0; row < hm.height(); ++row) {
        for (int col = 0; col < hm.width(); ++col) {
            img.at(col, row) = (mask && !mask->is_visible(col, row)) ? kMaskedColor : ramp(hm.at(col, row));
        }
    }
    return img;
}

int mercator_height(int width, double lat_clamp)
{
    const double v_max = lonlat_to_mercator({0.0, lat_clamp}, lat_clamp).v;
    // Square pixels: one pixel spans 2*pi/W in both u and v. Even height keeps the equator on a row boundary.
    return 2 * static_cast<int>(std::ceil(width * v_max / (2.0 * kPi)));
}

RgbImage unfold_mercator(const RgbImage& equirect, double lat_clamp)
{
    const int w = equirect.width();
    const int h = equirect.height();
    const int out_h = mercator_height(w, lat_clamp);
    const double pixel = 2.0 * kPi / w;
    RgbImage out(w, out_h);
    for (int row = 0; row < out_h; ++row) {
        const double v = (out_h / 2 - row - 0.5) * pixel;
        const double lat = std::clamp(mercator_v_to_lat(v), -lat_clamp, lat_clamp);
        const int src_row = equirect_pixel({0.0, lat}, w, h).row;
        for (int col = 0; col < w; ++col) {
            out.at(col, row) = equirect.at(col, src_row);
        }
    }
    return out;
}

RgbImage unfold_mercator(const SphericalHeatmap& heatmap, const ColorRamp& ramp, double lat_clamp)
{
    return unfold_mercator(colorize(heatmap, ramp), lat_clamp);
}

}  // namespace gaze_affect
