#pragma once

// 8-bit RGB raster plus the binary formats the toolkit reads and writes:
// PPM (P6) output and input, PGM (P5) masks, PNG output via libpng.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string_view>
#include <vector>

namespace gaze_affect {

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    bool operator==(const Rgb&) const = default;
};

class RgbImage {
public:
    RgbImage() = default;
    RgbImage(int width, int height, Rgb fill = {});

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }

    Rgb& at(int col, int row) { return pixels_[index(col, row)]; }
    const Rgb& at(int col, int row) const { return pixels_[index(col, row)]; }

    const std::vector<Rgb>& pixels() const noexcept { return pixels_; }

    bool operator==(const RgbImage&) const = default;

private:
    std::size_t index(int col, int row) const
    {
        return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(col);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<Rgb> pixels_;
};

/// true = visible, false = masked out.
struct Mask {
    int width = 0;
    int height = 0;
    std::vector<bool> visible;

    bool is_visible(int col, int row) const
    {
        return visible[static_cast<std::size_t>(row) * static_cast<std::size_t>(width) + static_cast<std::size_t>(col)];
    }
};

enum class ImageFormat { ppm, png };

ImageFormat parse_image_format(std::string_view name);

/// P6, maxval 255, no comments, row-major RGB payload.
void write_ppm(std::ostream& out, const RgbImage& image);
RgbImage read_ppm(std::istream& in);

void write_image(const RgbImage& image, const std::filesystem::path& path, ImageFormat format);
RgbImage read_ppm_file(const std::filesystem::path& path);

/// P5 greyscale mask; a zero sample marks the pixel as masked.
Mask read_pgm_mask(std::istream& in);
Mask read_pgm_mask_file(const std::filesystem::path& path);

/// Per-channel blend: opacity * top + (1 - opacity) * bottom, rounded to nearest.
RgbImage blend_over(const RgbImage& top, const RgbImage& bottom, double opacity);

}  // namespace gaze_affect
