#include "gaze_affect/image.hpp"

#include "gaze_affect/error.hpp"

#include <png.h>

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <memory>
#include <ostream>
#include <string>

namespace gaze_affect {
namespace {

// Reads one whitespace-delimited header token, skipping '#' comment lines.
std::string next_token(std::istream& in)
{
    std::string tok;
    while (true) {
        const int c = in.get();
        if (c == EOF) {
            break;
        }
        if (c == '#' && tok.empty()) {
            std::string ignored;
            std::getline(in, ignored);
            continue;
        }
        if (std::isspace(c)) {
            if (!tok.empty()) {
                break;
            }
            continue;
        }
        tok.push_back(static_cast<char>(c));
    }
    return tok;
}

int header_int(std::istream& in, const char* what)
{
    const std::string tok = next_token(in);
    try {
        std::size_t used = 0;
        const int v = std::stoi(tok, &used);
        if (used == tok.size() && v > 0) {
            return v;
        }
    } catch (const std::exception&) {
    }
    throw FormatError(std::string("netpbm header: bad ") + what + " '" + tok + "'");
}

void write_png(const RgbImage& image, const std::filesystem::path& path)
{
    std::unique_ptr<std::FILE, int (*)(std::FILE*)> fp(std::fopen(path.c_str(), "wb"), &std::fclose);
    if (!fp) {
        throw Error("cannot write " + path.string());
    }
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, nullptr);
        throw Error("libpng initialisation failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw Error("libpng failed writing " + path.string());
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(image.width()), static_cast<png_uint_32>(image.height()), 8,
                 PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<png_byte> row(static_cast<std::size_t>(image.width()) * 3);
    for (int y = 0; y < image.height(); ++y) {
        for (int x = 0; x < image.width(); ++x) {
            const Rgb& p = image.at(x, y);
            row[3 * x] = p.r;
            row[3 * x + 1] = p.g;
            row[3 * x + 2] = p.b;
        }
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

}  // namespace

RgbImage::RgbImage(int width, int height, Rgb fill)
    : width_(width), height_(height)
{
    if (width <= 0 || height <= 0) {
        throw DomainError("image dimensions must be positive");
    }
    pixels_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

ImageFormat parse_image_format(std::string_view name)
{
    if (name == "ppm") {
        return ImageFormat::ppm;
    }
    if (name == "png") {
        return ImageFormat::png;
    }
    throw FormatError("unknown image format '" + std::string(name) + "' (expected ppm or png)");
}

void write_ppm(std::ostream& out, const RgbImage& image)
{
    out << "P6\n" << image.width() << ' ' << image.height() << "\n255\n";
    std::vector<char> payload;
    payload.reserve(image.pixels().size() * 3);
    for (const Rgb& p : image.pixels()) {
        payload.push_back(static_cast<char>(p.r));
        payload.push_back(static_cast<char>(p.g));
        payload.push_back(static_cast<char>(p.b));
    }
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
}

RgbImage read_ppm(std::istream& in)
{
    if (next_token(in) != "P6") {
        throw FormatError("not a binary PPM (P6)");
    }
    const int w = header_int(in, "width");
    const int h = header_int(in, "height");
    if (header_int(in, "maxval") != 255) {
        throw FormatError("PPM maxval must be 255");
    }
    RgbImage img(w, h);
    std::vector<char> payload(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3);
    if (!in.read(payload.data(), static_cast<std::streamsize>(payload.size()))) {
        throw FormatError("PPM payload truncated");
    }
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t i = 3 * (static_cast<std::size_t>(y) * w + x);
            img.at(x, y) = {static_cast<std::uint8_t>(payload[i]), static_cast<std::uint8_t>(payload[i + 1]),
                            static_cast<std::uint8_t>(payload[i + 2])};
        }
    }
    return img;
}

void write_image(const RgbImage& image, const std::filesystem::path& path, ImageFormat format)
{
    if (format == ImageFormat::png) {
        write_png(image, path);
        return;
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    write_ppm(out, image);
    if (!out) {
        throw Error("write failed for " + path.string());
    }
}

RgbImage read_ppm_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open " + path.string());
    }
    return read_ppm(in);
}

Mask read_pgm_mask(std::istream& in)
{
    if (next_token(in) != "P5") {
        throw FormatError("mask is not a binary PGM (P5)");
    }
    Mask m;
    m.width = header_int(in, "width");
    m.height = header_int(in, "height");
    const int maxval = header_int(in, "maxval");
    if (maxval > 65535) {
        throw FormatError("PGM maxval too large");
    }
    const std::size_t bytes_per_sample = maxval > 255 ? 2 : 1;
    const std::size_t n = static_cast<std::size_t>(m.width) * static_cast<std::size_t>(m.height);
    std::vector<unsigned char> payload(n * bytes_per_sample);
    if (!in.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(payload.size()))) {
        throw FormatError("PGM payload truncated");
    }
    m.visible.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        bool nonzero = payload[i * bytes_per_sample] != 0;
        if (bytes_per_sample == 2) {
            nonzero = nonzero || payload[i * 2 + 1] != 0;
        }
        m.visible[i] = nonzero;
    }
    return m;
}

Mask read_pgm_mask_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open " + path.string());
    }
    return read_pgm_mask(in);
}

RgbImage blend_over(const RgbImage& top, const RgbImage& bottom, double opacity)
{
    if (top.width() != bottom.width() || top.height() != bottom.height()) {
        throw DomainError("background dimensions " + std::to_string(bottom.width()) + "x" +
                          std::to_string(bottom.height()) + " do not match heatmap " + std::to_string(top.width()) +
                          "x" + std::to_string(top.height()));
    }
    if (!(opacity >= 0.0 && opacity <= 1.0)) {
        throw DomainError("opacity must be in [0,1]");
    }
    const auto mix = [opacity](std::uint8_t a, std::uint8_t b) {
        return static_cast<std::uint8_t>(std::lround(opacity * a + (1.0 - opacity) * b));
    };
    RgbImage out(top.width(), top.height());
    for (int y = 0; y < top.height(); ++y) {
        for (int x = 0; x < top.width(); ++x) {
            const Rgb& a = top.at(x, y);
            const Rgb& b = bottom.at(x, y);
            out.at(x, y) = {mix(a.r, b.r), mix(a.g, b.g), mix(a.b, b.b)};
        }
    }
    return out;
}

}  // namespace gaze_affect
