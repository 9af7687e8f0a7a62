#include "gaze_affect/error.hpp"
#include "gaze_affect/image.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

using namespace gaze_affect;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("one red pixel as PPM")
{
    std::ostringstream out;
    write_ppm(out, RgbImage(1, 1, {255, 0, 0}));
    CHECK(out.str() == std::string("P6\n1 1\n255\n\xFF\x00\x00", 14));
}

TEST_CASE("PPM payload is row-major")
{
    RgbImage img(2, 1);
    img.at(0, 0) = {0, 255, 0};
    img.at(1, 0) = {0, 0, 255};
    std::ostringstream out;
    write_ppm(out, img);
    CHECK(out.str() == std::string("P6\n2 1\n255\n\x00\xFF\x00\x00\x00\xFF", 17));
    std::istringstream in(out.str());
    CHECK(read_ppm(in) == img);
}

TEST_CASE("full-size PPM file size")
{
    const fs::path p = fs::temp_directory_path() / "gaze_affect_full.ppm";
    write_image(RgbImage(1024, 512, {1, 2, 3}), p, ImageFormat::ppm);
    CHECK(fs::file_size(p) == 16 + 3 * 1024 * 512);
    CHECK(read_ppm_file(p).at(1023, 511) == Rgb{1, 2, 3});
}

TEST_CASE("PNG output carries the PNG signature")
{
    const fs::path p = fs::temp_directory_path() / "gaze_affect_small.png";
    write_image(RgbImage(4, 2, {9, 9, 9}), p, ImageFormat::png);
    const std::string bytes = slurp(p);
    REQUIRE(bytes.size() > 8);
    CHECK(bytes.substr(0, 8) == std::string("\x89PNG\r\n\x1a\n", 8));
}

TEST_CASE("image format names")
{
    CHECK(parse_image_format("ppm") == ImageFormat::ppm);
    CHECK(parse_image_format("png") == ImageFormat::png);
    CHECK_THROWS_AS(parse_image_format("jpg"), FormatError);
}

TEST_CASE("malformed PPM input")
{
    std::istringstream p3("P3\n1 1\n255\n0 0 0\n");
    CHECK_THROWS_AS(read_ppm(p3), FormatError);
    std::istringstream short_payload(std::string("P6\n2 2\n255\n\x01\x02", 13));
    CHECK_THROWS_AS(read_ppm(short_payload), FormatError);
}

TEST_CASE("PGM masks")
{
    std::istringstream in(std::string("P5\n3 1\n255\n\x00\xFF\x10", 14));
    const Mask m = read_pgm_mask(in);
    CHECK(m.width == 3);
    CHECK_FALSE(m.is_visible(0, 0));
    CHECK(m.is_visible(1, 0));
    CHECK(m.is_visible(2, 0));
}

TEST_CASE("blending")
{
    const RgbImage top(1, 1, {200, 0, 100});
    const RgbImage bottom(1, 1, {0, 100, 100});
    CHECK(blend_over(top, bottom, 0.5).at(0, 0) == Rgb{100, 50, 100});
    CHECK(blend_over(top, bottom, 1.0) == top);
    CHECK_THROWS(blend_over(top, RgbImage(2, 1), 0.5));
}
