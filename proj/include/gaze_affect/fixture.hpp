#pragma once

// Consistency check for published environment-sphere coordinates: all points
// should share one radius up to the rounding of the printed values.

#include "gaze_affect/geometry.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace gaze_affect {

inline constexpr double kFixtureRadius = 102.77;
inline constexpr double kFixtureTolerance = 0.5;

struct FixturePoint {
    int experiment = 0;
    std::string list;  // "preferred" | "less_preferred"
    int rank = 0;
    Vec3 point;
    std::size_t line = 0;
};

struct FixtureReport {
    std::vector<FixturePoint> points;
    std::vector<double> norms;
    double mean_radius = 0.0;
    double max_deviation = 0.0;  // max |norm - expected radius|
    std::vector<std::size_t> failures;  // indices into points

    bool passed() const { return failures.empty(); }
};

/// CSV `experiment,list,rank,x,y,z`. Throws FormatError on malformed rows or an empty table.
std::vector<FixturePoint> read_fixture(std::istream& in, std::string_view source);

FixtureReport check_fixture(std::vector<FixturePoint> points, double expected_radius = kFixtureRadius,
                            double tolerance = kFixtureTolerance);
FixtureReport check_fixture_file(const std::filesystem::path& path, double expected_radius = kFixtureRadius,
                                 double tolerance = kFixtureTolerance);

}  // namespace gaze_affect
