#include "gaze_affect/fixture.hpp"

#include "gaze_affect/error.hpp"
#include "gaze_affect/text_format.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>

namespace gaze_affect {

std::vector<FixturePoint> read_fixture(std::istream& in, std::string_view source)
{
    const std::string where(source);
    std::string line;
    if (!std::getline(in, line) || line != "experiment,list,rank,x,y,z") {
        throw FormatError(where + ": missing header 'experiment,list,rank,x,y,z'");
    }
    std::vector<FixturePoint> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        const auto f = split_fields(line);
        const auto bad = [&](const std::string& why) {
            return FormatError(where + ":" + std::to_string(line_no) + ": " + why);
        };
        if (f.size() != 6) {
            throw bad("expected 6 fields");
        }
        const auto exp = parse_integer(f[0]);
        const auto rank = parse_integer(f[2]);
        const auto x = parse_real(f[3]);
        const auto y = parse_real(f[4]);
        const auto z = parse_real(f[5]);
        if (!exp || !rank || !x || !y || !z) {
            throw bad("unparsable number");
        }
        out.push_back({static_cast<int>(*exp), std::string(f[1]), static_cast<int>(*rank), {*x, *y, *z}, line_no});
    }
    if (out.empty()) {
        throw FormatError(where + ": no rows");
    }
    return out;
}

FixtureReport check_fixture(std::vector<FixturePoint> points, double expected_radius, double tolerance)
{
    if (points.empty()) {
        throw FormatError("fixture: no rows");
    }
    FixtureReport r;
    r.points = std::move(points);
    double sum = 0.0;
    for (std::size_t i = 0; i < r.points.size(); ++i) {
        const double n = norm(r.points[i].point);
        r.norms.push_back(n);
        sum += n;
        const double dev = std::abs(n - expected_radius);
        r.max_deviation = std::max(r.max_deviation, dev);
        if (dev > tolerance) {
            r.failures.push_back(i);
        }
    }
    r.mean_radius = sum / static_cast<double>(r.points.size());
    return r;
}

FixtureReport check_fixture_file(const std::filesystem::path& path, double expected_radius, double tolerance)
{
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open " + path.string());
    }
    return check_fixture(read_fixture(in, path.string()), expected_radius, tolerance);
}

}  // namespace gaze_affect
