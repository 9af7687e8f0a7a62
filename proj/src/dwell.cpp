#include "gaze_affect/dwell.hpp"

#include "gaze_affect/error.hpp"
#include "gaze_affect/text_format.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <tuple>
#include <vector>

namespace gaze_affect {
namespace {

std::int64_t round_to_steps(double v, double step)
{
    // std::llround rounds halfway cases away from zero.
    return std::llround(v / step);
}

int decimals_for(double step)
{
    int d = 0;
    while (d < 9 && std::abs(step * std::pow(10.0, d) - std::round(step * std::pow(10.0, d))) > 1e-9) {
        ++d;
    }
    return d;
}

}  // namespace

BinKey quantize(const Vec3& point, double step)
{
    if (!(step > 0.0) || !std::isfinite(step)) {
        throw DomainError("quantize: step must be positive");
    }
    if (!is_finite(point)) {
        throw DomainError("quantize: non-finite coordinate");
    }
    return {round_to_steps(point.x, step), round_to_steps(point.y, step), round_to_steps(point.z, step), step};
}

const DwellRecord& DwellMap::at(const BinKey& key) const
{
    const auto it = bins.find(key);
    if (it == bins.end()) {
        throw Error("no dwell bin for key (" + format_fixed(key.qx()) + ", " + format_fixed(key.qy()) + ", " +
                    format_fixed(key.qz()) + ")");
    }
    return it->second;
}

std::int64_t DwellMap::total_samples() const
{
    std::int64_t n = 0;
    for (const auto& [key, rec] : bins) {
        n += rec.sample_count;
    }
    return n;
}

double DwellMap::total_delay() const
{
    return static_cast<double>(total_samples()) / gaze_rate_hz;
}

DwellMap accumulate_dwell(std::span<const GazeSample> gazes, double gaze_rate_hz, double step)
{
    if (!(gaze_rate_hz > 0.0)) {
        throw DomainError("accumulate_dwell: gaze rate must be positive");
    }
    DwellMap out{step, gaze_rate_hz, {}};

    // Member points are kept so the mean can be summed in a fixed (sorted) order,
    // making representative_point independent of input order bit for bit.
    std::map<BinKey, std::vector<Vec3>> members;
    for (const auto& g : gazes) {
        members[quantize(g.point, step)].push_back(g.point);
    }
    for (auto& [key, points] : members) {
        std::sort(points.begin(), points.end(), [](const Vec3& a, const Vec3& b) {
            return std::tie(a.x, a.y, a.z) < std::tie(b.x, b.y, b.z);
        });
        Vec3 sum{};
        for (const auto& p : points) {
            sum += p;
        }
        const auto count = static_cast<std::int64_t>(points.size());
        out.bins.emplace(key, DwellRecord{key, count, static_cast<double>(count) / gaze_rate_hz,
                                          sum / static_cast<double>(count)});
    }
    return out;
}

void write_dwell_csv(std::ostream& out, const DwellMap& dwell)
{
    const int d = decimals_for(dwell.step);
    out << "qx,qy,qz,count,delay_s\n";
    for (const auto& [key, rec] : dwell.bins) {
        out << format_fixed(key.qx(), d) << ',' << format_fixed(key.qy(), d) << ',' << format_fixed(key.qz(), d)
            << ',' << rec.sample_count << ',' << format_fixed(rec.delay_time) << '\n';
    }
}

}  // namespace gaze_affect
