#pragma once

// Gaze dwell ("DelayTime") per quantized coordinate bin.

#include "gaze_affect/geometry.hpp"
#include "gaze_affect/session_io.hpp"

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>

namespace gaze_affect {

inline constexpr double kDefaultDwellStep = 0.01;

/// A coordinate rounded to the nearest multiple of `step`, stored as integer
/// multiples so that equality and ordering are exact.
struct BinKey {
    std::int64_t ix = 0;
    std::int64_t iy = 0;
    std::int64_t iz = 0;
    double step = kDefaultDwellStep;

    double qx() const { return static_cast<double>(ix) * step; }
    double qy() const { return static_cast<double>(iy) * step; }
    double qz() const { return static_cast<double>(iz) * step; }
    Vec3 point() const { return {qx(), qy(), qz()}; }

    bool operator==(const BinKey& o) const { return ix == o.ix && iy == o.iy && iz == o.iz; }
    std::strong_ordering operator<=>(const BinKey& o) const
    {
        if (auto c = ix <=> o.ix; c != 0) {
            return c;
        }
        if (auto c = iy <=> o.iy; c != 0) {
            return c;
        }
        return iz <=> o.iz;
    }
};

/// Rounds each component to the nearest multiple of step, ties away from zero.
BinKey quantize(const Vec3& point, double step = kDefaultDwellStep);

struct DwellRecord {
    BinKey key;
    std::int64_t sample_count = 0;
    double delay_time = 0.0;  // sample_count / gaze_rate
    Vec3 representative_point;  // mean of member points
};

struct DwellMap {
    double step = kDefaultDwellStep;
    double gaze_rate_hz = 50.0;
    std::map<BinKey, DwellRecord> bins;

    const DwellRecord& at(const BinKey& key) const;
    std::int64_t total_samples() const;
    /// Total dwell from the integer counts; equals N / gaze_rate exactly.
    double total_delay() const;
};

/// Cumulative dwell per bin: every sample contributes exactly 1/gaze_rate seconds.
/// The result does not depend on sample order.
DwellMap accumulate_dwell(std::span<const GazeSample> gazes, double gaze_rate_hz, double step = kDefaultDwellStep);

/// CSV `qx,qy,qz,count,delay_s`, one row per bin in key order.
void write_dwell_csv(std::ostream& out, const DwellMap& dwell);

}  // namespace gaze_affect
