#pragma once

// Per-session sensor streams: 60 Hz emotion indices and 50 Hz gaze/sphere
// intersections. Files are plain CSV with a fixed header plus a JSON manifest.
//
//   emotions.csv  t,stress,engagement,interest,excitement,focus,relaxation
//   gaze.csv      t,x,y,z
//   session.json  {session_id, location_id, duration_s, emotion_rate_hz,
//                  gaze_rate_hz, sphere_radius}
//
// Writers emit every real with six fixed decimals, so a parsed file
// re-serializes byte for byte.

#include "gaze_affect/error.hpp"
#include "gaze_affect/geometry.hpp"

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gaze_affect {

inline constexpr std::string_view kEmotionHeader = "t,stress,engagement,interest,excitement,focus,relaxation";
inline constexpr std::string_view kGazeHeader = "t,x,y,z";

/// Tolerance on |point| - radius for gaze rows; absorbs rounding in the source data.
inline constexpr double kOnSphereTolerance = 0.5;

struct EmotionSample {
    double t = 0.0;
    double stress = 0.0;
    double engagement = 0.0;
    double interest = 0.0;
    double excitement = 0.0;
    double focus = 0.0;
    double relaxation = 0.0;

    bool operator==(const EmotionSample&) const = default;
};

struct GazeSample {
    double t = 0.0;
    Vec3 point;

    bool operator==(const GazeSample&) const = default;
};

struct SessionManifest {
    std::string session_id;
    std::string location_id;
    double duration_s = 0.0;
    double emotion_rate_hz = 60.0;
    double gaze_rate_hz = 50.0;
    double sphere_radius = kDefaultSphereRadius;

    bool operator==(const SessionManifest&) const = default;
};

struct SessionLog {
    SessionManifest info;
    std::vector<EmotionSample> emotions;
    std::vector<GazeSample> gazes;

    bool operator==(const SessionLog&) const = default;
};

struct ParseOptions {
    /// Drop rejected rows (and tolerate the resulting count shortfall) instead of failing.
    bool skip_invalid = false;
};

struct ParseResult {
    SessionLog log;
    std::vector<RowDiagnostic> rejected;
};

SessionManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const SessionManifest& manifest);

// Stream-level readers append one diagnostic per rejected row. They throw
// FormatError when the header is missing or wrong.
std::vector<EmotionSample> read_emotions(std::istream& in, std::string_view source,
                                         std::vector<RowDiagnostic>& rejected);
std::vector<GazeSample> read_gazes(std::istream& in, std::string_view source, double sphere_radius,
                                   std::vector<RowDiagnostic>& rejected);

void write_emotions(std::ostream& out, std::span<const EmotionSample> samples);
void write_gazes(std::ostream& out, std::span<const GazeSample> samples);

/// Parses and validates both streams against the manifest. Without
/// skip_invalid any rejected row raises ValidationError listing every
/// diagnostic in file order.
ParseResult parse_session(const std::filesystem::path& emotion_path, const std::filesystem::path& gaze_path,
                          const SessionManifest& manifest, const ParseOptions& options = {});

/// Standard file names inside a session directory.
struct SessionFiles {
    std::filesystem::path dir;

    std::filesystem::path emotions() const { return dir / "emotions.csv"; }
    std::filesystem::path gazes() const { return dir / "gaze.csv"; }
    std::filesystem::path manifest() const { return dir / "session.json"; }
};

ParseResult load_session(const SessionFiles& files, const ParseOptions& options = {});
void save_session(const SessionFiles& files, const SessionLog& log);

/// Expected sample count for a stream (duration * rate, rounded).
std::size_t expected_count(double duration_s, double rate_hz);

/// Gaze sample joined with the zero-order-held emotion indices.
struct AlignedSample {
    double t = 0.0;
    Vec3 point;
    double interest = 0.0;
    double stress = 0.0;
};

/// One record per gaze sample carrying the latest emotion sample with t <= gaze t.
/// Throws AlignmentError if a gaze sample precedes every emotion sample.
std::vector<AlignedSample> align_streams(const SessionLog& log);

}  // namespace gaze_affect
