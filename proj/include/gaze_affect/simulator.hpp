#pragma once

// Ground-truth session generator.
//
// A signed preference field made of unnormalized von Mises-Fisher lobes drives
// a fixation/saccade scanpath (targets drawn with probability proportional to
// exp(attraction * field)) and emotion indices that rise and fall with the
// field value at the fixated direction.

#include "gaze_affect/geometry.hpp"
#include "gaze_affect/session_io.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace gaze_affect {

struct PreferenceLobe {
    Vec3 mu{0.0, 0.0, 1.0};  // unit centre direction
    double kappa = 50.0;
    double amplitude = 1.0;  // [-1, 1]
};

struct PreferenceField {
    std::vector<PreferenceLobe> lobes;

    void validate() const;
    /// clamp(sum_j amplitude_j * exp(kappa_j * (mu_j . d - 1)), -1, 1) for a unit direction d.
    double value(const Vec3& direction) const;
};

double field_value(const PreferenceField& field, const Vec3& direction);

struct SimConfig {
    std::string session_id = "sim";
    std::string location_id = "sim";
    double duration_s = 600.0;
    double gaze_rate_hz = 50.0;
    double emotion_rate_hz = 60.0;
    double fixation_base_s = 0.2;
    double fixation_scale_s = 0.6;  // extra fixation time per unit of positive field value
    double attraction = 5.0;
    double emotion_gain = 0.4;
    double noise_std = 0.05;
    double jitter_std = 0.0;  // scene units, per gaze sample
    int candidate_count = 512;
    double cap_half_angle_deg = 120.0;
    double emotion_lag_s = 0.0;
    std::uint64_t seed = 0;
    SphereConfig sphere;

    void validate() const;
};

struct Scenario {
    PreferenceField field;
    SimConfig config;
};

Scenario read_scenario(const std::filesystem::path& path);
Scenario parse_scenario(const std::string& json_text);

/// `n` near-uniform unit directions on the sphere (golden-angle spiral, y up).
std::vector<Vec3> fibonacci_directions(int n);

/// Fibonacci directions within the forward cap (angle to +z <= cap half-angle).
std::vector<Vec3> candidate_directions(const SimConfig& config);

struct Scanpath {
    std::vector<GazeSample> gazes;
    std::vector<Vec3> fixated;  // unit target direction for each gaze sample
};

Scanpath simulate_scanpath(const PreferenceField& field, const SimConfig& config);

std::vector<EmotionSample> simulate_emotions(const PreferenceField& field, const Scanpath& scanpath,
                                             const SimConfig& config);

SessionManifest make_manifest(const SimConfig& config);

/// Full in-memory session; values are already in their canonical written form.
SessionLog simulate_session(const Scenario& scenario);

/// Writes the session_io formats into `out_dir`.
void emit_session(const Scanpath& scanpath, const std::vector<EmotionSample>& emotions,
                  const SessionManifest& manifest, const std::filesystem::path& out_dir);

}  // namespace gaze_affect
