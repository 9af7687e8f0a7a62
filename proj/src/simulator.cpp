#include "gaze_affect/simulator.hpp"

#include "gaze_affect/error.hpp"
#include "gaze_affect/text_format.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

namespace gaze_affect {
namespace {

using nlohmann::json;

constexpr double kPi = std::numbers::pi;
constexpr std::uint64_t kEmotionStreamOffset = 0x9E3779B97F4A7C15ull;

// Portable draws on top of mt19937_64, whose output sequence is fixed by the standard.
class Random {
public:
    explicit Random(std::uint64_t seed)
        : engine_(seed)
    {
    }

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double normal()
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) {
            u1 = uniform();
        }
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * kPi * u2);
        has_spare_ = true;
        return r * std::cos(2.0 * kPi * u2);
    }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

std::size_t draw_index(Random& rng, const std::vector<double>& cumulative)
{
    const double u = rng.uniform() * cumulative.back();
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    return std::min(static_cast<std::size_t>(it - cumulative.begin()), cumulative.size() - 1);
}

Vec3 canonical_point(const Vec3& p)
{
    return {gaze_affect::canonical(p.x), gaze_affect::canonical(p.y), gaze_affect::canonical(p.z)};
}

double unit_clamp(double v)
{
    return gaze_affect::canonical(std::clamp(v, 0.0, 1.0));
}

}  // namespace

void PreferenceField::validate() const
{
    for (const auto& lobe : lobes) {
        if (std::abs(norm(lobe.mu) - 1.0) > 1e-9) {
            throw DomainError("lobe centre must be a unit vector");
        }
        if (!(lobe.kappa > 0.0)) {
            throw DomainError("lobe concentration must be positive");
        }
        if (!(lobe.amplitude >= -1.0 && lobe.amplitude <= 1.0)) {
            throw DomainError("lobe amplitude must be in [-1, 1]");
        }
    }
}

double PreferenceField::value(const Vec3& direction) const
{
    double sum = 0.0;
    for (const auto& lobe : lobes) {
        sum += lobe.amplitude * std::exp(lobe.kappa * (dot(lobe.mu, direction) - 1.0));
    }
    return std::clamp(sum, -1.0, 1.0);
}

double field_value(const PreferenceField& field, const Vec3& direction)
{
    return field.value(direction);
}

void SimConfig::validate() const
{
    if (!(duration_s > 0.0) || !(gaze_rate_hz > 0.0) || !(emotion_rate_hz > 0.0)) {
        throw DomainError("simulator duration and rates must be positive");
    }
    if (!(fixation_base_s > 0.0) || fixation_scale_s < 0.0) {
        throw DomainError("fixation base must be positive and scale non-negative");
    }
    if (noise_std < 0.0 || jitter_std < 0.0 || emotion_lag_s < 0.0 || attraction < 0.0) {
        throw DomainError("noise, jitter, lag and attraction must be non-negative");
    }
    if (candidate_count < 1 || !(cap_half_angle_deg > 0.0)) {
        throw DomainError("need at least one candidate direction and a positive cap");
    }
    sphere.validate();
}

Scenario parse_scenario(const std::string& json_text)
{
    Scenario s;
    try {
        const json j = json::parse(json_text);
        for (const auto& l : j.at("lobes")) {
            const auto mu = l.at("mu").get<std::array<double, 3>>();
            s.field.lobes.push_back({normalized({mu[0], mu[1], mu[2]}), l.at("kappa").get<double>(),
                                     l.at("amplitude").get<double>()});
        }
        auto& c = s.config;
        c.session_id = j.value("session_id", c.session_id);
        c.location_id = j.value("location_id", c.location_id);
        c.duration_s = j.value("duration_s", c.duration_s);
        c.gaze_rate_hz = j.value("gaze_rate_hz", c.gaze_rate_hz);
        c.emotion_rate_hz = j.value("emotion_rate_hz", c.emotion_rate_hz);
        c.fixation_base_s = j.value("fixation_base_s", c.fixation_base_s);
        c.fixation_scale_s = j.value("fixation_scale_s", c.fixation_scale_s);
        c.attraction = j.value("attraction", c.attraction);
        c.emotion_gain = j.value("emotion_gain", c.emotion_gain);
        c.noise_std = j.value("noise_std", c.noise_std);
        c.jitter_std = j.value("jitter_std", c.jitter_std);
        c.candidate_count = j.value("candidate_count", c.candidate_count);
        c.cap_half_angle_deg = j.value("cap_half_angle_deg", c.cap_half_angle_deg);
        c.emotion_lag_s = j.value("emotion_lag_s", c.emotion_lag_s);
        c.seed = j.value("seed", c.seed);
        c.sphere.radius = j.value("sphere_radius", c.sphere.radius);
    } catch (const json::exception& e) {
        throw FormatError(std::string("scenario: ") + e.what());
    }
    s.field.validate();
    s.config.validate();
    return s;
}

Scenario read_scenario(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open " + path.string());
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

std::vector<Vec3> fibonacci_directions(int n)
{
    std::vector<Vec3> out;
    out.reserve(static_cast<std::size_t>(std::max(n, 0)));
    const double golden_angle = kPi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < n; ++i) {
        const double y = 1.0 - 2.0 * (i + 0.5) / n;
        const double r = std::sqrt(std::max(0.0, 1.0 - y * y));
        const double phi = golden_angle * i;
        out.push_back({r * std::sin(phi), y, r * std::cos(phi)});
    }
    return out;
}

std::vector<Vec3> candidate_directions(const SimConfig& config)
{
    const double min_cos = std::cos(config.cap_half_angle_deg * kPi / 180.0);
    std::vector<Vec3> out;
    for (const auto& d : fibonacci_directions(config.candidate_count)) {
        if (d.z >= min_cos) {
            out.push_back(d);
        }
    }
    if (out.empty()) {
        throw DomainError("no candidate directions inside the forward cap");
    }
    return out;
}

Scanpath simulate_scanpath(const PreferenceField& field, const SimConfig& config)
{
    config.validate();
    const auto candidates = candidate_directions(config);
    std::vector<double> values;
    std::vector<double> cumulative;
    values.reserve(candidates.size());
    cumulative.reserve(candidates.size());
    double acc = 0.0;
    for (const auto& d : candidates) {
        values.push_back(field.value(d));
        acc += std::exp(config.attraction * values.back());
        cumulative.push_back(acc);
    }

    Random rng(config.seed);
    const std::size_t total = expected_count(config.duration_s, config.gaze_rate_hz);
    Scanpath path;
    path.gazes.reserve(total);
    path.fixated.reserve(total);
    while (path.gazes.size() < total) {
        const std::size_t target = draw_index(rng, cumulative);
        const double fixation_s = config.fixation_base_s + config.fixation_scale_s * std::max(0.0, values[target]);
        const auto samples = std::max<long long>(1, std::llround(fixation_s * config.gaze_rate_hz));
        const Vec3& dir = candidates[target];
        for (long long k = 0; k < samples && path.gazes.size() < total; ++k) {
            const std::size_t i = path.gazes.size();
            Vec3 look = dir;
            if (config.jitter_std > 0.0) {
                const Vec3 noise{rng.normal(), rng.normal(), rng.normal()};
                look = normalized(dir * config.sphere.radius + noise * config.jitter_std);
            }
            const Vec3 hit = ray_sphere_intersect(config.sphere.viewer_origin, look, config.sphere);
            path.gazes.push_back({gaze_affect::canonical(static_cast<double>(i) / config.gaze_rate_hz), canonical_point(hit)});
            path.fixated.push_back(dir);
        }
    }
    return path;
}

std::vector<EmotionSample> simulate_emotions(const PreferenceField& field, const Scanpath& scanpath,
                                             const SimConfig& config)
{
    if (scanpath.gazes.empty() || scanpath.fixated.size() != scanpath.gazes.size()) {
        throw Error("simulate_emotions: empty or inconsistent scanpath");
    }
    Random rng(config.seed + kEmotionStreamOffset);
    const std::size_t total = expected_count(config.duration_s, config.emotion_rate_hz);
    const auto last = static_cast<long long>(scanpath.fixated.size()) - 1;
    const double g = config.emotion_gain;
    const double s = config.noise_std;
    std::vector<EmotionSample> out;
    out.reserve(total);
    for (std::size_t j = 0; j < total; ++j) {
        const double t = static_cast<double>(j) / config.emotion_rate_hz;
        const double looked_at = std::max(0.0, t - config.emotion_lag_s);
        const auto gaze_index = std::clamp<long long>(
            static_cast<long long>(std::floor(looked_at * config.gaze_rate_hz + 1e-9)), 0, last);
        const double v = field.value(scanpath.fixated[static_cast<std::size_t>(gaze_index)]);
        EmotionSample e;
        e.t = gaze_affect::canonical(t);
        e.interest = unit_clamp(0.5 + g * v + s * rng.normal());
        e.stress = unit_clamp(0.5 - g * v + s * rng.normal());
        e.engagement = unit_clamp(0.5 + s * rng.normal());
        e.excitement = unit_clamp(0.5 + s * rng.normal());
        e.focus = unit_clamp(0.5 + s * rng.normal());
        e.relaxation = unit_clamp(0.5 + s * rng.normal());
        out.push_back(e);
    }
    return out;
}

SessionManifest make_manifest(const SimConfig& config)
{
    return {config.session_id, config.location_id,  config.duration_s,
            config.emotion_rate_hz, config.gaze_rate_hz, config.sphere.radius};
}

SessionLog simulate_session(const Scenario& scenario)
{
    scenario.field.validate();
    const Scanpath path = simulate_scanpath(scenario.field, scenario.config);
    SessionLog log;
    log.info = make_manifest(scenario.config);
    log.emotions = simulate_emotions(scenario.field, path, scenario.config);
    log.gazes = path.gazes;
    return log;
}

void emit_session(const Scanpath& scanpath, const std::vector<EmotionSample>& emotions,
                  const SessionManifest& manifest, const std::filesystem::path& out_dir)
{
    const double duration_g = static_cast<double>(scanpath.gazes.size()) / manifest.gaze_rate_hz;
    const double duration_e = static_cast<double>(emotions.size()) / manifest.emotion_rate_hz;
    if (std::abs(duration_g - manifest.duration_s) > 1.0 / manifest.gaze_rate_hz ||
        std::abs(duration_e - manifest.duration_s) > 1.0 / manifest.emotion_rate_hz) {
        throw Error("emit_session: stream lengths do not match the manifest duration");
    }
    save_session(SessionFiles{out_dir}, SessionLog{manifest, emotions, scanpath.gazes});
}

}  // namespace gaze_affect
