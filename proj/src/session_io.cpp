#include "gaze_affect/session_io.hpp"

#include "gaze_affect/text_format.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

namespace gaze_affect {
namespace {

using nlohmann::json;

std::ifstream open_input(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open " + path.string());
    }
    return in;
}

std::ofstream open_output(const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    return out;
}

void expect_header(std::istream& in, std::string_view source, std::string_view header)
{
    std::string line;
    if (!std::getline(in, line) || line != header) {
        throw FormatError(std::string(source) + ": missing or malformed header, expected '" + std::string(header) +
                          "'");
    }
}

// Reads data rows of a CSV whose header has already been consumed. `parse_row`
// fills the row or names the offending field and reason and returns false.
template <typename Row, typename ParseRow>
std::vector<Row> read_rows(std::istream& in, std::string_view source, std::size_t field_count,
                           std::vector<RowDiagnostic>& rejected, ParseRow&& parse_row)
{
    std::vector<Row> rows;
    std::string line;
    std::size_t line_no = 1;
    bool have_last = false;
    double last_t = 0.0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() && in.peek() == std::char_traits<char>::eof()) {
            break;
        }
        const auto reject = [&](std::string field, std::string reason) {
            rejected.push_back({std::string(source), line_no, std::move(field), std::move(reason)});
        };
        if (!line.empty() && line.back() == '\r') {
            reject("", "CRLF line ending");
            continue;
        }
        const auto fields = split_fields(line);
        if (fields.size() != field_count) {
            reject("", "expected " + std::to_string(field_count) + " fields, found " + std::to_string(fields.size()));
            continue;
        }
        Row row;
        std::string field;
        std::string reason;
        if (!parse_row(fields, row, field, reason)) {
            reject(std::move(field), std::move(reason));
            continue;
        }
        if (row.t < 0.0) {
            reject("t", "negative timestamp");
            continue;
        }
        if (have_last && !(row.t > last_t)) {
            reject("t", "timestamp " + format_fixed(row.t) + " not strictly after " + format_fixed(last_t));
            continue;
        }
        have_last = true;
        last_t = row.t;
        rows.push_back(row);
    }
    return rows;
}

void check_count(std::string_view source, std::size_t count, double duration_s, double rate_hz,
                 std::vector<RowDiagnostic>& problems)
{
    const double expected = duration_s * rate_hz;
    if (std::abs(static_cast<double>(count) - expected) > 0.01 * expected + 1.0) {
        problems.push_back({std::string(source), 0, "",
                            "sample count " + std::to_string(count) + " differs from duration*rate = " +
                                format_fixed(expected, 1) + " by more than 1%"});
    }
}

}  // namespace

SessionManifest read_manifest(const std::filesystem::path& path)
{
    auto in = open_input(path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    SessionManifest m;
    try {
        m.session_id = j.at("session_id").get<std::string>();
        m.location_id = j.at("location_id").get<std::string>();
        m.duration_s = j.at("duration_s").get<double>();
        m.emotion_rate_hz = j.value("emotion_rate_hz", 60.0);
        m.gaze_rate_hz = j.value("gaze_rate_hz", 50.0);
        m.sphere_radius = j.value("sphere_radius", kDefaultSphereRadius);
    } catch (const json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    if (!(m.duration_s > 0.0) || !(m.emotion_rate_hz > 0.0) || !(m.gaze_rate_hz > 0.0) || !(m.sphere_radius > 0.0)) {
        throw ValidationError({{path.string(), 0, "", "duration, rates and radius must be positive"}});
    }
    return m;
}

void write_manifest(const std::filesystem::path& path, const SessionManifest& m)
{
    json j = {
        {"session_id", m.session_id},       {"location_id", m.location_id},
        {"duration_s", m.duration_s},       {"emotion_rate_hz", m.emotion_rate_hz},
        {"gaze_rate_hz", m.gaze_rate_hz},   {"sphere_radius", m.sphere_radius},
    };
    auto out = open_output(path);
    out << j.dump(2) << '\n';
}

std::vector<EmotionSample> read_emotions(std::istream& in, std::string_view source,
                                         std::vector<RowDiagnostic>& rejected)
{
    static constexpr std::array<std::string_view, 7> names = {"t",          "stress", "engagement", "interest",
                                                              "excitement", "focus",  "relaxation"};
    expect_header(in, source, kEmotionHeader);
    return read_rows<EmotionSample>(
        in, source, names.size(), rejected,
        [](const std::vector<std::string_view>& fields, EmotionSample& row, std::string& field, std::string& reason) {
            std::array<double, 7> v{};
            for (std::size_t i = 0; i < names.size(); ++i) {
                const auto parsed = parse_real(fields[i]);
                if (!parsed) {
                    field = names[i];
                    reason = "not a number: '" + std::string(fields[i]) + "'";
                    return false;
                }
                v[i] = *parsed;
                if (i > 0 && (v[i] < 0.0 || v[i] > 1.0)) {
                    field = names[i];
                    reason = "index " + std::string(fields[i]) + " outside [0,1]";
                    return false;
                }
            }
            row = {v[0], v[1], v[2], v[3], v[4], v[5], v[6]};
            return true;
        });
}

std::vector<GazeSample> read_gazes(std::istream& in, std::string_view source, double sphere_radius,
                                   std::vector<RowDiagnostic>& rejected)
{
    static constexpr std::array<std::string_view, 4> names = {"t", "x", "y", "z"};
    expect_header(in, source, kGazeHeader);
    return read_rows<GazeSample>(
        in, source, names.size(), rejected,
        [sphere_radius](const std::vector<std::string_view>& fields, GazeSample& row, std::string& field,
                        std::string& reason) {
            std::array<double, 4> v{};
            for (std::size_t i = 0; i < names.size(); ++i) {
                const auto parsed = parse_real(fields[i]);
                if (!parsed) {
                    field = names[i];
                    reason = "not a number: '" + std::string(fields[i]) + "'";
                    return false;
                }
                v[i] = *parsed;
            }
            row = {v[0], {v[1], v[2], v[3]}};
            const double n = norm(row.point);
            if (std::abs(n - sphere_radius) > kOnSphereTolerance) {
                field = "x,y,z";
                reason = "point norm " + format_fixed(n, 3) + " is off the environment sphere (radius " +
                         format_fixed(sphere_radius, 3) + ")";
                return false;
            }
            return true;
        });
}

void write_emotions(std::ostream& out, std::span<const EmotionSample> samples)
{
    out << kEmotionHeader << '\n';
    for (const auto& s : samples) {
        out << format_fixed(s.t) << ',' << format_fixed(s.stress) << ',' << format_fixed(s.engagement) << ','
            << format_fixed(s.interest) << ',' << format_fixed(s.excitement) << ',' << format_fixed(s.focus) << ','
            << format_fixed(s.relaxation) << '\n';
    }
}

void write_gazes(std::ostream& out, std::span<const GazeSample> samples)
{
    out << kGazeHeader << '\n';
    for (const auto& s : samples) {
        out << format_fixed(s.t) << ',' << format_fixed(s.point.x) << ',' << format_fixed(s.point.y) << ','
            << format_fixed(s.point.z) << '\n';
    }
}

ParseResult parse_session(const std::filesystem::path& emotion_path, const std::filesystem::path& gaze_path,
                          const SessionManifest& manifest, const ParseOptions& options)
{
    ParseResult result;
    result.log.info = manifest;

    auto emotion_in = open_input(emotion_path);
    result.log.emotions = read_emotions(emotion_in, emotion_path.string(), result.rejected);
    auto gaze_in = open_input(gaze_path);
    result.log.gazes = read_gazes(gaze_in, gaze_path.string(), manifest.sphere_radius, result.rejected);

    if (!options.skip_invalid) {
        std::vector<RowDiagnostic> problems = result.rejected;
        check_count(emotion_path.string(), result.log.emotions.size(), manifest.duration_s, manifest.emotion_rate_hz,
                    problems);
        check_count(gaze_path.string(), result.log.gazes.size(), manifest.duration_s, manifest.gaze_rate_hz,
                    problems);
        if (!problems.empty()) {
            throw ValidationError(std::move(problems));
        }
    }
    return result;
}

ParseResult load_session(const SessionFiles& files, const ParseOptions& options)
{
    return parse_session(files.emotions(), files.gazes(), read_manifest(files.manifest()), options);
}

void save_session(const SessionFiles& files, const SessionLog& log)
{
    std::filesystem::create_directories(files.dir);
    write_manifest(files.manifest(), log.info);
    {
        auto out = open_output(files.emotions());
        write_emotions(out, log.emotions);
    }
    auto out = open_output(files.gazes());
    write_gazes(out, log.gazes);
}

std::size_t expected_count(double duration_s, double rate_hz)
{
    return static_cast<std::size_t>(std::llround(duration_s * rate_hz));
}

std::vector<AlignedSample> align_streams(const SessionLog& log)
{
    const auto& emotions = log.emotions;
    std::vector<AlignedSample> out;
    out.reserve(log.gazes.size());
    for (const auto& g : log.gazes) {
        // First emotion sample strictly after the gaze time; its predecessor is the held value.
        const auto it = std::upper_bound(emotions.begin(), emotions.end(), g.t,
                                         [](double t, const EmotionSample& e) { return t < e.t; });
        if (it == emotions.begin()) {
            throw AlignmentError("gaze sample at t=" + format_fixed(g.t) + " precedes every emotion sample");
        }
        const auto& e = *std::prev(it);
        out.push_back({g.t, g.point, e.interest, e.stress});
    }
    return out;
}

}  // namespace gaze_affect
