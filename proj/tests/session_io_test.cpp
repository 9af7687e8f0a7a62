#include "gaze_affect/error.hpp"
#include "gaze_affect/session_io.hpp"
#include "gaze_affect/text_format.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace gaze_affect;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / ("gaze_affect_session_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write_text(const fs::path& p, const std::string& text)
{
    std::ofstream(p, std::ios::binary) << text;
}

SessionLog small_session(double duration)
{
    SessionLog log;
    log.info = {"s1", "loc", duration, 60.0, 50.0, 102.73};
    for (std::size_t i = 0; i < expected_count(duration, 60.0); ++i) {
        const double t = canonical(static_cast<double>(i) / 60.0);
        log.emotions.push_back({t, 0.25, 0.5, canonical(0.5 + 0.4 * std::sin(t)), 0.5, 0.5, 0.5});
    }
    for (std::size_t i = 0; i < expected_count(duration, 50.0); ++i) {
        const double t = canonical(static_cast<double>(i) / 50.0);
        const double a = 0.01 * static_cast<double>(i);
        log.gazes.push_back({t, {canonical(102.73 * std::sin(a)), 0.0, canonical(102.73 * std::cos(a))}});
    }
    return log;
}

}  // namespace

TEST_CASE("text format helpers")
{
    CHECK(format_fixed(0.1) == "0.100000");
    CHECK(format_fixed(-2.5, 2) == "-2.50");
    CHECK(canonical(1.0 / 3.0) == 0.333333);
    CHECK(parse_real("1.5") == 1.5);
    CHECK_FALSE(parse_real("1.5x").has_value());
    CHECK_FALSE(parse_real("").has_value());
    CHECK(parse_integer("-12") == -12);
    CHECK(split_fields("a,,b").size() == 3);
}

TEST_CASE("emotion CSV round-trips byte for byte")
{
    std::ostringstream out;
    const std::vector<EmotionSample> samples{{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6},
                                             {0.016667, 1.0, 0.0, 0.999999, 0.5, 0.5, 0.5}};
    write_emotions(out, samples);
    CHECK(out.str().starts_with(std::string(kEmotionHeader) + "\n0.000000,0.100000,"));
    std::istringstream in(out.str());
    std::vector<RowDiagnostic> rejected;
    const auto back = read_emotions(in, "e.csv", rejected);
    CHECK(rejected.empty());
    CHECK(back == samples);
    std::ostringstream again;
    write_emotions(again, back);
    CHECK(again.str() == out.str());
}

TEST_CASE("random sessions round-trip byte for byte")
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<GazeSample> g;
        double t = 0.0;
        for (int i = 0; i < 200; ++i) {
            t += 0.001 + u(rng);
            const double lon = 6.28 * u(rng);
            const double lat = 3.0 * (u(rng) - 0.5);
            g.push_back({canonical(t), {canonical(102.73 * std::cos(lat) * std::sin(lon)), canonical(102.73 * std::sin(lat)),
                                        canonical(102.73 * std::cos(lat) * std::cos(lon))}});
        }
        std::ostringstream out;
        write_gazes(out, g);
        std::istringstream in(out.str());
        std::vector<RowDiagnostic> rejected;
        const auto back = read_gazes(in, "g.csv", 102.73, rejected);
        REQUIRE(rejected.empty());
        REQUIRE(back == g);
        std::ostringstream again;
        write_gazes(again, back);
        REQUIRE(again.str() == out.str());
    }
}

TEST_CASE("malformed rows are diagnosed with line and field")
{
    const std::string text = std::string(kEmotionHeader) +
                             "\n"
                             "0.0,0.1,0.2,0.3,0.4,0.5,0.6\n"
                             "0.1,0.1,0.2,1.3,0.4,0.5,0.6\n"
                             "0.2,0.1,abc,0.3,0.4,0.5,0.6\n"
                             "0.3,0.1,0.2,0.3\n"
                             "0.25,0.1,0.2,0.3,0.4,0.5,0.6\n"
                             "0.4,0.1,0.2,0.3,0.4,0.5,0.6\r\n"
                             "0.5,0.1,0.2,0.3,0.4,0.5,0.6\n";
    std::istringstream in(text);
    std::vector<RowDiagnostic> rejected;
    const auto rows = read_emotions(in, "e.csv", rejected);
    REQUIRE(rejected.size() == 4);
    CHECK(rejected[0].line == 3);
    CHECK(rejected[0].field == "interest");
    CHECK(rejected[1].line == 4);
    CHECK(rejected[1].field == "engagement");
    CHECK(rejected[2].line == 5);
    CHECK(rejected[3].line == 7);
    CHECK(rejected[3].reason.find("CRLF") != std::string::npos);
    CHECK(rows.size() == 3);
    CHECK(rejected[0].to_string().find("e.csv:3") != std::string::npos);
}

TEST_CASE("decreasing and negative timestamps are rejected")
{
    std::istringstream in(std::string(kGazeHeader) + "\n-0.1,0,0,102.73\n0.5,0,0,102.73\n0.4,0,0,102.73\n");
    std::vector<RowDiagnostic> rejected;
    const auto rows = read_gazes(in, "g.csv", 102.73, rejected);
    REQUIRE(rejected.size() == 2);
    CHECK(rejected[0].field == "t");
    CHECK(rejected[1].field == "t");
    CHECK(rows.size() == 1);
}

TEST_CASE("off-sphere gaze points are rejected")
{
    std::istringstream in(std::string(kGazeHeader) + "\n0.0,0,0,102.73\n0.1,0,0,103.5\n0.2,0,0,102.3\n");
    std::vector<RowDiagnostic> rejected;
    const auto rows = read_gazes(in, "g.csv", 102.73, rejected);
    REQUIRE(rejected.size() == 1);
    CHECK(rejected[0].line == 3);
    CHECK(rows.size() == 2);
}

TEST_CASE("missing header is a format error")
{
    std::istringstream in("0.0,0,0,102.73\n");
    std::vector<RowDiagnostic> rejected;
    CHECK_THROWS_AS(read_gazes(in, "g.csv", 102.73, rejected), FormatError);
    std::istringstream empty("");
    CHECK_THROWS_AS(read_emotions(empty, "e.csv", rejected), FormatError);
}

TEST_CASE("session directories round-trip")
{
    const fs::path dir = scratch("roundtrip");
    const SessionLog log = small_session(10.0);
    save_session(SessionFiles{dir}, log);
    const ParseResult r = load_session(SessionFiles{dir});
    CHECK(r.rejected.empty());
    CHECK(r.log == log);
    CHECK(r.log.emotions.size() == 600);
    CHECK(r.log.gazes.size() == 500);
}

TEST_CASE("a bad row fails the session unless skip_invalid is set")
{
    const fs::path dir = scratch("badrow");
    SessionLog log = small_session(10.0);
    save_session(SessionFiles{dir}, log);
    std::ifstream in(SessionFiles{dir}.gazes());
    std::stringstream buf;
    buf << in.rdbuf();
    std::string text = buf.str();
    const auto pos = text.find("\n0.100000,");
    REQUIRE(pos != std::string::npos);
    text.replace(text.find(',', pos + 1), 1, ",nan?,");
    write_text(SessionFiles{dir}.gazes(), text);

    try {
        load_session(SessionFiles{dir});
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        REQUIRE(e.diagnostics().size() >= 1);
        CHECK(e.diagnostics()[0].line == 7);
    }
    const ParseResult r = load_session(SessionFiles{dir}, {true});
    CHECK(r.rejected.size() == 1);
    CHECK(r.log.gazes.size() == 499);
}

TEST_CASE("short streams fail the count check")
{
    const fs::path dir = scratch("short");
    SessionLog log = small_session(10.0);
    log.info.duration_s = 20.0;
    save_session(SessionFiles{dir}, log);
    CHECK_THROWS_AS(load_session(SessionFiles{dir}), ValidationError);
}

TEST_CASE("expected counts")
{
    CHECK(expected_count(600.0, 60.0) == 36000);
    CHECK(expected_count(600.0, 50.0) == 30000);
}

TEST_CASE("zero-order hold carries the latest emotion sample")
{
    const SessionLog log = small_session(5.0);
    const auto aligned = align_streams(log);
    REQUIRE(aligned.size() == log.gazes.size());
    for (std::size_t i = 0; i < aligned.size(); ++i) {
        const double t = aligned[i].t;
        const EmotionSample* held = nullptr;
        for (const auto& e : log.emotions) {
            if (e.t <= t) {
                held = &e;
            }
        }
        REQUIRE(held != nullptr);
        REQUIRE(aligned[i].interest == held->interest);
        REQUIRE(aligned[i].stress == held->stress);
        REQUIRE(aligned[i].point == log.gazes[i].point);
    }
}

TEST_CASE("gaze before the first emotion sample cannot be aligned")
{
    SessionLog log = small_session(1.0);
    for (auto& e : log.emotions) {
        e.t += 0.5;
    }
    CHECK_THROWS_AS(align_streams(log), AlignmentError);
}
