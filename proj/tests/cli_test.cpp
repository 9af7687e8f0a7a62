#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <json.hpp>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

const fs::path kSourceDir = GAZE_AFFECT_SOURCE_DIR;

struct Run {
    int code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

fs::path scratch(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / ("gaze_affect_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

Run run(const std::string& args, const std::string& env = {})
{
    static int counter = 0;
    const fs::path base = fs::temp_directory_path() / ("gaze_affect_cli_run_" + std::to_string(counter++));
    const std::string cmd = env + " \"" + std::string(GAZE_AFFECT_CLI) + "\" " + args + " >\"" + base.string() +
                            ".out\" 2>\"" + base.string() + ".err\"";
    const int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(base.string() + ".out");
    r.err = slurp(base.string() + ".err");
    return r;
}

std::size_t line_count(const fs::path& p)
{
    std::ifstream in(p);
    std::size_t n = 0;
    for (std::string line; std::getline(in, line);) {
        ++n;
    }
    return n;
}

void write_text(const fs::path& p, const std::string& text)
{
    std::ofstream(p, std::ios::binary) << text;
}

const char* kScenario = R"({
  "duration_s": 60, "seed": 3, "jitter_std": 1.0,
  "lobes": [
    {"mu": [0.3, 0.2, 1.0], "kappa": 50, "amplitude": 1.0},
    {"mu": [-0.6, 0.1, 1.0], "kappa": 50, "amplitude": 1.0},
    {"mu": [0.0, -0.3, 1.0], "kappa": 50, "amplitude": 1.0},
    {"mu": [0.9, -0.2, 0.5], "kappa": 50, "amplitude": -1.0}
  ]
})";

}  // namespace

TEST_CASE("usage errors exit with 64")
{
    CHECK(run("").code == 64);
    CHECK(run("rank --no-such-flag x").code == 64);
    const Run r = run("frobnicate");
    CHECK(r.code == 64);
    CHECK(r.err.find("Usage") != std::string::npos);
}

TEST_CASE("check-fixture on the shipped table")
{
    const Run r = run("check-fixture \"" + (kSourceDir / "data" / "published_coordinates.csv").string() + "\"");
    CHECK(r.code == 0);
    CHECK(r.out.find("rows 90") != std::string::npos);
    CHECK(r.out.find("PASS") != std::string::npos);
}

TEST_CASE("check-fixture failures")
{
    const fs::path dir = scratch("fixture");
    write_text(dir / "empty.csv", "experiment,list,rank,x,y,z\n");
    const Run empty = run("check-fixture \"" + (dir / "empty.csv").string() + "\"");
    CHECK(empty.code == 1);
    CHECK(empty.err.find("no rows") != std::string::npos);

    std::string text = slurp(kSourceDir / "data" / "published_coordinates.csv");
    text += "4,preferred,16,0,0,50\n";
    write_text(dir / "extra.csv", text);
    const Run extra = run("check-fixture \"" + (dir / "extra.csv").string() + "\"");
    CHECK(extra.code == 1);
    CHECK(extra.out.find("FAIL") != std::string::npos);
    CHECK(extra.err.find("line 92") != std::string::npos);
    CHECK(extra.err.find("(0.00, 0.00, 50.00)") != std::string::npos);
}

TEST_CASE("stage by stage")
{
    const fs::path dir = scratch("stages");
    write_text(dir / "scenario.json", kScenario);
    const std::string d = dir.string();
    REQUIRE(run("simulate \"" + d + "/scenario.json\" -o \"" + d + "/sim\"").code == 0);
    REQUIRE(fs::exists(dir / "sim" / "session" / "gaze.csv"));
    CHECK(line_count(dir / "sim" / "session" / "gaze.csv") == 3001);

    const Run v = run("validate \"" + d + "/sim/session\"");
    CHECK(v.code == 0);

    REQUIRE(run("fuse \"" + d + "/sim/session\" --step 0.5 -o \"" + d + "/fused\"").code == 0);
    CHECK(fs::exists(dir / "fused" / "fused.csv"));
    CHECK(fs::exists(dir / "fused" / "dwell.csv"));

    const Run rk = run("rank \"" + d + "/fused\" --k-top 15 --k-bottom 15 --seed 4 -o \"" + d + "/ranked\"");
    REQUIRE(rk.code == 0);
    CHECK(line_count(dir / "ranked" / "top.csv") == 16);
    CHECK(line_count(dir / "ranked" / "bottom.csv") == 16);
    CHECK(fs::exists(dir / "ranked" / "model.json"));

    REQUIRE(run("render \"" + d + "/ranked\" --width 256 -o \"" + d + "/img\"").code == 0);
    CHECK(fs::file_size(dir / "img" / "heatmap.ppm") == 15 + 3 * 256 * 128);
    CHECK(fs::exists(dir / "img" / "mercator.ppm"));

    REQUIRE(run("render \"" + d + "/ranked\" --width 256 --format png -o \"" + d + "/png\"").code == 0);
    CHECK(fs::exists(dir / "png" / "heatmap.png"));

    const Run u = run("unfold \"" + d + "/img/heatmap.ppm\" -o \"" + d + "/img/unfolded.ppm\"");
    CHECK(u.code == 0);
    CHECK(slurp(dir / "img" / "unfolded.ppm") == slurp(dir / "img" / "mercator.ppm"));

    const Run oracle = run("rank \"" + d + "/fused\" --oracle-only -o \"" + d + "/oracle\"");
    CHECK(oracle.code == 0);
    CHECK_FALSE(fs::exists(dir / "oracle" / "model.json"));
}

TEST_CASE("seed falls back to the environment")
{
    const fs::path dir = scratch("seed");
    write_text(dir / "scenario.json", kScenario);
    const std::string d = dir.string();
    REQUIRE(run("simulate \"" + d + "/scenario.json\" -o \"" + d + "/sim\"").code == 0);
    REQUIRE(run("fuse \"" + d + "/sim/session\" --step 0.5 -o \"" + d + "/fused\"").code == 0);
    REQUIRE(run("rank \"" + d + "/fused\" --seed 77 -o \"" + d + "/a\"").code == 0);
    REQUIRE(run("rank \"" + d + "/fused\" -o \"" + d + "/b\"", "GAZE_AFFECT_SEED=77").code == 0);
    REQUIRE(run("rank \"" + d + "/fused\" -o \"" + d + "/c\"", "GAZE_AFFECT_SEED=78").code == 0);
    CHECK(slurp(dir / "a" / "model.json") == slurp(dir / "b" / "model.json"));
    CHECK(slurp(dir / "a" / "model.json") != slurp(dir / "c" / "model.json"));
    CHECK(run("rank \"" + d + "/fused\" -o \"" + d + "/e\"", "GAZE_AFFECT_SEED=abc").code == 1);
}

TEST_CASE("validate names the offending row")
{
    const fs::path dir = scratch("invalid");
    write_text(dir / "scenario.json", kScenario);
    const std::string d = dir.string();
    REQUIRE(run("simulate \"" + d + "/scenario.json\" -o \"" + d + "/sim\"").code == 0);
    const fs::path gaze = dir / "sim" / "session" / "gaze.csv";
    std::string text = slurp(gaze);
    const auto start = text.find("\n0.100000,") + 1;
    const auto end = text.find('\n', start);
    text.replace(start, end - start, "0.100000,0.000000,0.000000,50.000000");
    write_text(gaze, text);

    const Run r = run("validate \"" + d + "/sim/session\"");
    CHECK(r.code == 1);
    CHECK(r.err.find("gaze.csv:7") != std::string::npos);
    CHECK(run("validate --skip-invalid \"" + d + "/sim/session\"").code == 0);
    const Run fuse = run("fuse \"" + d + "/sim/session\" -o \"" + d + "/f\"");
    CHECK(fuse.code == 1);
}

TEST_CASE("pipeline from a manifest")
{
    const fs::path dir = scratch("pipeline");
    write_text(dir / "scenario.json", kScenario);
    write_text(dir / "run.json", R"({"scenario": "scenario.json", "output_dir": "out", "dwell_step": 0.5,
        "ranking": {"k_top": 15, "k_bottom": 15, "seed": 1},
        "heatmap": {"width": 256, "height": 128}})");
    const Run r = run("pipeline --manifest \"" + (dir / "run.json").string() + "\"");
    REQUIRE(r.code == 0);
    for (const char* f : {"top.csv", "bottom.csv", "heatmap.ppm", "mercator.ppm", "model.json", "pipeline_report.json"}) {
        CHECK_MESSAGE(fs::exists(dir / "out" / f), f);
    }
    CHECK(line_count(dir / "out" / "top.csv") == 16);
    const auto report = nlohmann::json::parse(slurp(dir / "out" / "pipeline_report.json"));
    CHECK(report.contains("manifest_hash"));
    const auto model = nlohmann::json::parse(slurp(dir / "out" / "model.json"));
    CHECK(model.at("manifest_hash") == report.at("manifest_hash"));

    write_text(dir / "missing.json", R"({"session": "nowhere"})");
    CHECK(run("pipeline --manifest \"" + (dir / "missing.json").string() + "\"").code == 1);
    write_text(dir / "both.json", R"({"session": "out", "scenario": "scenario.json"})");
    CHECK(run("pipeline --manifest \"" + (dir / "both.json").string() + "\"").code == 1);
}

TEST_CASE("too few bins is a named stage failure")
{
    const fs::path dir = scratch("fewbins");
    write_text(dir / "scenario.json", R"({"duration_s": 2, "lobes": [{"mu": [0,0,1], "kappa": 50, "amplitude": 1}]})");
    write_text(dir / "run.json", R"({"scenario": "scenario.json", "output_dir": "out", "dwell_step": 5.0})");
    const Run r = run("pipeline --manifest \"" + (dir / "run.json").string() + "\"");
    CHECK(r.code != 0);
    CHECK(r.err.find("rank") != std::string::npos);
}
