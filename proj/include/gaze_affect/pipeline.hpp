#pragma once

// Stage orchestration behind the command-line tool. Every stage reads its
// inputs from files, writes its artifacts plus `<stage>_report.json` into an
// output directory, and returns the report.

#include "gaze_affect/fusion_ranking.hpp"
#include "gaze_affect/heatmap.hpp"
#include "gaze_affect/image.hpp"
#include "gaze_affect/session_io.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace gaze_affect {

struct RankingParams {
    std::size_t k_top = kDefaultTopK;
    std::size_t k_bottom = kDefaultTopK;
    std::uint64_t seed = 0;
    int epochs = kDefaultEpochs;
    double learning_rate = kDefaultLearningRate;
    OracleWeights weights;
    bool oracle_only = false;  // rank by oracle_score without training
};

struct RenderParams {
    HeatmapParams grid;
    double lat_clamp = kDefaultLatClamp;
    ColorRamp ramp;
    ImageFormat format = ImageFormat::ppm;
    std::optional<std::filesystem::path> mask;
    std::optional<std::filesystem::path> background;
    double background_opacity = 0.6;  // heatmap opacity over the background
};

struct RunManifest {
    std::filesystem::path base_dir;  // relative paths resolve against this
    std::optional<std::filesystem::path> session_dir;
    std::optional<std::filesystem::path> scenario;
    std::filesystem::path output_dir = "out";
    std::optional<double> sphere_radius;
    double dwell_step = kDefaultDwellStep;
    RankingParams ranking;
    RenderParams render;
    bool skip_invalid = false;
    std::string hash;  // SHA-256 of the manifest file bytes

    std::filesystem::path resolve(const std::filesystem::path& p) const;
};

/// Parses a run manifest; every referenced input path must exist.
RunManifest load_run_manifest(const std::filesystem::path& path);

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Exit codes shared by all subcommands.
enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitRuntime = 2, kExitUsage = 64 };

/// Error raised by a stage, naming it.
class StageError : public Error {
public:
    StageError(std::string stage, int exit_code, const std::string& message);

    const std::string& stage() const noexcept { return stage_; }
    int exit_code() const noexcept { return exit_code_; }

private:
    std::string stage_;
    int exit_code_;
};

using Report = nlohmann::ordered_json;

Report run_simulate(const std::filesystem::path& scenario, const std::filesystem::path& out_dir,
                    std::optional<std::uint64_t> seed, const std::string& provenance = {});

/// Throws ValidationError (with every rejected row) when the session is invalid.
Report run_validate(const std::filesystem::path& session_dir, const ParseOptions& options,
                    std::optional<double> sphere_radius = std::nullopt);

Report run_fuse(const std::filesystem::path& session_dir, const std::filesystem::path& out_dir, double step,
                const ParseOptions& options, std::optional<double> sphere_radius = std::nullopt,
                const std::string& provenance = {});

/// `fused_dir` holds fused.csv and fused.json from run_fuse.
Report run_rank(const std::filesystem::path& fused_dir, const std::filesystem::path& out_dir,
                const RankingParams& params, const std::string& provenance = {});

/// `ranked_dir` holds top.csv and bottom.csv from run_rank.
Report run_render(const std::filesystem::path& ranked_dir, const std::filesystem::path& out_dir,
                  const RenderParams& params, const std::string& provenance = {});

Report run_unfold(const std::filesystem::path& equirect_ppm, const std::filesystem::path& out_path,
                  double lat_clamp, ImageFormat format, const std::string& provenance = {});

/// simulate (when the manifest names a scenario) -> fuse -> rank -> render.
Report run_pipeline(const RunManifest& manifest);

/// Seed precedence: explicit value, then GAZE_AFFECT_SEED, then 0.
std::uint64_t resolve_seed(std::optional<std::uint64_t> explicit_seed);

}  // namespace gaze_affect
