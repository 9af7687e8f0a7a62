// gaze-affect: command-line front end for the fusion / ranking / heatmap pipeline.

#include "gaze_affect/fixture.hpp"
#include "gaze_affect/pipeline.hpp"
#include "gaze_affect/text_format.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace gaze_affect;

namespace {

struct CommonFlags {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> k_top;
    std::optional<std::size_t> k_bottom;
    std::optional<double> step;
    std::optional<double> sigma;
    std::optional<int> width;
    std::optional<int> height;
    std::optional<std::string> format;
    std::optional<std::string> mask;
    std::optional<std::string> background;
    bool skip_invalid = false;
};

void add_render_flags(CLI::App* cmd, CommonFlags& f)
{
    cmd->add_option("--sigma", f.sigma, "Kernel width in radians");
    cmd->add_option("--width", f.width, "Equirectangular width in pixels");
    cmd->add_option("--height", f.height, "Equirectangular height in pixels");
    cmd->add_option("--format", f.format, "ppm or png")->check(CLI::IsMember({"ppm", "png"}));
    cmd->add_option("--mask", f.mask, "PGM (P5) mask, 0 = hidden");
    cmd->add_option("--background", f.background, "Equirectangular PPM composited under the heatmap");
}

void apply_render_flags(const CommonFlags& f, RenderParams& p)
{
    if (f.sigma) {
        p.grid.kernel_sigma = *f.sigma;
    }
    if (f.width) {
        p.grid.width = *f.width;
        if (!f.height) {
            p.grid.height = *f.width / 2;
        }
    }
    if (f.height) {
        p.grid.height = *f.height;
        if (!f.width) {
            p.grid.width = *f.height * 2;
        }
    }
    if (f.format) {
        p.format = parse_image_format(*f.format);
    }
    if (f.mask) {
        p.mask = fs::path(*f.mask);
    }
    if (f.background) {
        p.background = fs::path(*f.background);
    }
}

void apply_rank_flags(const CommonFlags& f, RankingParams& p)
{
    if (f.k_top) {
        p.k_top = *f.k_top;
    }
    if (f.k_bottom) {
        p.k_bottom = *f.k_bottom;
    }
}

void print_report(const Report& r)
{
    std::cout << r.dump(2) << '\n';
}

int report_failure(const std::string& stage, int code, const std::exception& e)
{
    std::cerr << "gaze-affect: " << stage << " failed: " << e.what() << '\n';
    if (const auto* v = dynamic_cast<const ValidationError*>(&e)) {
        for (const auto& d : v->diagnostics()) {
            std::cerr << "  " << d.to_string() << '\n';
        }
    }
    return code;
}

template <typename Fn>
int run_stage(const std::string& stage, Fn&& fn)
{
    try {
        fn();
        return kExitOk;
    } catch (const StageError& e) {
        return report_failure(e.stage(), e.exit_code(), e);
    } catch (const ValidationError& e) {
        return report_failure(stage, kExitValidation, e);
    } catch (const FormatError& e) {
        return report_failure(stage, kExitValidation, e);
    } catch (const std::exception& e) {
        return report_failure(stage, kExitRuntime, e);
    }
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Fuse EEG emotion indices with VR gaze, rank preferred regions, and render spherical heatmaps"};
    app.require_subcommand(1);
    CommonFlags flags;
    std::string manifest_path;

    auto* simulate = app.add_subcommand("simulate", "Generate a ground-truth session from a scenario file");
    std::string scenario_path;
    std::string out_dir = "out";
    simulate->add_option("scenario", scenario_path, "Scenario JSON")->required()->check(CLI::ExistingFile);
    simulate->add_option("-o,--out", out_dir, "Output directory");
    simulate->add_option("--seed", flags.seed, "Override the scenario seed");

    auto* validate = app.add_subcommand("validate", "Parse and validate a session directory");
    std::string session_dir;
    validate->add_option("session", session_dir, "Session directory")->required();
    validate->add_flag("--skip-invalid", flags.skip_invalid, "Drop rejected rows instead of failing");

    auto* fuse = app.add_subcommand("fuse", "Align streams, accumulate dwell and build the feature dataset");
    fuse->add_option("session", session_dir, "Session directory")->required();
    fuse->add_option("-o,--out", out_dir, "Output directory");
    fuse->add_option("--step", flags.step, "Dwell quantization step (scene units)");
    fuse->add_flag("--skip-invalid", flags.skip_invalid, "Drop rejected rows instead of failing");

    auto* rank = app.add_subcommand("rank", "Train the preference model and extract top/bottom points");
    std::string fused_dir;
    bool oracle_only = false;
    rank->add_option("fused", fused_dir, "Directory holding fused.csv and fused.json")->required();
    rank->add_option("-o,--out", out_dir, "Output directory");
    rank->add_option("--seed", flags.seed, "SGD shuffle seed (falls back to GAZE_AFFECT_SEED)");
    rank->add_option("--k-top", flags.k_top, "Number of preferred points");
    rank->add_option("--k-bottom", flags.k_bottom, "Number of least preferred points");
    rank->add_flag("--oracle-only", oracle_only, "Rank by the composite target without training");

    auto* render = app.add_subcommand("render", "Splat ranked points and write equirectangular + Mercator images");
    std::string ranked_dir;
    render->add_option("ranked", ranked_dir, "Directory holding top.csv and bottom.csv")->required();
    render->add_option("-o,--out", out_dir, "Output directory");
    add_render_flags(render, flags);

    auto* unfold = app.add_subcommand("unfold", "Unfold an equirectangular heatmap image to Mercator");
    std::string heatmap_path;
    std::string unfold_out = "mercator.ppm";
    double lat_clamp_deg = 85.0;
    unfold->add_option("heatmap", heatmap_path, "Equirectangular PPM")->required()->check(CLI::ExistingFile);
    unfold->add_option("-o,--out", unfold_out, "Output image path");
    unfold->add_option("--lat-clamp", lat_clamp_deg, "Latitude clamp in degrees");
    unfold->add_option("--format", flags.format, "ppm or png")->check(CLI::IsMember({"ppm", "png"}));

    auto* pipeline = app.add_subcommand("pipeline", "Run every stage from a run manifest");
    pipeline->add_option("--manifest", manifest_path, "Run manifest JSON")->required()->check(CLI::ExistingFile);
    pipeline->add_option("--seed", flags.seed, "Override the ranking seed");
    pipeline->add_option("--k-top", flags.k_top, "Number of preferred points");
    pipeline->add_option("--k-bottom", flags.k_bottom, "Number of least preferred points");
    pipeline->add_option("--step", flags.step, "Dwell quantization step");
    pipeline->add_flag("--skip-invalid", flags.skip_invalid, "Drop rejected rows instead of failing");
    add_render_flags(pipeline, flags);

    auto* check = app.add_subcommand("check-fixture", "Check that published coordinates share one sphere");
    std::string fixture_path;
    check->add_option("fixture", fixture_path, "Fixture CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        std::cerr << app.help();
        return kExitUsage;
    }

    if (simulate->parsed()) {
        return run_stage("simulate", [&] { print_report(run_simulate(scenario_path, out_dir, flags.seed)); });
    }
    if (validate->parsed()) {
        return run_stage("validate", [&] { print_report(run_validate(session_dir, {flags.skip_invalid})); });
    }
    if (fuse->parsed()) {
        return run_stage("fuse", [&] {
            print_report(run_fuse(session_dir, out_dir, flags.step.value_or(kDefaultDwellStep), {flags.skip_invalid}));
        });
    }
    if (rank->parsed()) {
        return run_stage("rank", [&] {
            RankingParams params;
            apply_rank_flags(flags, params);
            params.seed = resolve_seed(flags.seed);
            params.oracle_only = oracle_only;
            print_report(run_rank(fused_dir, out_dir, params));
        });
    }
    if (render->parsed()) {
        return run_stage("render", [&] {
            RenderParams params;
            apply_render_flags(flags, params);
            print_report(run_render(ranked_dir, out_dir, params));
        });
    }
    if (unfold->parsed()) {
        return run_stage("unfold", [&] {
            const auto format = parse_image_format(flags.format.value_or("ppm"));
            print_report(run_unfold(heatmap_path, unfold_out, lat_clamp_deg * std::numbers::pi / 180.0, format));
        });
    }
    if (pipeline->parsed()) {
        return run_stage("pipeline", [&] {
            RunManifest m = load_run_manifest(manifest_path);
            if (flags.seed) {
                m.ranking.seed = *flags.seed;
            }
            apply_rank_flags(flags, m.ranking);
            if (flags.step) {
                m.dwell_step = *flags.step;
            }
            m.skip_invalid = m.skip_invalid || flags.skip_invalid;
            const bool had_mask = flags.mask.has_value();
            const bool had_background = flags.background.has_value();
            apply_render_flags(flags, m.render);
            // Paths given on the command line are relative to the manifest's directory too.
            if (had_mask) {
                m.render.mask = m.resolve(*flags.mask);
            }
            if (had_background) {
                m.render.background = m.resolve(*flags.background);
            }
            print_report(run_pipeline(m));
        });
    }
    if (check->parsed()) {
        try {
            const FixtureReport r = check_fixture_file(fixture_path);
            for (std::size_t i = 0; i < r.points.size(); ++i) {
                const auto& p = r.points[i];
                std::cout << "exp " << p.experiment << ' ' << p.list << " #" << p.rank << " norm "
                          << format_fixed(r.norms[i], 3) << '\n';
            }
            std::cout << "rows " << r.points.size() << ", mean radius " << format_fixed(r.mean_radius, 3)
                      << ", max deviation " << format_fixed(r.max_deviation, 3) << '\n';
            for (const std::size_t i : r.failures) {
                const auto& p = r.points[i];
                std::cerr << "off-sphere point at line " << p.line << ": (" << format_fixed(p.point.x, 2) << ", "
                          << format_fixed(p.point.y, 2) << ", " << format_fixed(p.point.z, 2) << ") norm "
                          << format_fixed(r.norms[i], 3) << '\n';
            }
            std::cout << (r.passed() ? "PASS" : "FAIL") << '\n';
            return r.passed() ? kExitOk : kExitValidation;
        } catch (const std::exception& e) {
            return report_failure("check-fixture", kExitValidation, e);
        }
    }
    return kExitUsage;
}
