#include "gaze_affect/pipeline.hpp"

#include "gaze_affect/dwell.hpp"
#include "gaze_affect/simulator.hpp"
#include "gaze_affect/stats.hpp"
#include "gaze_affect/text_format.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

namespace gaze_affect {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::ofstream open_output(const fs::path& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    return out;
}

std::ifstream open_input(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open " + path.string());
    }
    return in;
}

std::string read_all(const fs::path& path)
{
    auto in = open_input(path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_report(const fs::path& out_dir, const std::string& stage, const Report& report)
{
    auto out = open_output(out_dir / (stage + "_report.json"));
    out << report.dump(2) << '\n';
}

Report start_report(const std::string& stage, const std::string& provenance)
{
    Report r;
    r["stage"] = stage;
    r["manifest_hash"] = provenance;
    return r;
}

void record_outputs(Report& report, const fs::path& out_dir, std::initializer_list<std::string> names)
{
    for (const auto& name : names) {
        report["outputs"][name] = sha256_file(out_dir / name);
    }
}

const char* extension(ImageFormat f)
{
    return f == ImageFormat::png ? ".png" : ".ppm";
}

Report json_ramp(const ColorRamp& ramp)
{
    Report stops = Report::array();
    for (const auto& s : ramp.stops()) {
        stops.push_back({s.preference, {s.color.r, s.color.g, s.color.b}});
    }
    return stops;
}

ColorRamp ramp_from_json(const nlohmann::json& j)
{
    std::vector<ColorStop> stops;
    for (const auto& s : j) {
        const auto rgb = s.at(1).get<std::array<int, 3>>();
        stops.push_back({s.at(0).get<double>(),
                         {static_cast<std::uint8_t>(rgb[0]), static_cast<std::uint8_t>(rgb[1]),
                          static_cast<std::uint8_t>(rgb[2])}});
    }
    return ColorRamp(std::move(stops));
}

std::vector<RankedPoint> read_ranked_file(const fs::path& path)
{
    auto in = open_input(path);
    return read_ranked_csv(in, path.string());
}

}  // namespace

StageError::StageError(std::string stage, int exit_code, const std::string& message)
    : Error(stage + ": " + message), stage_(std::move(stage)), exit_code_(exit_code)
{
}

std::string sha256_hex(std::string_view bytes)
{
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
        EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1) {
        throw Error("sha256 failed");
    }
    std::ostringstream hex;
    for (unsigned int i = 0; i < len; ++i) {
        hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
    }
    return hex.str();
}

std::string sha256_file(const fs::path& path)
{
    return sha256_hex(read_all(path));
}

std::uint64_t resolve_seed(std::optional<std::uint64_t> explicit_seed)
{
    if (explicit_seed) {
        return *explicit_seed;
    }
    if (const char* env = std::getenv("GAZE_AFFECT_SEED"); env != nullptr && *env != '\0') {
        const auto v = parse_integer(env);
        if (!v || *v < 0) {
            throw FormatError(std::string("GAZE_AFFECT_SEED is not a non-negative integer: '") + env + "'");
        }
        return static_cast<std::uint64_t>(*v);
    }
    return 0;
}

fs::path RunManifest::resolve(const fs::path& p) const
{
    return p.is_absolute() ? p : base_dir / p;
}

RunManifest load_run_manifest(const fs::path& path)
{
    const std::string text = read_all(path);
    RunManifest m;
    m.base_dir = path.parent_path().empty() ? fs::path(".") : path.parent_path();
    m.hash = sha256_hex(text);
    try {
        const auto j = nlohmann::json::parse(text);
        if (j.contains("session")) {
            m.session_dir = j.at("session").get<std::string>();
        }
        if (j.contains("scenario")) {
            m.scenario = j.at("scenario").get<std::string>();
        }
        if (m.session_dir.has_value() == m.scenario.has_value()) {
            throw FormatError(path.string() + ": exactly one of 'session' or 'scenario' is required");
        }
        m.output_dir = j.value("output_dir", std::string("out"));
        if (j.contains("sphere_radius")) {
            m.sphere_radius = j.at("sphere_radius").get<double>();
        }
        m.dwell_step = j.value("dwell_step", kDefaultDwellStep);
        m.skip_invalid = j.value("skip_invalid", false);

        const auto rk = j.value("ranking", nlohmann::json::object());
        m.ranking.k_top = rk.value("k_top", kDefaultTopK);
        m.ranking.k_bottom = rk.value("k_bottom", kDefaultTopK);
        m.ranking.epochs = rk.value("epochs", kDefaultEpochs);
        m.ranking.learning_rate = rk.value("learning_rate", kDefaultLearningRate);
        m.ranking.oracle_only = rk.value("oracle_only", false);
        m.ranking.seed = resolve_seed(rk.contains("seed") ? std::optional(rk.at("seed").get<std::uint64_t>())
                                                          : std::nullopt);
        if (rk.contains("oracle_weights")) {
            const auto& w = rk.at("oracle_weights");
            m.ranking.weights = {w.value("interest", 1.0), w.value("stress", 1.0), w.value("dwell", 1.0)};
        }

        const auto hm = j.value("heatmap", nlohmann::json::object());
        m.render.grid.width = hm.value("width", m.render.grid.width);
        m.render.grid.height = hm.value("height", m.render.grid.height);
        m.render.grid.kernel_sigma = hm.value("sigma", m.render.grid.kernel_sigma);
        m.render.lat_clamp = hm.value("lat_clamp_deg", 85.0) * std::numbers::pi / 180.0;
        m.render.format = parse_image_format(hm.value("format", std::string("ppm")));
        m.render.background_opacity = hm.value("opacity", m.render.background_opacity);
        if (hm.contains("ramp")) {
            m.render.ramp = ramp_from_json(hm.at("ramp"));
        }
        if (hm.contains("mask")) {
            m.render.mask = m.resolve(hm.at("mask").get<std::string>());
        }
        if (hm.contains("background")) {
            m.render.background = m.resolve(hm.at("background").get<std::string>());
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    m.render.grid.validate();

    const auto require = [&](const fs::path& p) {
        if (!fs::exists(p)) {
            throw ValidationError({{path.string(), 0, "", "referenced path does not exist: " + p.string()}});
        }
    };
    if (m.session_dir) {
        m.session_dir = m.resolve(*m.session_dir);
        require(*m.session_dir);
    }
    if (m.scenario) {
        m.scenario = m.resolve(*m.scenario);
        require(*m.scenario);
    }
    if (m.render.mask) {
        require(*m.render.mask);
    }
    if (m.render.background) {
        require(*m.render.background);
    }
    m.output_dir = m.resolve(m.output_dir);
    return m;
}

Report run_simulate(const fs::path& scenario_path, const fs::path& out_dir, std::optional<std::uint64_t> seed,
                    const std::string& provenance)
{
    const auto start = Clock::now();
    Scenario scenario = read_scenario(scenario_path);
    if (seed) {
        scenario.config.seed = *seed;
    }
    const std::string hash = provenance.empty() ? sha256_file(scenario_path) : provenance;
    const Scanpath path = simulate_scanpath(scenario.field, scenario.config);
    const auto emotions = simulate_emotions(scenario.field, path, scenario.config);
    const fs::path session_dir = out_dir / "session";
    emit_session(path, emotions, make_manifest(scenario.config), session_dir);

    Report r = start_report("simulate", hash);
    r["params"] = {{"scenario", scenario_path.string()},
                   {"seed", scenario.config.seed},
                   {"lobes", scenario.field.lobes.size()},
                   {"duration_s", scenario.config.duration_s}};
    r["counts"] = {{"emotion_samples", emotions.size()}, {"gaze_samples", path.gazes.size()}};
    record_outputs(r, session_dir, {"emotions.csv", "gaze.csv", "session.json"});
    r["wall_time_s"] = seconds_since(start);
    write_report(out_dir, "simulate", r);
    return r;
}

Report run_validate(const fs::path& session_dir, const ParseOptions& options, std::optional<double> sphere_radius)
{
    const auto start = Clock::now();
    const SessionFiles files{session_dir};
    SessionManifest manifest = read_manifest(files.manifest());
    if (sphere_radius) {
        manifest.sphere_radius = *sphere_radius;
    }
    const ParseResult parsed = parse_session(files.emotions(), files.gazes(), manifest, options);
    Report r = start_report("validate", sha256_file(files.manifest()));
    r["counts"] = {{"emotion_samples", parsed.log.emotions.size()},
                   {"gaze_samples", parsed.log.gazes.size()},
                   {"rejected_rows", parsed.rejected.size()}};
    Report rejected = Report::array();
    for (const auto& d : parsed.rejected) {
        rejected.push_back(d.to_string());
    }
    r["rejected"] = rejected;
    r["wall_time_s"] = seconds_since(start);
    return r;
}

Report run_fuse(const fs::path& session_dir, const fs::path& out_dir, double step, const ParseOptions& options,
                std::optional<double> sphere_radius, const std::string& provenance)
{
    const auto start = Clock::now();
    const SessionFiles files{session_dir};
    SessionManifest manifest = read_manifest(files.manifest());
    if (sphere_radius) {
        manifest.sphere_radius = *sphere_radius;
    }
    const ParseResult parsed = parse_session(files.emotions(), files.gazes(), manifest, options);
    const auto aligned = align_streams(parsed.log);
    const DwellMap dwell = accumulate_dwell(parsed.log.gazes, manifest.gaze_rate_hz, step);
    const Dataset ds = build_dataset(aligned, dwell);

    const std::string hash =
        provenance.empty()
            ? sha256_hex(sha256_file(files.manifest()) + sha256_file(files.emotions()) + sha256_file(files.gazes()) +
                         format_fixed(step, 9))
            : provenance;

    fs::create_directories(out_dir);
    {
        auto out = open_output(out_dir / "fused.csv");
        write_fused_csv(out, ds);
    }
    {
        auto out = open_output(out_dir / "dwell.csv");
        write_dwell_csv(out, dwell);
    }
    {
        Report meta;
        meta["manifest_hash"] = hash;
        meta["session_id"] = manifest.session_id;
        meta["location_id"] = manifest.location_id;
        meta["step"] = step;
        meta["gaze_rate_hz"] = manifest.gaze_rate_hz;
        meta["sphere_radius"] = manifest.sphere_radius;
        auto out = open_output(out_dir / "fused.json");
        out << meta.dump(2) << '\n';
    }

    Report r = start_report("fuse", hash);
    r["params"] = {{"session", session_dir.string()}, {"step", step}, {"skip_invalid", options.skip_invalid}};
    r["counts"] = {{"emotion_samples", parsed.log.emotions.size()},
                   {"gaze_samples", parsed.log.gazes.size()},
                   {"rejected_rows", parsed.rejected.size()},
                   {"fused_records", ds.records.size()},
                   {"dwell_bins", dwell.bins.size()}};
    record_outputs(r, out_dir, {"fused.csv", "dwell.csv", "fused.json"});
    r["wall_time_s"] = seconds_since(start);
    write_report(out_dir, "fuse", r);
    return r;
}

Report run_rank(const fs::path& fused_dir, const fs::path& out_dir, const RankingParams& params,
                const std::string& provenance)
{
    const auto start = Clock::now();
    const auto meta = nlohmann::json::parse(read_all(fused_dir / "fused.json"));
    const double step = meta.at("step").get<double>();
    std::vector<FusedRecord> records;
    {
        auto in = open_input(fused_dir / "fused.csv");
        records = read_fused_csv(in, (fused_dir / "fused.csv").string(), step);
    }
    const Dataset ds = featurize(std::move(records));

    std::vector<double> targets;
    targets.reserve(ds.features.size());
    for (const auto& f : ds.features) {
        targets.push_back(oracle_score(f, params.weights));
    }

    const std::string hash = provenance.empty() ? meta.value("manifest_hash", std::string{}) : provenance;
    fs::create_directories(out_dir);

    std::vector<double> scores;
    std::optional<RankingModel> model;
    if (params.oracle_only) {
        scores = targets;
    } else {
        model = train(ds.features, targets, {params.learning_rate, params.epochs, params.seed});
        scores.reserve(ds.features.size());
        for (const auto& f : ds.features) {
            scores.push_back(predict(*model, f));
        }
        auto out = open_output(out_dir / "model.json");
        write_model_json(out, *model, hash);
    }

    const auto scored = score_records(ds, scores);
    const RankedExtremes ranked = rank_extremes(scored, params.k_top, params.k_bottom);
    {
        auto out = open_output(out_dir / "top.csv");
        write_ranked_csv(out, ranked.top);
    }
    {
        auto out = open_output(out_dir / "bottom.csv");
        write_ranked_csv(out, ranked.bottom);
    }

    Report r = start_report("rank", hash);
    r["params"] = {{"k_top", params.k_top},
                   {"k_bottom", params.k_bottom},
                   {"seed", params.seed},
                   {"epochs", params.epochs},
                   {"learning_rate", params.learning_rate},
                   {"oracle_weights",
                    {{"interest", params.weights.interest},
                     {"stress", params.weights.stress},
                     {"dwell", params.weights.dwell}}},
                   {"oracle_only", params.oracle_only}};
    r["counts"] = {{"records", ds.records.size()}, {"top", ranked.top.size()}, {"bottom", ranked.bottom.size()}};
    if (model) {
        r["model"] = {{"w", model->w},
                      {"b", model->b},
                      {"final_loss", model->loss_trace.back()},
                      {"spearman_vs_oracle", spearman(scores, targets)}};
        record_outputs(r, out_dir, {"top.csv", "bottom.csv", "model.json"});
    } else {
        record_outputs(r, out_dir, {"top.csv", "bottom.csv"});
    }
    r["wall_time_s"] = seconds_since(start);
    write_report(out_dir, "rank", r);
    return r;
}

Report run_render(const fs::path& ranked_dir, const fs::path& out_dir, const RenderParams& params,
                  const std::string& provenance)
{
    const auto start = Clock::now();
    std::vector<RankedPoint> points = read_ranked_file(ranked_dir / "top.csv");
    const auto bottom = read_ranked_file(ranked_dir / "bottom.csv");
    points.insert(points.end(), bottom.begin(), bottom.end());

    const SphericalHeatmap hm = splat(std::span<const RankedPoint>(points), params.grid);
    std::optional<Mask> mask;
    if (params.mask) {
        mask = read_pgm_mask_file(*params.mask);
    }
    RgbImage equirect = colorize(hm, params.ramp, mask);
    if (params.background) {
        equirect = blend_over(equirect, read_ppm_file(*params.background), params.background_opacity);
    }
    const RgbImage mercator = unfold_mercator(equirect, params.lat_clamp);

    fs::create_directories(out_dir);
    const std::string equirect_name = std::string("heatmap") + extension(params.format);
    const std::string mercator_name = std::string("mercator") + extension(params.format);
    write_image(equirect, out_dir / equirect_name, params.format);
    write_image(mercator, out_dir / mercator_name, params.format);

    double lo = 0.0;
    double hi = 0.0;
    for (const double v : hm.values()) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    Report r = start_report("render", provenance);
    r["params"] = {{"width", params.grid.width},
                   {"height", params.grid.height},
                   {"sigma", params.grid.kernel_sigma},
                   {"lat_clamp", params.lat_clamp},
                   {"ramp", json_ramp(params.ramp)},
                   {"format", params.format == ImageFormat::png ? "png" : "ppm"},
                   {"mask", params.mask ? params.mask->string() : ""},
                   {"background", params.background ? params.background->string() : ""}};
    r["counts"] = {{"points", points.size()},
                   {"mercator_height", mercator.height()},
                   {"min_value", lo},
                   {"max_value", hi}};
    record_outputs(r, out_dir, {equirect_name, mercator_name});
    r["wall_time_s"] = seconds_since(start);
    write_report(out_dir, "render", r);
    return r;
}

Report run_unfold(const fs::path& equirect_ppm, const fs::path& out_path, double lat_clamp, ImageFormat format,
                  const std::string& provenance)
{
    const auto start = Clock::now();
    const RgbImage equirect = read_ppm_file(equirect_ppm);
    const RgbImage mercator = unfold_mercator(equirect, lat_clamp);
    const fs::path out_dir = out_path.parent_path().empty() ? fs::path(".") : out_path.parent_path();
    fs::create_directories(out_dir);
    write_image(mercator, out_path, format);
    Report r = start_report("unfold", provenance.empty() ? sha256_file(equirect_ppm) : provenance);
    r["params"] = {{"input", equirect_ppm.string()}, {"lat_clamp", lat_clamp}};
    r["counts"] = {{"width", mercator.width()}, {"height", mercator.height()}};
    r["outputs"][out_path.filename().string()] = sha256_file(out_path);
    r["wall_time_s"] = seconds_since(start);
    write_report(out_dir, "unfold", r);
    return r;
}

Report run_pipeline(const RunManifest& m)
{
    const auto start = Clock::now();
    const fs::path out = m.output_dir;
    fs::create_directories(out);
    Report r = start_report("pipeline", m.hash);

    const auto stage = [&](const std::string& name, auto&& fn) {
        const auto stage_start = Clock::now();
        try {
            r["stages"][name] = fn();
        } catch (const ValidationError& e) {
            throw StageError(name, kExitValidation, e.what());
        } catch (const FormatError& e) {
            throw StageError(name, kExitValidation, e.what());
        } catch (const std::exception& e) {
            throw StageError(name, kExitRuntime, e.what());
        }
        r["timings"][name] = seconds_since(stage_start);
    };

    fs::path session_dir;
    if (m.scenario) {
        stage("simulate", [&] { return run_simulate(*m.scenario, out, std::nullopt, m.hash); });
        session_dir = out / "session";
    } else {
        session_dir = *m.session_dir;
    }
    const ParseOptions options{m.skip_invalid};
    stage("fuse", [&] { return run_fuse(session_dir, out, m.dwell_step, options, m.sphere_radius, m.hash); });
    stage("rank", [&] { return run_rank(out, out, m.ranking, m.hash); });
    stage("render", [&] { return run_render(out, out, m.render, m.hash); });

    r["wall_time_s"] = seconds_since(start);
    write_report(out, "pipeline", r);
    return r;
}

}  // namespace gaze_affect
