#include "gaze_affect/fusion_ranking.hpp"

#include "gaze_affect/text_format.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <string>

namespace gaze_affect {
namespace {

using nlohmann::json;

bool ranks_before(const ScoredRecord& a, const ScoredRecord& b, bool descending)
{
    if (a.score != b.score) {
        return descending ? a.score > b.score : a.score < b.score;
    }
    if (a.t != b.t) {
        return a.t < b.t;
    }
    return a.key < b.key;
}

std::vector<RankedPoint> take(const std::vector<ScoredRecord>& sorted, std::size_t k)
{
    std::vector<RankedPoint> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        const auto& r = sorted[i];
        out.push_back({static_cast<int>(i + 1), r.point, r.score, preference_from_score(r.score), r.t, r.key});
    }
    return out;
}

std::string expect_line(std::istream& in, std::string_view source, std::string_view header)
{
    std::string line;
    if (!std::getline(in, line) || line != header) {
        throw FormatError(std::string(source) + ": missing or malformed header, expected '" + std::string(header) +
                          "'");
    }
    return line;
}

std::vector<double> parse_row(std::string_view source, std::size_t line_no, const std::string& line,
                              std::size_t expected)
{
    const auto fields = split_fields(line);
    if (fields.size() != expected) {
        throw FormatError(std::string(source) + ":" + std::to_string(line_no) + ": expected " +
                          std::to_string(expected) + " fields");
    }
    std::vector<double> out;
    out.reserve(expected);
    for (const auto f : fields) {
        const auto v = parse_real(f);
        if (!v) {
            throw FormatError(std::string(source) + ":" + std::to_string(line_no) + ": not a number: '" +
                              std::string(f) + "'");
        }
        out.push_back(*v);
    }
    return out;
}

constexpr std::string_view kFusedHeader = "t,x,y,z,interest,stress,dwell_s,f_interest,f_stress,f_dwell";
constexpr std::string_view kRankedHeader = "rank,score,preference,x,y,z,t";

}  // namespace

double MinMax::apply(double v) const
{
    if (max == min) {
        return 0.5;
    }
    return std::clamp((v - min) / (max - min), 0.0, 1.0);
}

MinMax MinMax::of(std::span<const double> values)
{
    if (values.empty()) {
        return {};
    }
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    return {*lo, *hi};
}

FeatureVector FeatureNormalization::apply(const FusedRecord& r) const
{
    return {interest.apply(r.interest), stress.apply(r.stress), log_dwell.apply(std::log1p(r.dwell))};
}

Dataset featurize(std::vector<FusedRecord> records)
{
    if (records.empty()) {
        throw Error("cannot build a dataset from zero records");
    }
    std::vector<double> interest;
    std::vector<double> stress;
    std::vector<double> log_dwell;
    interest.reserve(records.size());
    stress.reserve(records.size());
    log_dwell.reserve(records.size());
    for (const auto& r : records) {
        interest.push_back(r.interest);
        stress.push_back(r.stress);
        log_dwell.push_back(std::log1p(r.dwell));
    }
    Dataset ds;
    ds.normalization = {MinMax::of(interest), MinMax::of(stress), MinMax::of(log_dwell)};
    ds.features.reserve(records.size());
    for (const auto& r : records) {
        ds.features.push_back(ds.normalization.apply(r));
    }
    ds.records = std::move(records);
    return ds;
}

Dataset build_dataset(std::span<const AlignedSample> aligned, const DwellMap& dwell)
{
    std::vector<FusedRecord> records;
    records.reserve(aligned.size());
    for (const auto& a : aligned) {
        const BinKey key = quantize(a.point, dwell.step);
        records.push_back({a.t, a.point, key, a.interest, a.stress, dwell.at(key).delay_time});
    }
    return featurize(std::move(records));
}

double oracle_score(const FeatureVector& fv, const OracleWeights& w)
{
    const double total = w.interest + w.stress + w.dwell;
    if (!(total > 0.0)) {
        throw DomainError("oracle weights must have a positive sum");
    }
    return (w.interest * fv.interest + w.stress * (1.0 - fv.stress) + w.dwell * fv.dwell) / total;
}

double sigmoid(double z)
{
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double predict(const RankingModel& model, const FeatureVector& fv)
{
    return sigmoid(model.w[0] * fv.interest + model.w[1] * fv.stress + model.w[2] * fv.dwell + model.b);
}

RankingModel train(std::span<const FeatureVector> features, std::span<const double> targets,
                   const TrainingConfig& config)
{
    if (features.size() != targets.size()) {
        throw Error("train: feature and target counts differ");
    }
    if (features.size() < 2) {
        throw DegenerateDatasetError("train: need at least 2 records; use oracle-only scoring");
    }
    const auto [lo, hi] = std::minmax_element(targets.begin(), targets.end());
    if (*lo == *hi) {
        throw DegenerateDatasetError("train: all targets are equal; use oracle-only scoring");
    }
    if (!(config.learning_rate > 0.0) || config.epochs < 1) {
        throw DomainError("train: learning rate and epochs must be positive");
    }

    RankingModel model;
    model.config = config;
    model.loss_trace.reserve(static_cast<std::size_t>(config.epochs));

    std::mt19937_64 rng(config.seed);
    std::vector<std::size_t> order(features.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        // Fisher-Yates with the raw engine output keeps the permutation identical across standard libraries.
        for (std::size_t i = order.size() - 1; i > 0; --i) {
            std::swap(order[i], order[rng() % (i + 1)]);
        }
        for (const std::size_t idx : order) {
            const auto x = features[idx].as_array();
            const double y_hat = predict(model, features[idx]);
            // d/dz of 0.5*(sigmoid(z) - y)^2
            const double grad = (y_hat - targets[idx]) * y_hat * (1.0 - y_hat);
            for (std::size_t k = 0; k < 3; ++k) {
                model.w[k] -= config.learning_rate * grad * x[k];
            }
            model.b -= config.learning_rate * grad;
        }
        double loss = 0.0;
        for (std::size_t i = 0; i < features.size(); ++i) {
            const double d = predict(model, features[i]) - targets[i];
            loss += 0.5 * d * d;
        }
        model.loss_trace.push_back(loss / static_cast<double>(features.size()));
    }
    return model;
}

std::vector<ScoredRecord> score_records(const Dataset& dataset, std::span<const double> scores)
{
    if (scores.size() != dataset.records.size()) {
        throw Error("score_records: score count does not match record count");
    }
    std::vector<ScoredRecord> out;
    out.reserve(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const auto& r = dataset.records[i];
        out.push_back({r.t, r.point, r.key, scores[i]});
    }
    return out;
}

RankedExtremes rank_extremes(std::span<const ScoredRecord> records, std::size_t k_top, std::size_t k_bottom)
{
    std::map<BinKey, ScoredRecord> best;
    for (const auto& r : records) {
        const auto [it, inserted] = best.try_emplace(r.key, r);
        if (!inserted && ranks_before(r, it->second, true)) {
            it->second = r;
        }
    }
    if (best.size() < k_top + k_bottom) {
        throw Error("rank_extremes: need " + std::to_string(k_top + k_bottom) + " distinct bins, only " +
                    std::to_string(best.size()) + " available");
    }
    std::vector<ScoredRecord> distinct;
    distinct.reserve(best.size());
    for (const auto& [key, r] : best) {
        distinct.push_back(r);
    }

    RankedExtremes out;
    auto sorted = distinct;
    std::sort(sorted.begin(), sorted.end(),
              [](const ScoredRecord& a, const ScoredRecord& b) { return ranks_before(a, b, true); });
    out.top = take(sorted, k_top);
    std::sort(distinct.begin(), distinct.end(),
              [](const ScoredRecord& a, const ScoredRecord& b) { return ranks_before(a, b, false); });
    out.bottom = take(distinct, k_bottom);
    return out;
}

void write_fused_csv(std::ostream& out, const Dataset& ds)
{
    out << kFusedHeader << '\n';
    for (std::size_t i = 0; i < ds.records.size(); ++i) {
        const auto& r = ds.records[i];
        const auto& f = ds.features[i];
        out << format_fixed(r.t) << ',' << format_fixed(r.point.x) << ',' << format_fixed(r.point.y) << ','
            << format_fixed(r.point.z) << ',' << format_fixed(r.interest) << ',' << format_fixed(r.stress) << ','
            << format_fixed(r.dwell) << ',' << format_fixed(f.interest) << ',' << format_fixed(f.stress) << ','
            << format_fixed(f.dwell) << '\n';
    }
}

std::vector<FusedRecord> read_fused_csv(std::istream& in, std::string_view source, double step)
{
    expect_line(in, source, kFusedHeader);
    std::vector<FusedRecord> out;
    std::string line;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        const auto v = parse_row(source, line_no, line, 10);
        const Vec3 p{v[1], v[2], v[3]};
        out.push_back({v[0], p, quantize(p, step), v[4], v[5], v[6]});
    }
    return out;
}

void write_ranked_csv(std::ostream& out, std::span<const RankedPoint> points)
{
    out << kRankedHeader << '\n';
    for (const auto& p : points) {
        out << p.rank << ',' << format_fixed(p.score) << ',' << format_fixed(p.preference) << ','
            << format_fixed(p.point.x) << ',' << format_fixed(p.point.y) << ',' << format_fixed(p.point.z) << ','
            << format_fixed(p.t) << '\n';
    }
}

std::vector<RankedPoint> read_ranked_csv(std::istream& in, std::string_view source)
{
    expect_line(in, source, kRankedHeader);
    std::vector<RankedPoint> out;
    std::string line;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        const auto v = parse_row(source, line_no, line, 7);
        if (v[2] < -100.0 || v[2] > 100.0) {
            throw FormatError(std::string(source) + ":" + std::to_string(line_no) + ": preference outside [-100,100]");
        }
        RankedPoint p;
        p.rank = static_cast<int>(v[0]);
        p.score = v[1];
        p.preference = v[2];
        p.point = {v[3], v[4], v[5]};
        p.t = v[6];
        out.push_back(p);
    }
    return out;
}

void write_model_json(std::ostream& out, const RankingModel& m, std::string_view manifest_hash)
{
    json j = {
        {"w", m.w},
        {"b", m.b},
        {"seed", m.config.seed},
        {"epochs", m.config.epochs},
        {"learning_rate", m.config.learning_rate},
        {"loss_trace", m.loss_trace},
    };
    if (!manifest_hash.empty()) {
        j["manifest_hash"] = std::string(manifest_hash);
    }
    out << j.dump(2) << '\n';
}

RankingModel read_model_json(std::istream& in)
{
    try {
        json j;
        in >> j;
        RankingModel m;
        m.w = j.at("w").get<std::array<double, 3>>();
        m.b = j.at("b").get<double>();
        m.config.seed = j.at("seed").get<std::uint64_t>();
        m.config.epochs = j.at("epochs").get<int>();
        m.config.learning_rate = j.at("learning_rate").get<double>();
        m.loss_trace = j.value("loss_trace", std::vector<double>{});
        return m;
    } catch (const json::exception& e) {
        throw FormatError(std::string("model json: ") + e.what());
    }
}

}  // namespace gaze_affect
