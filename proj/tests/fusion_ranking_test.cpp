#include "gaze_affect/dwell.hpp"
#include "gaze_affect/error.hpp"
#include "gaze_affect/fusion_ranking.hpp"
#include "gaze_affect/simulator.hpp"
#include "gaze_affect/stats.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <sstream>

using namespace gaze_affect;
using doctest::Approx;

namespace {

FusedRecord record(double t, double interest, double stress, double dwell)
{
    const Vec3 p{t, 0.0, 100.0};
    return {t, p, quantize(p), interest, stress, dwell};
}

std::vector<double> oracle_targets(const Dataset& ds)
{
    std::vector<double> y;
    for (const auto& f : ds.features) {
        y.push_back(oracle_score(f));
    }
    return y;
}

Dataset simulated_dataset(std::uint64_t seed, double duration)
{
    Scenario sc;
    sc.field.lobes = {{normalized({0.3, 0.2, 1.0}), 50.0, 1.0}, {normalized({-0.4, -0.1, 1.0}), 50.0, -1.0}};
    sc.config.duration_s = duration;
    sc.config.seed = seed;
    const SessionLog log = simulate_session(sc);
    const auto aligned = align_streams(log);
    return build_dataset(aligned, accumulate_dwell(log.gazes, log.info.gaze_rate_hz));
}

}  // namespace

TEST_CASE("min-max normalization")
{
    const std::vector<double> v{0.2, 0.8};
    const MinMax m = MinMax::of(v);
    CHECK(m.apply(0.2) == 0.0);
    CHECK(m.apply(0.8) == 1.0);
    const std::vector<double> flat{0.7, 0.7, 0.7};
    CHECK(MinMax::of(flat).apply(0.7) == 0.5);
}

TEST_CASE("feature construction")
{
    const Dataset constant = featurize({record(0, 0.7, 0.1, 0.02), record(1, 0.7, 0.2, 0.1)});
    CHECK(constant.features[0].interest == 0.5);
    CHECK(constant.features[1].interest == 0.5);

    const Dataset ds = featurize({record(0, 0.2, 0.1, 0.02), record(1, 0.8, 0.2, 0.10), record(2, 0.5, 0.3, 1.00)});
    CHECK(ds.features[0].interest == 0.0);
    CHECK(ds.features[1].interest == 1.0);
    CHECK(ds.features[0].dwell == Approx(0.0));
    CHECK(ds.features[1].dwell == Approx(0.1121381).epsilon(1e-6));
    CHECK(ds.features[2].dwell == Approx(1.0));
    CHECK_THROWS(featurize({}));
}

TEST_CASE("oracle score")
{
    CHECK(oracle_score({1, 0, 1}) == Approx(1.0));
    CHECK(oracle_score({0, 1, 0}) == Approx(0.0));
    CHECK(oracle_score({0.6, 0.3, 0.9}) == Approx(0.7333333333));
    CHECK(oracle_score({1, 1, 1}, {2, 0, 0}) == Approx(1.0));
    CHECK_THROWS_AS(oracle_score({1, 1, 1}, {0, 0, 0}), DomainError);
}

TEST_CASE("predict and sigmoid")
{
    RankingModel m;
    CHECK(predict(m, {0.3, 0.4, 0.5}) == 0.5);
    m.b = 2.0;
    CHECK(predict(m, {0.3, 0.4, 0.5}) == Approx(0.8807970780).epsilon(1e-9));
    m.w = {1, -1, 1};
    m.b = 0.0;
    CHECK(predict(m, {1, 0, 1}) == Approx(0.8807970780).epsilon(1e-9));
    CHECK(sigmoid(-800.0) >= 0.0);
    CHECK(sigmoid(800.0) == 1.0);
    CHECK(std::isfinite(sigmoid(-800.0)));
}

TEST_CASE("training separates two opposite records")
{
    const std::vector<FeatureVector> x{{0, 1, 0}, {1, 0, 1}};
    const std::vector<double> y{0.1, 0.9};
    const RankingModel m = train(x, y, {0.1, 200, 1});
    CHECK(predict(m, x[1]) > predict(m, x[0]));
    REQUIRE(m.loss_trace.size() == 200);
    CHECK(m.loss_trace.back() < m.loss_trace.front());
}

TEST_CASE("degenerate datasets are refused")
{
    const std::vector<FeatureVector> x{{0, 1, 0}, {1, 0, 1}};
    const std::vector<double> same{0.4, 0.4};
    CHECK_THROWS_AS(train(x, same), DegenerateDatasetError);
    const std::vector<double> one{0.4};
    CHECK_THROWS_AS(train(std::span(x).first(1), one), DegenerateDatasetError);
}

TEST_CASE("training is bit-reproducible and seed dependent")
{
    const Dataset ds = simulated_dataset(3, 30.0);
    const auto y = oracle_targets(ds);
    const RankingModel a = train(ds.features, y, {0.1, 20, 9});
    const RankingModel b = train(ds.features, y, {0.1, 20, 9});
    const RankingModel c = train(ds.features, y, {0.1, 20, 10});
    CHECK(a.w == b.w);
    CHECK(a.b == b.b);
    CHECK(a.loss_trace == b.loss_trace);
    CHECK(a.w != c.w);
}

TEST_CASE("trained model agrees with the oracle on simulated sessions")
{
    const Dataset ds = simulated_dataset(42, 60.0);
    REQUIRE(ds.records.size() >= 1000);
    const auto y = oracle_targets(ds);
    const RankingModel m = train(ds.features, y);
    std::vector<double> yhat;
    for (const auto& f : ds.features) {
        yhat.push_back(predict(m, f));
    }
    CHECK(spearman(yhat, y) >= 0.95);

    REQUIRE(m.w[0] > 0.0);
    REQUIRE(m.w[1] < 0.0);
    REQUIRE(m.w[2] > 0.0);
    const FeatureVector base{0.5, 0.5, 0.5};
    CHECK(predict(m, {0.6, 0.5, 0.5}) > predict(m, base));
    CHECK(predict(m, {0.5, 0.6, 0.5}) < predict(m, base));
    CHECK(predict(m, {0.5, 0.5, 0.6}) > predict(m, base));
}

TEST_CASE("rank_extremes basics")
{
    std::vector<ScoredRecord> r;
    const double scores[] = {0.9, 0.5, 0.1};
    for (int i = 0; i < 3; ++i) {
        const Vec3 p{10.0 * i, 0, 100};
        r.push_back({static_cast<double>(i), p, quantize(p), scores[i]});
    }
    const RankedExtremes e = rank_extremes(r, 1, 1);
    REQUIRE(e.top.size() == 1);
    REQUIRE(e.bottom.size() == 1);
    CHECK(e.top[0].score == 0.9);
    CHECK(e.top[0].rank == 1);
    CHECK(e.top[0].preference == Approx(80.0));
    CHECK(e.bottom[0].score == 0.1);
    CHECK_THROWS(rank_extremes(r, 2, 2));
}

TEST_CASE("equal scores rank the earlier record first")
{
    const Vec3 p{1, 0, 100};
    const Vec3 q{-1, 0, 100};
    const Vec3 s{5, 0, 100};
    const std::vector<ScoredRecord> r{{5.0, p, quantize(p), 0.7}, {2.0, q, quantize(q), 0.7}, {9.0, s, quantize(s), 0.1}};
    const RankedExtremes e = rank_extremes(r, 2, 1);
    CHECK(e.top[0].t == 2.0);
    CHECK(e.top[1].t == 5.0);
}

TEST_CASE("preference scale")
{
    CHECK(preference_from_score(0.5) == 0.0);
    CHECK(preference_from_score(1.0) == 100.0);
    CHECK(preference_from_score(0.0) == -100.0);
}

TEST_CASE("ranking deduplicates bins and keeps each bin's best record")
{
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<ScoredRecord> r;
    for (int i = 0; i < 2000; ++i) {
        const Vec3 p{std::floor(40 * u(rng)), std::floor(5 * u(rng)), 100.0};
        r.push_back({i * 0.02, p, quantize(p, 0.5), u(rng)});
    }
    std::map<BinKey, double> best;
    for (const auto& s : r) {
        best[s.key] = std::max(best[s.key], s.score);
    }
    const RankedExtremes e = rank_extremes(r, 30, 30);
    std::set<BinKey> seen;
    for (const auto& p : e.top) {
        REQUIRE(seen.insert(p.key).second);
        REQUIRE(p.score == best.at(p.key));
    }
    for (std::size_t i = 1; i < e.top.size(); ++i) {
        REQUIRE(e.top[i - 1].score >= e.top[i].score);
        REQUIRE(e.top[i].rank == static_cast<int>(i) + 1);
    }
    for (std::size_t i = 1; i < e.bottom.size(); ++i) {
        REQUIRE(e.bottom[i - 1].score <= e.bottom[i].score);
    }
    std::vector<double> all;
    for (const auto& [k, v] : best) {
        all.push_back(v);
    }
    std::sort(all.begin(), all.end(), std::greater<>());
    CHECK(e.top[0].score == all.front());
    CHECK(e.top[29].score == all[29]);
}

TEST_CASE("rankings are invariant under monotone score transforms")
{
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<ScoredRecord> r;
    for (int i = 0; i < 500; ++i) {
        const Vec3 p{u(rng) * 50, u(rng) * 50, 100.0};
        r.push_back({i * 0.02, p, quantize(p, 0.5), u(rng)});
    }
    auto transformed = r;
    for (auto& s : transformed) {
        s.score = sigmoid(3.0 * s.score - 1.0);
    }
    const RankedExtremes a = rank_extremes(r, 30, 30);
    const RankedExtremes b = rank_extremes(transformed, 30, 30);
    for (std::size_t i = 0; i < 30; ++i) {
        REQUIRE(a.top[i].key == b.top[i].key);
        REQUIRE(a.bottom[i].key == b.bottom[i].key);
    }
}

TEST_CASE("fused CSV round-trips")
{
    const Dataset ds = simulated_dataset(1, 5.0);
    std::ostringstream out;
    write_fused_csv(out, ds);
    std::istringstream in(out.str());
    const Dataset back = featurize(read_fused_csv(in, "fused.csv", kDefaultDwellStep));
    std::ostringstream again;
    write_fused_csv(again, back);
    CHECK(again.str() == out.str());
}

TEST_CASE("ranked CSV and model JSON round-trip")
{
    const Dataset ds = simulated_dataset(2, 20.0);
    const auto y = oracle_targets(ds);
    const RankingModel m = train(ds.features, y, {0.1, 5, 4});
    std::vector<double> scores;
    for (const auto& f : ds.features) {
        scores.push_back(predict(m, f));
    }
    const auto scored = score_records(ds, scores);
    const RankedExtremes e = rank_extremes(scored, 15, 15);
    std::ostringstream out;
    write_ranked_csv(out, e.top);
    CHECK(out.str().starts_with("rank,score,preference,x,y,z,t\n1,"));
    std::istringstream in(out.str());
    const auto back = read_ranked_csv(in, "top.csv");
    REQUIRE(back.size() == 15);
    std::ostringstream again;
    write_ranked_csv(again, back);
    CHECK(again.str() == out.str());

    std::ostringstream js;
    write_model_json(js, m, "abc");
    std::istringstream jin(js.str());
    const RankingModel mb = read_model_json(jin);
    CHECK(mb.w == m.w);
    CHECK(mb.b == m.b);
    CHECK(mb.loss_trace == m.loss_trace);
    CHECK(js.str().find("\"manifest_hash\"") != std::string::npos);
}

TEST_CASE("rank statistics")
{
    const std::vector<double> v{3, 1, 2, 2};
    CHECK(average_ranks(v) == std::vector<double>{4, 1, 2.5, 2.5});
    const std::vector<double> a{1, 2, 3, 4};
    const std::vector<double> b{10, 20, 30, 400};
    CHECK(spearman(a, b) == Approx(1.0));
    CHECK(pearson(a, a) == Approx(1.0));
    const std::vector<double> c{4, 3, 2, 1};
    CHECK(spearman(a, c) == Approx(-1.0));
}
