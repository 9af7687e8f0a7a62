#pragma once

// Feature dataset, sigmoid preference model trained by per-sample SGD, and
// extraction of the most and least preferred locations.

#include "gaze_affect/dwell.hpp"
#include "gaze_affect/error.hpp"
#include "gaze_affect/geometry.hpp"
#include "gaze_affect/session_io.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

namespace gaze_affect {

struct FusedRecord {
    double t = 0.0;
    Vec3 point;
    BinKey key;
    double interest = 0.0;
    double stress = 0.0;
    double dwell = 0.0;  // cumulative seconds for `key`
};

struct FeatureVector {
    double interest = 0.0;
    double stress = 0.0;
    double dwell = 0.0;

    std::array<double, 3> as_array() const { return {interest, stress, dwell}; }
};

/// Min-max scaling; a constant feature (max == min) maps to 0.5.
struct MinMax {
    double min = 0.0;
    double max = 0.0;

    double apply(double v) const;
    static MinMax of(std::span<const double> values);
};

struct FeatureNormalization {
    MinMax interest;
    MinMax stress;
    MinMax log_dwell;  // over log1p(dwell seconds)

    FeatureVector apply(const FusedRecord& r) const;
};

struct Dataset {
    std::vector<FusedRecord> records;
    std::vector<FeatureVector> features;
    FeatureNormalization normalization;
};

/// Joins aligned samples with their bin's dwell and normalizes features over the session.
Dataset build_dataset(std::span<const AlignedSample> aligned, const DwellMap& dwell);

/// Rebuilds features for already-fused records (same normalization rule as build_dataset).
Dataset featurize(std::vector<FusedRecord> records);

struct OracleWeights {
    double interest = 1.0;
    double stress = 1.0;
    double dwell = 1.0;
};

/// Target preference: weighted mean of interest, (1 - stress) and dwell features.
double oracle_score(const FeatureVector& fv, const OracleWeights& weights = {});

inline constexpr double kDefaultLearningRate = 0.1;
inline constexpr int kDefaultEpochs = 200;

struct TrainingConfig {
    double learning_rate = kDefaultLearningRate;
    int epochs = kDefaultEpochs;
    std::uint64_t seed = 0;
};

struct RankingModel {
    std::array<double, 3> w{};  // interest, stress, dwell
    double b = 0.0;
    TrainingConfig config;
    std::vector<double> loss_trace;  // mean 0.5*(y_hat - y)^2 after each epoch
};

class DegenerateDatasetError : public Error {
public:
    using Error::Error;
};

double sigmoid(double z);
double predict(const RankingModel& model, const FeatureVector& fv);

/// Fits y_hat = sigmoid(w.x + b) to `targets` by stochastic gradient descent on
/// squared error, visiting samples in a freshly seeded shuffle every epoch.
/// Parameters start at zero. Bit-reproducible for a fixed seed.
RankingModel train(std::span<const FeatureVector> features, std::span<const double> targets,
                   const TrainingConfig& config = {});

struct ScoredRecord {
    double t = 0.0;
    Vec3 point;
    BinKey key;
    double score = 0.0;
};

struct RankedPoint {
    int rank = 0;
    Vec3 point;
    double score = 0.0;
    double preference = 0.0;  // 200 * score - 100
    double t = 0.0;
    BinKey key;
};

inline double preference_from_score(double score) { return 200.0 * score - 100.0; }

struct RankedExtremes {
    std::vector<RankedPoint> top;     // descending score
    std::vector<RankedPoint> bottom;  // ascending score
};

inline constexpr std::size_t kDefaultTopK = 30;

/// Deduplicates by bin (keeping each bin's best record), then takes the k_top
/// highest and k_bottom lowest. Ties go to the earlier t, then the smaller key.
RankedExtremes rank_extremes(std::span<const ScoredRecord> records, std::size_t k_top = kDefaultTopK,
                             std::size_t k_bottom = kDefaultTopK);

std::vector<ScoredRecord> score_records(const Dataset& dataset, std::span<const double> scores);

// File formats.
void write_fused_csv(std::ostream& out, const Dataset& dataset);
std::vector<FusedRecord> read_fused_csv(std::istream& in, std::string_view source, double step);

void write_ranked_csv(std::ostream& out, std::span<const RankedPoint> points);
std::vector<RankedPoint> read_ranked_csv(std::istream& in, std::string_view source);

/// `manifest_hash`, when given, is embedded for provenance.
void write_model_json(std::ostream& out, const RankingModel& model, std::string_view manifest_hash = {});
RankingModel read_model_json(std::istream& in);

}  // namespace gaze_affect
