#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "flowdir/sweep.hpp"
#include "json.hpp"

namespace flowdir {

struct FeatureRange {
  double min = 0.0;
  double max = 1.0;

  friend bool operator==(const FeatureRange&, const FeatureRange&) = default;
};

struct ScalingParams {
  FeatureRange tbc;
  FeatureRange tltf;
  FeatureRange stt;

  friend bool operator==(const ScalingParams&, const ScalingParams&) = default;
};

struct Metrics {
  double tbc = 0.0;
  double tltf = 0.0;
  double stt = 0.0;
};

struct ScaleResult {
  std::vector<double> values;
  bool degenerate = false;  // max == min, every value mapped to 0
  bool clamped = false;     // some input fell outside [min, max]
};

FeatureRange fit_range(std::span<const double> values);
ScaleResult minmax_scale(std::span<const double> values, const FeatureRange& range);

struct ScaledMetrics {
  std::array<double, 3> values{};  // tbc, tltf, stt
  bool clamped = false;
  bool degenerate = false;
};

ScaledMetrics scale_metrics(const Metrics& raw, const ScalingParams& scaling);

/// Rows ready for regression: scaled (tbc, tltf, stt) and the scaled rank label.
struct TrainingSet {
  std::vector<std::array<double, 3>> features;
  std::vector<double> labels;
  ScalingParams scaling;
};

// Label = rank (higher is better), min-max scaled alongside the features.
// Throws DataError if any record is unranked.
TrainingSet assign_dcs(const SweepDataset& ranked);

struct ScoreModel {
  double intercept = 0.0;
  std::array<double, 3> weights{};  // tbc, tltf, stt
  double alpha = 0.0;
  double cv_mae = 0.0;
  double cv_r2 = 0.0;
  ScalingParams scaling;
  std::string id;
  nlohmann::json provenance = nlohmann::json::object();
};

// Minimizes |y - b0 - Xw|^2 + alpha |w|^2 with b0 unpenalized.
// Throws ComputeError for a singular system (collinear columns at alpha = 0).
ScoreModel ridge_fit(std::span<const std::array<double, 3>> features, std::span<const double> labels,
                     double alpha);

struct AlphaScore {
  double alpha = 0.0;
  double mae = 0.0;
  double r2 = 0.0;
};

struct CvResult {
  double best_alpha = 0.0;
  std::vector<AlphaScore> scores;  // grid order
};

inline const std::vector<double> kDefaultAlphaGrid = {0.001, 0.005, 0.009, 0.01, 0.1, 0.5, 1.0, 10.0};

// Seeded shuffle of row indices; fold f covers positions [f*n/k, (f+1)*n/k).
std::vector<std::size_t> shuffled_rows(std::size_t n, std::uint64_t seed);
std::size_t fold_begin(std::size_t fold, std::size_t n, std::size_t k);

CvResult cross_validate(std::span<const std::array<double, 3>> features,
                        std::span<const double> labels, std::span<const double> alphas,
                        std::size_t k = 10, std::uint64_t seed = 0);

// Labels, cross-validates over the grid, refits on all rows with the best alpha.
ScoreModel train_model(const SweepDataset& ranked, std::span<const double> alphas = kDefaultAlphaGrid,
                       std::size_t k = 10, std::uint64_t seed = 0);

struct Score {
  double dcs = 0.0;
  bool clamped = false;
};

double score_scaled(const ScoreModel& model, const std::array<double, 3>& scaled);
Score score(const ScoreModel& model, const Metrics& raw);

// Published DCS coefficients (intercept 1.178; weights -0.129, 0.086, -1.180)
// with identity scaling over [0, 1] inputs.
ScoreModel published_model();
inline constexpr const char* kPublishedModelId = "published-dcs";

nlohmann::json to_json(const ScoreModel& model);
// Throws DataError on missing or mistyped fields.
ScoreModel model_from_json(const nlohmann::json& j);

}  // namespace flowdir
