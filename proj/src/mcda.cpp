#include "flowdir/mcda.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include "flowdir/errors.hpp"

namespace flowdir {

FeatureRange fit_range(std::span<const double> values) {
  if (values.empty()) return {0.0, 0.0};
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  return {*lo, *hi};
}

namespace {

double scale_one(double x, const FeatureRange& range, bool& clamped, bool& degenerate) {
  if (!(range.max > range.min)) {
    degenerate = true;
    return 0.0;
  }
  double v = (x - range.min) / (range.max - range.min);
  if (v < 0.0 || v > 1.0) {
    clamped = true;
    v = std::clamp(v, 0.0, 1.0);
  }
  return v;
}

}  // namespace

ScaleResult minmax_scale(std::span<const double> values, const FeatureRange& range) {
  ScaleResult out;
  out.values.reserve(values.size());
  for (double x : values) out.values.push_back(scale_one(x, range, out.clamped, out.degenerate));
  return out;
}

ScaledMetrics scale_metrics(const Metrics& raw, const ScalingParams& scaling) {
  ScaledMetrics out;
  out.values = {scale_one(raw.tbc, scaling.tbc, out.clamped, out.degenerate),
                scale_one(raw.tltf, scaling.tltf, out.clamped, out.degenerate),
                scale_one(raw.stt, scaling.stt, out.clamped, out.degenerate)};
  return out;
}

TrainingSet assign_dcs(const SweepDataset& ranked) {
  TrainingSet set;
  const auto n = ranked.records.size();
  std::vector<double> tbc(n), tltf(n), stt(n), rank(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = ranked.records[i];
    if (r.rank < 1) throw DataError("record " + std::to_string(r.code) + " is unranked");
    tbc[i] = r.tbc;
    tltf[i] = r.tltf;
    stt[i] = r.stt;
    rank[i] = r.rank;
  }
  set.scaling = {fit_range(tbc), fit_range(tltf), fit_range(stt)};
  const auto s_tbc = minmax_scale(tbc, set.scaling.tbc).values;
  const auto s_tltf = minmax_scale(tltf, set.scaling.tltf).values;
  const auto s_stt = minmax_scale(stt, set.scaling.stt).values;
  set.labels = minmax_scale(rank, fit_range(rank)).values;
  set.features.resize(n);
  for (std::size_t i = 0; i < n; ++i) set.features[i] = {s_tbc[i], s_tltf[i], s_stt[i]};
  return set;
}

ScoreModel ridge_fit(std::span<const std::array<double, 3>> features, std::span<const double> labels,
                     double alpha) {
  const auto n = features.size();
  if (n != labels.size()) throw DataError("feature and label counts differ");
  if (n < 4) throw DataError("ridge regression needs at least 4 rows");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw DataError("alpha must be finite and >= 0");

  Eigen::MatrixX3d X(n, 3);
  Eigen::VectorXd y(n);
  for (std::size_t i = 0; i < n; ++i) {
    X.row(i) << features[i][0], features[i][1], features[i][2];
    y(i) = labels[i];
  }
  // Centering removes the unpenalized intercept from the penalized system.
  const Eigen::RowVector3d x_mean = X.colwise().mean();
  const double y_mean = y.mean();
  const Eigen::MatrixX3d Xc = X.rowwise() - x_mean;
  const Eigen::VectorXd yc = y.array() - y_mean;

  Eigen::Matrix3d A = Xc.transpose() * Xc;
  A.diagonal().array() += alpha;
  const Eigen::Vector3d b = Xc.transpose() * yc;

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(A, Eigen::EigenvaluesOnly);
  const double largest = eig.eigenvalues().maxCoeff();
  if (eig.eigenvalues().minCoeff() <= 1e-12 * std::max(largest, 1.0)) {
    throw ComputeError("singular ridge system (collinear features); use alpha > 0");
  }
  const Eigen::Vector3d w = A.ldlt().solve(b);

  ScoreModel model;
  model.alpha = alpha;
  model.weights = {w(0), w(1), w(2)};
  model.intercept = y_mean - x_mean.dot(w);
  if (!std::isfinite(model.intercept) || !w.allFinite()) throw ComputeError("non-finite ridge solution");
  return model;
}

std::vector<std::size_t> shuffled_rows(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(rows.begin(), rows.end(), rng);
  return rows;
}

std::size_t fold_begin(std::size_t fold, std::size_t n, std::size_t k) { return fold * n / k; }

CvResult cross_validate(std::span<const std::array<double, 3>> features,
                        std::span<const double> labels, std::span<const double> alphas,
                        std::size_t k, std::uint64_t seed) {
  if (alphas.empty()) throw DataError("empty alpha grid");
  const auto n = features.size();
  if (k < 2) throw DataError("cross-validation needs at least 2 folds");
  if (n < k) throw DataError("fewer rows than folds");

  const auto rows = shuffled_rows(n, seed);
  CvResult result;
  for (double alpha : alphas) {
    double mae_sum = 0.0, r2_sum = 0.0;
    for (std::size_t f = 0; f < k; ++f) {
      const auto lo = fold_begin(f, n, k), hi = fold_begin(f + 1, n, k);
      std::vector<std::array<double, 3>> train_x;
      std::vector<double> train_y;
      for (std::size_t p = 0; p < n; ++p) {
        if (p >= lo && p < hi) continue;
        train_x.push_back(features[rows[p]]);
        train_y.push_back(labels[rows[p]]);
      }
      const auto model = ridge_fit(train_x, train_y, alpha);

      double abs_err = 0.0, ss_res = 0.0, mean = 0.0;
      for (std::size_t p = lo; p < hi; ++p) mean += labels[rows[p]];
      mean /= static_cast<double>(hi - lo);
      double ss_tot = 0.0;
      for (std::size_t p = lo; p < hi; ++p) {
        const double truth = labels[rows[p]];
        const double err = truth - score_scaled(model, features[rows[p]]);
        abs_err += std::abs(err);
        ss_res += err * err;
        ss_tot += (truth - mean) * (truth - mean);
      }
      mae_sum += abs_err / static_cast<double>(hi - lo);
      r2_sum += ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 0.0;
    }
    result.scores.push_back({alpha, mae_sum / static_cast<double>(k), r2_sum / static_cast<double>(k)});
  }

  const AlphaScore* best = &result.scores.front();
  for (const auto& s : result.scores) {
    if (s.mae < best->mae || (s.mae == best->mae && s.alpha < best->alpha)) best = &s;
  }
  result.best_alpha = best->alpha;
  return result;
}

double score_scaled(const ScoreModel& model, const std::array<double, 3>& scaled) {
  return model.intercept + model.weights[0] * scaled[0] + model.weights[1] * scaled[1] +
         model.weights[2] * scaled[2];
}

Score score(const ScoreModel& model, const Metrics& raw) {
  const auto scaled = scale_metrics(raw, model.scaling);
  return {score_scaled(model, scaled.values), scaled.clamped};
}

ScoreModel published_model() {
  ScoreModel m;
  m.intercept = 1.178;
  m.weights = {-0.129, 0.086, -1.180};
  m.alpha = 0.01;
  m.cv_mae = 0.092;
  m.cv_r2 = 0.623;
  m.scaling = {{0.0, 1.0}, {0.0, 1.0}, {0.0, 1.0}};
  m.id = kPublishedModelId;
  m.provenance = {{"source", "published coefficients"}};
  return m;
}

namespace {

nlohmann::json range_json(const FeatureRange& r) { return {{"min", r.min}, {"max", r.max}}; }

FeatureRange range_from_json(const nlohmann::json& j) {
  return {j.at("min").get<double>(), j.at("max").get<double>()};
}

std::string fnv_hex(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

ScoreModel train_model(const SweepDataset& ranked, std::span<const double> alphas, std::size_t k,
                       std::uint64_t seed) {
  const auto set = assign_dcs(ranked);
  const auto cv = cross_validate(set.features, set.labels, alphas, k, seed);
  auto model = ridge_fit(set.features, set.labels, cv.best_alpha);
  for (const auto& s : cv.scores) {
    if (s.alpha == cv.best_alpha) {
      model.cv_mae = s.mae;
      model.cv_r2 = s.r2;
    }
  }
  model.scaling = set.scaling;
  nlohmann::json grid = nlohmann::json::array();
  for (const auto& s : cv.scores) grid.push_back({{"alpha", s.alpha}, {"mae", s.mae}, {"r2", s.r2}});
  const auto& p = ranked.provenance;
  model.provenance = {{"dataset_hash", p.dataset_hash}, {"sigma", p.params.sigma},
                      {"seed", p.params.seed},          {"max_iterations", p.params.max_iterations},
                      {"rows", ranked.records.size()},  {"folds", k},
                      {"cv_seed", seed},                {"alpha_grid", grid}};
  model.id = "ridge-" + fnv_hex(to_json(model).dump());
  return model;
}

nlohmann::json to_json(const ScoreModel& model) {
  return {{"id", model.id},
          {"intercept", model.intercept},
          {"weights", {{"tbc", model.weights[0]}, {"tltf", model.weights[1]}, {"stt", model.weights[2]}}},
          {"alpha", model.alpha},
          {"cv_mae", model.cv_mae},
          {"cv_r2", model.cv_r2},
          {"scaling",
           {{"tbc", range_json(model.scaling.tbc)},
            {"tltf", range_json(model.scaling.tltf)},
            {"stt", range_json(model.scaling.stt)}}},
          {"provenance", model.provenance}};
}

ScoreModel model_from_json(const nlohmann::json& j) {
  try {
    ScoreModel m;
    m.id = j.value("id", std::string{});
    m.intercept = j.at("intercept").get<double>();
    const auto& w = j.at("weights");
    m.weights = {w.at("tbc").get<double>(), w.at("tltf").get<double>(), w.at("stt").get<double>()};
    m.alpha = j.at("alpha").get<double>();
    m.cv_mae = j.at("cv_mae").get<double>();
    m.cv_r2 = j.at("cv_r2").get<double>();
    const auto& s = j.at("scaling");
    m.scaling = {range_from_json(s.at("tbc")), range_from_json(s.at("tltf")),
                 range_from_json(s.at("stt"))};
    m.provenance = j.value("provenance", nlohmann::json::object());
    if (!std::isfinite(m.intercept) || m.alpha < 0.0) throw DataError("invalid model values");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("invalid model JSON: ") + e.what());
  }
}

}  // namespace flowdir
