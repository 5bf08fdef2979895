#include <random>
#include <set>

#include "doctest.h"
#include "flowdir/errors.hpp"
#include "flowdir/mcda.hpp"
#include "support.hpp"

using namespace flowdir;

namespace {

struct Data {
  std::vector<std::array<double, 3>> x;
  std::vector<double> y;
};

Data make_data(std::size_t n, std::uint64_t seed, double noise) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> e(0.0, 1.0);
  Data d;
  for (std::size_t i = 0; i < n; ++i) {
    d.x.push_back({u(rng), u(rng), u(rng)});
    d.y.push_back(0.5 - 0.8 * d.x.back()[0] + 0.3 * d.x.back()[1] - 1.1 * d.x.back()[2] + noise * e(rng));
  }
  return d;
}

}  // namespace

TEST_CASE("min-max scaling") {
  const FeatureRange r{2.0, 6.0};
  const std::vector<double> v{2.0, 6.0, 4.0};
  const auto s = minmax_scale(v, r);
  CHECK(s.values == std::vector<double>{0.0, 1.0, 0.5});
  CHECK_FALSE(s.clamped);
  CHECK_FALSE(s.degenerate);

  const std::vector<double> out{1.0, 7.0};
  const auto c = minmax_scale(out, r);
  CHECK(c.values == std::vector<double>{0.0, 1.0});
  CHECK(c.clamped);

  const std::vector<double> flat{3.0, 3.0};
  const auto d = minmax_scale(flat, fit_range(flat));
  CHECK(d.values == std::vector<double>{0.0, 0.0});
  CHECK(d.degenerate);
}

TEST_CASE("labels follow rank") {
  SweepDataset ds;
  for (int i = 0; i < 5; ++i) {
    SweepRecord r;
    r.code = static_cast<ConfigCode>(i);
    r.stt = 10.0 + i;
    r.tbc = 1.0 + 0.1 * i;
    r.tltf = 100.0 - i;
    ds.records.push_back(r);
  }
  CHECK_THROWS_AS(assign_dcs(ds), DataError);
  const auto set = assign_dcs(rank_by_stt(ds));
  REQUIRE(set.labels.size() == 5);
  // Records arrive best first.
  CHECK(set.labels.front() == 1.0);
  CHECK(set.labels.back() == 0.0);
  CHECK(set.features.front()[2] == 0.0);  // lowest STT
  CHECK(set.scaling.stt.min == 10.0);
  CHECK(set.scaling.stt.max == 14.0);
}

TEST_CASE("ridge at alpha 0 equals the explicit-inverse oracle") {
  const auto d = make_data(50, 3, 0.1);
  for (double alpha : {0.0, 0.01, 1.0, 25.0}) {
    const auto m = ridge_fit(d.x, d.y, alpha);
    const auto o = testing::ridge_oracle(d.x, d.y, alpha);
    CHECK(std::abs(m.intercept - o[0]) <= 1e-8);
    for (int j = 0; j < 3; ++j) CHECK(std::abs(m.weights[j] - o[j + 1]) <= 1e-8);
  }
}

TEST_CASE("noiseless data is recovered") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<std::array<double, 3>> x;
  std::vector<double> y;
  for (int i = 0; i < 20; ++i) {
    x.push_back({u(rng), u(rng), u(rng)});
    y.push_back(2.0 + 3.0 * x.back()[0] - x.back()[2]);
  }
  const auto m = ridge_fit(x, y, 0.0);
  CHECK(std::abs(m.intercept - 2.0) <= 1e-8);
  CHECK(std::abs(m.weights[0] - 3.0) <= 1e-8);
  CHECK(std::abs(m.weights[1]) <= 1e-8);
  CHECK(std::abs(m.weights[2] + 1.0) <= 1e-8);
}

TEST_CASE("huge penalty collapses to the mean") {
  const auto d = make_data(40, 9, 0.2);
  const auto m = ridge_fit(d.x, d.y, 1e9);
  double mean = 0;
  for (double v : d.y) mean += v;
  mean /= static_cast<double>(d.y.size());
  for (double w : m.weights) CHECK(std::abs(w) < 1e-7);
  CHECK(m.intercept == doctest::Approx(mean).epsilon(1e-6));
}

TEST_CASE("ridge input errors") {
  const auto d = make_data(3, 1, 0.0);
  CHECK_THROWS_AS(ridge_fit(d.x, d.y, 0.0), DataError);

  // Collinear columns are singular without a penalty.
  std::vector<std::array<double, 3>> x;
  std::vector<double> y;
  for (int i = 0; i < 10; ++i) {
    x.push_back({double(i), 2.0 * i, 1.0});
    y.push_back(i);
  }
  CHECK_THROWS_WITH_AS(ridge_fit(x, y, 0.0), doctest::Contains("alpha"), ComputeError);
  CHECK_NOTHROW(ridge_fit(x, y, 0.1));
}

TEST_CASE("folds partition the rows") {
  for (std::size_t n : {10u, 37u, 5007u}) {
    const auto rows = shuffled_rows(n, 0);
    std::multiset<std::size_t> seen;
    std::size_t covered = 0;
    for (std::size_t f = 0; f < 10; ++f) {
      const auto lo = fold_begin(f, n, 10), hi = fold_begin(f + 1, n, 10);
      CHECK(hi >= lo);
      covered += hi - lo;
      for (auto p = lo; p < hi; ++p) seen.insert(rows[p]);
    }
    CHECK(covered == n);
    CHECK(seen.size() == n);
    CHECK(std::set<std::size_t>(seen.begin(), seen.end()).size() == n);
  }
  CHECK(shuffled_rows(100, 1) == shuffled_rows(100, 1));
  CHECK(shuffled_rows(100, 1) != shuffled_rows(100, 2));
}

TEST_CASE("cross-validation scores match a direct per-alpha refit") {
  const auto d = make_data(60, 11, 0.05);
  const auto cv = cross_validate(d.x, d.y, kDefaultAlphaGrid, 10, 4);
  REQUIRE(cv.scores.size() == kDefaultAlphaGrid.size());

  const auto rows = shuffled_rows(d.x.size(), 4);
  double best_mae = 1e300, best_alpha = 0;
  for (std::size_t i = 0; i < kDefaultAlphaGrid.size(); ++i) {
    const double alpha = kDefaultAlphaGrid[i];
    double mae = 0;
    for (std::size_t f = 0; f < 10; ++f) {
      const auto lo = fold_begin(f, d.x.size(), 10), hi = fold_begin(f + 1, d.x.size(), 10);
      std::vector<std::array<double, 3>> tx;
      std::vector<double> ty;
      for (std::size_t p = 0; p < d.x.size(); ++p)
        if (p < lo || p >= hi) {
          tx.push_back(d.x[rows[p]]);
          ty.push_back(d.y[rows[p]]);
        }
      const auto o = testing::ridge_oracle(tx, ty, alpha);
      double err = 0;
      for (auto p = lo; p < hi; ++p) {
        const auto& r = d.x[rows[p]];
        err += std::abs(d.y[rows[p]] - (o[0] + o[1] * r[0] + o[2] * r[1] + o[3] * r[2]));
      }
      mae += err / static_cast<double>(hi - lo);
    }
    mae /= 10;
    CHECK(cv.scores[i].alpha == alpha);
    CHECK(cv.scores[i].mae == doctest::Approx(mae).epsilon(1e-9));
    if (mae < best_mae) {
      best_mae = mae;
      best_alpha = alpha;
    }
  }
  CHECK(cv.best_alpha == best_alpha);
  // Large penalties underfit this data badly.
  CHECK(cv.best_alpha < 1.0);
  CHECK(cv.scores.back().mae > 2 * cv.scores.front().mae);
}

TEST_CASE("cross-validation tie-break and grid edge cases") {
  // Constant labels: every alpha fits the mean exactly, so all MAEs tie.
  std::vector<std::array<double, 3>> x;
  std::vector<double> y;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u;
  for (int i = 0; i < 30; ++i) {
    x.push_back({u(rng), u(rng), u(rng)});
    y.push_back(0.25);
  }
  const std::vector<double> grid{10.0, 1.0, 0.1};
  CHECK(cross_validate(x, y, grid).best_alpha == 0.1);

  const std::vector<double> single{0.5};
  CHECK(cross_validate(x, y, single).best_alpha == 0.5);
  CHECK_THROWS_AS(cross_validate(x, y, std::vector<double>{}), DataError);
}

TEST_CASE("published coefficients") {
  const auto m = published_model();
  CHECK(m.id == kPublishedModelId);
  CHECK(score_scaled(m, {0, 0, 0}) == doctest::Approx(1.178).epsilon(1e-12));
  CHECK(score_scaled(m, {1, 1, 1}) == doctest::Approx(-0.045).epsilon(1e-12));
  // Decreasing in TBC and STT, increasing in TLTF.
  CHECK(score(m, {0.4, 0.5, 0.5}).dcs < score(m, {0.3, 0.5, 0.5}).dcs);
  CHECK(score(m, {0.3, 0.5, 0.6}).dcs < score(m, {0.3, 0.5, 0.5}).dcs);
  CHECK(score(m, {0.3, 0.6, 0.5}).dcs > score(m, {0.3, 0.5, 0.5}).dcs);
  CHECK(score(m, {2.0, 0.5, 0.5}).clamped);
}

TEST_CASE("model JSON round trip") {
  SweepDataset ds;
  const auto d = make_data(40, 2, 0.1);
  for (std::size_t i = 0; i < d.x.size(); ++i) {
    SweepRecord r;
    r.code = i;
    r.tbc = d.x[i][0];
    r.tltf = d.x[i][1];
    r.stt = 1000 * d.x[i][2] + d.y[i];
    ds.records.push_back(r);
  }
  const auto m = train_model(rank_by_stt(ds));
  CHECK(m.id.rfind("ridge-", 0) == 0);
  CHECK(m.weights[2] < 0);
  CHECK(m.provenance.contains("alpha_grid"));

  const auto j = to_json(m);
  const auto back = model_from_json(j);
  CHECK(back.intercept == m.intercept);
  CHECK(back.weights == m.weights);
  CHECK(back.alpha == m.alpha);
  CHECK(back.cv_mae == m.cv_mae);
  CHECK(back.scaling == m.scaling);
  CHECK(back.id == m.id);
  CHECK(to_json(back).dump() == j.dump());

  CHECK_THROWS_AS(model_from_json(nlohmann::json::object()), DataError);
  auto broken = j;
  broken["weights"]["stt"] = "x";
  CHECK_THROWS_AS(model_from_json(broken), DataError);
}
