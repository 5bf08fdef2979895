#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "flowdir/mcda.hpp"
#include "flowdir/scenario.hpp"
#include "flowdir/sweep.hpp"
#include "flowdir/tntp.hpp"
#include "json.hpp"

namespace flowdir {

// Request refers to state that has not been loaded (no sweep, no model). HTTP 409.
class StateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unknown configuration code or resource. HTTP 404.
class NotFoundError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ServiceOptions {
  SueParams params;
  ViewOptions view;
  unsigned workers = 1;
  std::vector<double> alpha_grid = kDefaultAlphaGrid;
  std::size_t folds = 10;
  std::uint64_t cv_seed = 0;
  // Score with the published coefficients until a model is trained or loaded.
  bool default_model = true;
};

inline const std::vector<NodeId> kCaseStudyNodes = {5, 6, 8, 9, 10, 16, 17};

/// Loaded network plus cached sweep/model state behind the CLI and HTTP API.
/// All methods are safe to call concurrently.
class Service {
 public:
  Service(tntp::Subnetwork sub, ServiceOptions options);

  static std::unique_ptr<Service> from_files(const std::filesystem::path& network, const std::filesystem::path& trips,
                                             const std::vector<NodeId>& nodes,
                                             ServiceOptions options);

  const tntp::Subnetwork& subnetwork() const noexcept { return sub_; }
  const ServiceOptions& options() const noexcept { return options_; }
  std::string dataset_hash() const { return hash_; }

  nlohmann::json network_json() const;
  // Metrics and DCS for one configuration. Throws NotFoundError for codes out of
  // range, InfeasibleError for infeasible configurations, StateError without a model.
  nlohmann::json config_json(ConfigCode code);
  // Body: {code | trits | orientations, scenario?, baseline?}.
  nlohmann::json evaluate(const nlohmann::json& body);
  nlohmann::json score_metrics(const Metrics& raw) const;

  nlohmann::json ranking(std::size_t top) const;
  nlohmann::json run_sweep();
  nlohmann::json sweep_progress() const;
  void set_sweep(SweepDataset ds);
  std::optional<SweepDataset> sweep() const;

  nlohmann::json train(const nlohmann::json& body);
  void set_model(ScoreModel model);
  // Active model: trained/loaded, else the published coefficients scaled to the
  // loaded sweep (identity scaling without one). Throws StateError if none.
  ScoreModel active_model() const;
  nlohmann::json model_json() const;

  nlohmann::json case_study_json() const;
  nlohmann::json provenance_json() const;

 private:
  struct CachedMetrics {
    nlohmann::json body;  // everything except model-dependent fields
    Metrics metrics;
  };
  const CachedMetrics& cached(ConfigCode code);
  nlohmann::json with_score(const CachedMetrics& entry) const;
  Configuration configuration_from_body(const nlohmann::json& body) const;

  tntp::Subnetwork sub_;
  ServiceOptions options_;
  std::string hash_;

  mutable std::shared_mutex state_mutex_;
  std::optional<SweepDataset> sweep_;
  std::optional<ScoreModel> model_;

  std::mutex cache_mutex_;
  std::map<ConfigCode, std::unique_ptr<CachedMetrics>> cache_;

  std::mutex sweep_run_mutex_;
  std::atomic<bool> sweep_running_{false};
  std::atomic<std::size_t> sweep_done_{0};
  std::atomic<std::size_t> sweep_total_{0};
};

// Evaluation result as canonical JSON (sorted keys, round-trip floats).
nlohmann::json metrics_json(const Evaluation& eval, std::size_t link_count);

struct HttpServerOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::optional<std::filesystem::path> ui_dir;
};

/// Blocking JSON-over-HTTP front end. `stop()` may be called from another thread.
class HttpServer {
 public:
  HttpServer(Service& service, HttpServerOptions options);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Binds and returns the bound port; throws DataError if binding fails.
  int bind();
  void listen();  // blocks until stop()
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace flowdir
