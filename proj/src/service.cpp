#include "flowdir/service.hpp"

#include <algorithm>

#include "flowdir/errors.hpp"
#include "httplib.h"

namespace flowdir {

using nlohmann::json;

Service::Service(tntp::Subnetwork sub, ServiceOptions options)
    : sub_(std::move(sub)), options_(std::move(options)) {
  options_.params.validate();
  hash_ = flowdir::dataset_hash(sub_.links, sub_.demand);
}

std::unique_ptr<Service> Service::from_files(const std::filesystem::path& network,
                                             const std::filesystem::path& trips,
                                             const std::vector<NodeId>& nodes,
                                             ServiceOptions options) {
  auto sub = tntp::extract_subnetwork(tntp::load_network(network), tntp::load_trips(trips), nodes);
  return std::make_unique<Service>(std::move(sub), std::move(options));
}

json metrics_json(const Evaluation& eval, std::size_t link_count) {
  const auto config = decode(eval.code, link_count);
  json orientations = json::array();
  for (auto o : config.orientations()) orientations.push_back(std::string(to_string(o)));
  json arcs = json::array();
  const auto& net = eval.network;
  for (std::size_t a = 0; a < net.arc_count(); ++a) {
    arcs.push_back({{"tail", net.arcs()[a].tail},
                    {"head", net.arcs()[a].head},
                    {"flow", eval.assignment.arc_flow[a]},
                    {"time", eval.assignment.arc_time[a]},
                    {"bc", eval.betweenness.per_arc[a]}});
  }
  return {{"code", eval.code},
          {"trits", config.trits()},
          {"orientations", orientations},
          {"tbc", eval.tbc},
          {"tltf", eval.assignment.tltf},
          {"stt", eval.assignment.stt},
          {"converged", eval.assignment.converged},
          {"gap", eval.assignment.final_gap},
          {"iterations", eval.assignment.iterations},
          {"arcs", arcs}};
}

json Service::provenance_json() const {
  std::string model_id;
  try {
    model_id = active_model().id;
  } catch (const StateError&) {
  }
  const auto& p = options_.params;
  return {{"dataset_hash", hash_},
          {"seed", p.seed},
          {"sigma", p.sigma},
          {"max_iterations", p.max_iterations},
          {"gap_tolerance", p.gap_tolerance},
          {"capacity_merge", options_.view.contraflow_capacity_merge},
          {"model_id", model_id.empty() ? json(nullptr) : json(model_id)}};
}

json Service::network_json() const {
  json links = json::array();
  for (std::size_t i = 0; i < sub_.links.size(); ++i) {
    const auto& l = sub_.links[i];
    auto attrs = [](const ArcAttributes& a) {
      return json{{"capacity", a.capacity},
                  {"free_flow_time", a.free_flow_time},
                  {"b", a.bpr_b},
                  {"power", a.bpr_power},
                  {"length", a.length}};
    };
    links.push_back({{"index", i},
                     {"a", l.a},
                     {"b", l.b},
                     {"forward", attrs(l.forward)},
                     {"backward", attrs(l.backward)},
                     {"mirrored", l.mirrored}});
  }
  json demand = json::array();
  for (const auto& [od, trips] : sub_.demand.entries()) {
    demand.push_back({{"origin", od.first}, {"destination", od.second}, {"trips", trips}});
  }
  return {{"nodes", sub_.nodes},
          {"links", links},
          {"demand", demand},
          {"configurations", space_size(sub_.links.size())},
          {"provenance", provenance_json()}};
}

const Service::CachedMetrics& Service::cached(ConfigCode code) {
  {
    std::lock_guard lock(cache_mutex_);
    if (auto it = cache_.find(code); it != cache_.end()) return *it->second;
  }
  if (code >= space_size(sub_.links.size())) {
    throw NotFoundError("configuration code " + std::to_string(code) + " out of range");
  }
  auto network = directed_view(sub_.links, decode(code, sub_.links.size()), options_.view);
  if (auto pair = first_unserved_pair(network, sub_.demand)) {
    throw InfeasibleError(pair->first, pair->second);
  }
  const auto eval = evaluate_network(std::move(network), code, sub_.demand, options_.params);
  auto entry = std::make_unique<CachedMetrics>();
  entry->body = metrics_json(eval, sub_.links.size());
  entry->metrics = {eval.tbc, eval.assignment.tltf, eval.assignment.stt};

  std::lock_guard lock(cache_mutex_);
  auto [it, inserted] = cache_.emplace(code, std::move(entry));
  return *it->second;
}

json Service::with_score(const CachedMetrics& entry) const {
  json body = entry.body;
  const auto model = active_model();
  const auto s = score(model, entry.metrics);
  body["dcs"] = s.dcs;
  body["dcs_clamped"] = s.clamped;
  body["provenance"] = provenance_json();
  return body;
}

json Service::config_json(ConfigCode code) { return with_score(cached(code)); }

json Service::score_metrics(const Metrics& raw) const {
  const auto s = score(active_model(), raw);
  return {{"tbc", raw.tbc},
          {"tltf", raw.tltf},
          {"stt", raw.stt},
          {"dcs", s.dcs},
          {"dcs_clamped", s.clamped},
          {"provenance", provenance_json()}};
}

Configuration Service::configuration_from_body(const json& body) const {
  const auto links = sub_.links.size();
  if (body.contains("code")) {
    const auto code = body.at("code").get<ConfigCode>();
    if (code >= space_size(links)) throw DataError("configuration code out of range");
    return decode(code, links);
  }
  if (body.contains("trits")) {
    auto config = Configuration::from_trits(body.at("trits").get<std::string>());
    if (config.size() != links) throw DataError("trits length must equal the link count");
    return config;
  }
  if (body.contains("orientations")) {
    std::vector<Orientation> o;
    for (const auto& item : body.at("orientations")) {
      o.push_back(orientation_from_string(item.get<std::string>()));
    }
    if (o.size() != links) throw DataError("orientations length must equal the link count");
    return Configuration(std::move(o));
  }
  throw DataError("request needs one of code, trits or orientations");
}

json Service::evaluate(const json& body) {
  if (!body.is_object()) throw DataError("request body must be a JSON object");
  const auto config = configuration_from_body(body);

  json result;
  if (body.contains("scenario") || body.contains("preset")) {
    Scenario scenario;
    if (body.contains("preset")) {
      const auto name = body.at("preset").get<std::string>();
      const auto presets = case_study_preset(sub_.links);
      auto it = std::find_if(presets.begin(), presets.end(), [&](const auto& s) { return s.name == name; });
      if (it == presets.end()) throw DataError("unknown preset '" + name + "'");
      scenario = *it;
    } else {
      scenario = scenario_from_json(body.at("scenario"), sub_.links);
    }
    const auto model = active_model();
    ScenarioOptions opts;
    opts.view = options_.view;
    const auto outcome =
        evaluate_scenario(sub_.links, sub_.demand, scenario, config, options_.params, model, opts);
    result = metrics_json(outcome.evaluation, sub_.links.size());
    result["dcs"] = outcome.dcs;
    result["dcs_clamped"] = outcome.clamped;
    result["scenario"] = to_json(scenario, sub_.links);
    result["provenance"] = provenance_json();
  } else {
    result = config_json(config.code());
    result["scenario"] = nullptr;
  }

  ConfigCode baseline = 0;
  std::string baseline_name = "all_two_way";
  if (body.contains("baseline")) {
    const auto& b = body.at("baseline");
    if (b.is_number_unsigned()) {
      baseline = b.get<ConfigCode>();
      baseline_name = std::to_string(baseline);
    } else if (b == "optimal") {
      std::shared_lock lock(state_mutex_);
      if (!sweep_ || sweep_->records.empty()) throw StateError("no sweep loaded for the optimal baseline");
      baseline = sweep_->records.front().code;
      baseline_name = "optimal";
    } else if (b != "all_two_way") {
      throw DataError("baseline must be \"all_two_way\", \"optimal\" or a configuration code");
    }
  }
  const auto base = config_json(baseline);
  result["deltas"] = {
      {"baseline", baseline_name},
      {"baseline_code", baseline},
      {"tbc", result["tbc"].get<double>() - base["tbc"].get<double>()},
      {"tltf", result["tltf"].get<double>() - base["tltf"].get<double>()},
      {"stt", result["stt"].get<double>() - base["stt"].get<double>()},
      {"dcs", result["dcs"].get<double>() - base["dcs"].get<double>()},
      {"pct_change_stt", pct_change_stt(result["stt"].get<double>(), base["stt"].get<double>())}};
  return result;
}

void Service::set_sweep(SweepDataset ds) {
  const bool ranked = std::all_of(ds.records.begin(), ds.records.end(), [](const auto& r) { return r.rank > 0; });
  if (!ranked) ds = rank_by_stt(std::move(ds));
  std::sort(ds.records.begin(), ds.records.end(),
            [](const SweepRecord& x, const SweepRecord& y) { return x.rank > y.rank; });
  std::unique_lock lock(state_mutex_);
  sweep_ = std::move(ds);
}

std::optional<SweepDataset> Service::sweep() const {
  std::shared_lock lock(state_mutex_);
  return sweep_;
}

json Service::ranking(std::size_t top) const {
  json rows = json::array();
  std::size_t total = 0;
  {
    std::shared_lock lock(state_mutex_);
    if (!sweep_) throw StateError("no sweep loaded");
    total = sweep_->records.size();
    for (std::size_t i = 0; i < std::min(top, total); ++i) {
      const auto& r = sweep_->records[i];
      rows.push_back({{"rank", r.rank},
                      {"code", r.code},
                      {"trits", r.trits},
                      {"tbc", r.tbc},
                      {"tltf", r.tltf},
                      {"stt", r.stt},
                      {"converged", r.converged},
                      {"gap", r.gap}});
    }
  }
  return {{"rows", rows}, {"total", total}, {"provenance", provenance_json()}};
}

json Service::run_sweep() {
  if (sub_.links.size() > 9) throw DataError("HTTP sweeps are limited to 9 links; use the CLI");
  std::unique_lock run_lock(sweep_run_mutex_, std::try_to_lock);
  if (!run_lock.owns_lock()) throw StateError("a sweep is already running");

  sweep_running_ = true;
  sweep_done_ = 0;
  sweep_total_ = 0;
  SweepOptions opts;
  opts.workers = options_.workers;
  opts.enumeration.view = options_.view;
  opts.on_progress = [this](std::size_t done, std::size_t total) {
    sweep_done_ = done;
    sweep_total_ = total;
  };
  SweepDataset ds;
  try {
    ds = flowdir::run_sweep(sub_.links, sub_.demand, options_.params, opts);
  } catch (...) {
    sweep_running_ = false;
    throw;
  }
  sweep_done_ = ds.records.size();
  sweep_total_ = ds.records.size();
  set_sweep(std::move(ds));
  sweep_running_ = false;

  std::shared_lock lock(state_mutex_);
  const auto& best = sweep_->records.front();
  return {{"records", sweep_->records.size()},
          {"best", {{"code", best.code}, {"trits", best.trits}, {"stt", best.stt}, {"tbc", best.tbc}}},
          {"provenance", provenance_json()}};
}

json Service::sweep_progress() const {
  return {{"running", sweep_running_.load()}, {"done", sweep_done_.load()}, {"total", sweep_total_.load()}};
}

json Service::train(const json& body) {
  auto ds = sweep();
  if (!ds) throw StateError("no sweep loaded to train on");
  std::vector<double> alphas = options_.alpha_grid;
  std::size_t folds = options_.folds;
  std::uint64_t seed = options_.cv_seed;
  if (body.is_object()) {
    if (body.contains("alphas")) alphas = body.at("alphas").get<std::vector<double>>();
    folds = body.value("folds", folds);
    seed = body.value("seed", seed);
  }
  set_model(train_model(*ds, alphas, folds, seed));
  return model_json();
}

void Service::set_model(ScoreModel model) {
  std::unique_lock lock(state_mutex_);
  model_ = std::move(model);
}

ScoreModel Service::active_model() const {
  std::shared_lock lock(state_mutex_);
  if (model_) return *model_;
  if (!options_.default_model) throw StateError("no scoring model loaded");
  auto model = published_model();
  if (sweep_ && !sweep_->records.empty()) {
    std::vector<double> tbc, tltf, stt;
    for (const auto& r : sweep_->records) {
      tbc.push_back(r.tbc);
      tltf.push_back(r.tltf);
      stt.push_back(r.stt);
    }
    model.scaling = {fit_range(tbc), fit_range(tltf), fit_range(stt)};
    model.provenance["scaling"] = "loaded sweep " + sweep_->provenance.dataset_hash;
  }
  return model;
}

json Service::model_json() const {
  auto j = to_json(active_model());
  j["service_provenance"] = provenance_json();
  return j;
}

json Service::case_study_json() const {
  const auto presets = case_study_preset(sub_.links);
  json scenarios = json::array();
  for (const auto& s : presets) scenarios.push_back(to_json(s, sub_.links));
  json out = {{"scenarios", scenarios}, {"provenance", provenance_json()}};

  auto ds = sweep();
  if (ds && !ds->records.empty()) {
    ScenarioOptions opts;
    opts.view = options_.view;
    const auto cmp = run_case_study(sub_.links, sub_.demand, ds->records.front().code,
                                    options_.params, active_model(), opts);
    json rows = json::array();
    for (const auto& r : cmp.rows) {
      rows.push_back({{"scenario", r.name},
                      {"code", r.code},
                      {"tbc", r.tbc},
                      {"tltf", r.tltf},
                      {"stt", r.stt},
                      {"dcs", r.dcs},
                      {"pct_change_stt", r.pct_change_stt}});
    }
    out["comparison"] = {{"rows", rows},
                         {"baseline", cmp.baseline},
                         {"improvement_b_to_c_pct", cmp.improvement_pct(1, 2)}};
  }
  return out;
}

// --- HTTP -----------------------------------------------------------------

struct HttpServer::Impl {
  Service& service;
  HttpServerOptions options;
  httplib::Server server;
  int port = 0;

  Impl(Service& s, HttpServerOptions o) : service(s), options(std::move(o)) {}
};

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

template <typename Fn>
httplib::Server::Handler guarded(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      send_json(res, 200, fn(req));
    } catch (const json::exception& e) {
      send_json(res, 400, {{"error", std::string("malformed request: ") + e.what()}});
    } catch (const InfeasibleError& e) {
      send_json(res, 422, {{"error", e.what()}, {"origin", e.origin()}, {"destination", e.destination()}});
    } catch (const DataError& e) {
      send_json(res, 400, {{"error", e.what()}});
    } catch (const NotFoundError& e) {
      send_json(res, 404, {{"error", e.what()}});
    } catch (const StateError& e) {
      send_json(res, 409, {{"error", e.what()}});
    } catch (const std::exception& e) {
      send_json(res, 500, {{"error", e.what()}});
    }
  };
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  return json::parse(req.body);
}

}  // namespace

HttpServer::HttpServer(Service& service, HttpServerOptions options)
    : impl_(std::make_unique<Impl>(service, std::move(options))) {
  auto& svr = impl_->server;
  Service& svc = service;

  svr.Get("/api/health", guarded([](const httplib::Request&) { return json{{"status", "ok"}}; }));
  svr.Get("/api/network", guarded([&svc](const httplib::Request&) { return svc.network_json(); }));
  svr.Get(R"(/api/config/(\d+))", guarded([&svc](const httplib::Request& req) {
            ConfigCode code = 0;
            try {
              code = std::stoull(req.matches[1].str());
            } catch (const std::out_of_range&) {
              throw NotFoundError("configuration code out of range");
            }
            return svc.config_json(code);
          }));
  svr.Post("/api/evaluate",
           guarded([&svc](const httplib::Request& req) { return svc.evaluate(parse_body(req)); }));
  svr.Get("/api/ranking", guarded([&svc](const httplib::Request& req) {
            std::size_t top = 10;
            if (req.has_param("top")) {
              try {
                top = std::stoul(req.get_param_value("top"));
              } catch (const std::exception&) {
                throw DataError("top must be a non-negative integer");
              }
            }
            return svc.ranking(top);
          }));
  svr.Post("/api/sweep", guarded([&svc](const httplib::Request&) { return svc.run_sweep(); }));
  svr.Get("/api/sweep/progress",
          guarded([&svc](const httplib::Request&) { return svc.sweep_progress(); }));
  svr.Post("/api/train",
           guarded([&svc](const httplib::Request& req) { return svc.train(parse_body(req)); }));
  svr.Get("/api/model", guarded([&svc](const httplib::Request&) { return svc.model_json(); }));
  svr.Get("/api/presets/case-study",
          guarded([&svc](const httplib::Request&) { return svc.case_study_json(); }));

  if (impl_->options.ui_dir && std::filesystem::is_directory(*impl_->options.ui_dir)) {
    svr.set_mount_point("/", impl_->options.ui_dir->string());
  }
  svr.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.status == 404 && res.body.empty()) send_json(res, 404, {{"error", "not found"}});
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind() {
  auto& svr = impl_->server;
  const auto& o = impl_->options;
  if (o.port == 0) {
    impl_->port = svr.bind_to_any_port(o.host);
  } else {
    impl_->port = svr.bind_to_port(o.host, o.port) ? o.port : -1;
  }
  if (impl_->port < 0) throw DataError("cannot bind " + o.host + ":" + std::to_string(o.port));
  return impl_->port;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace flowdir
