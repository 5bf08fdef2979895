#include "flowdir/cli.hpp"

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "flowdir/errors.hpp"
#include "flowdir/service.hpp"

namespace flowdir {
namespace {

using nlohmann::json;

struct GlobalArgs {
  std::string network = std::string(FLOWDIR_DATA_DIR) + "/SiouxFalls_net.tntp";
  std::string trips = std::string(FLOWDIR_DATA_DIR) + "/SiouxFalls_trips.tntp";
  std::vector<NodeId> nodes = kCaseStudyNodes;
  std::uint64_t seed = 42;
  double sigma = 0.1;
  int max_iterations = 200;
  double gap_tolerance = 1e-3;
  std::vector<double> alpha_grid = kDefaultAlphaGrid;
  unsigned workers = 0;  // 0: hardware concurrency
  std::string out;
  bool capacity_merge = false;
  std::size_t max_links = 16;
  std::string sweep_csv;
  std::string model_path;
};

ServiceOptions service_options(const GlobalArgs& g) {
  ServiceOptions o;
  o.params.seed = g.seed;
  o.params.sigma = g.sigma;
  o.params.max_iterations = g.max_iterations;
  o.params.gap_tolerance = g.gap_tolerance;
  o.view.contraflow_capacity_merge = g.capacity_merge;
  o.workers = g.workers ? g.workers : std::max(1u, std::thread::hardware_concurrency());
  o.alpha_grid = g.alpha_grid;
  return o;
}

std::unique_ptr<Service> make_service(const GlobalArgs& g) {
  auto svc = Service::from_files(g.network, g.trips, g.nodes, service_options(g));
  if (!g.sweep_csv.empty()) svc->set_sweep(load_csv(g.sweep_csv));
  if (!g.model_path.empty()) {
    std::ifstream in(g.model_path);
    if (!in) throw DataError("cannot open model file " + g.model_path);
    svc->set_model(model_from_json(json::parse(in)));
  }
  return svc;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return json::parse(in);
}

// Writes to --out when given, else to stdout.
void emit(const GlobalArgs& g, std::ostream& out, const std::string& text) {
  if (g.out.empty()) {
    out << text;
    return;
  }
  std::ofstream file(g.out);
  if (!file) throw DataError("cannot write " + g.out);
  file << text;
}

Configuration pick_config(const Service& svc, const std::optional<ConfigCode>& code,
                          const std::string& trits) {
  const auto links = svc.subnetwork().links.size();
  if (!trits.empty()) {
    auto c = Configuration::from_trits(trits);
    if (c.size() != links) throw DataError("trits length must equal the link count");
    return c;
  }
  return decode(code.value_or(0), links);
}

HttpServer* g_server = nullptr;
extern "C" void on_signal(int) {
  if (g_server) g_server->stop();
}

void error_line(std::ostream& err, const char* kind, const std::string& message, json extra = json::object()) {
  extra["error"] = message;
  extra["kind"] = kind;
  err << extra.dump() << '\n';
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Road direction configuration sweeps, scoring and scenarios", "flowdir"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalArgs g;
  app.add_option("--network", g.network, "TNTP network file");
  app.add_option("--trips", g.trips, "TNTP trips file");
  app.add_option("--nodes", g.nodes, "Subnetwork node ids")->delimiter(',');
  app.add_option("--seed", g.seed, "Assignment RNG seed");
  app.add_option("--sigma", g.sigma, "Perception noise scale");
  app.add_option("--max-iterations", g.max_iterations, "MSA iteration cap");
  app.add_option("--gap-tolerance", g.gap_tolerance, "Relative gap tolerance");
  app.add_option("--alpha-grid", g.alpha_grid, "Ridge penalties")->delimiter(',');
  app.add_option("--workers", g.workers, "Worker threads (0 = all cores)");
  app.add_option("--out", g.out, "Output path (default stdout)");
  app.add_flag("--capacity-merge", g.capacity_merge, "One-way links carry both directions' capacity");
  app.add_option("--max-links", g.max_links, "Refuse sweeps over more links");
  app.add_option("--sweep", g.sweep_csv, "Ranked sweep CSV");
  app.add_option("--model", g.model_path, "Model JSON");

  // extract
  auto* extract = app.add_subcommand("extract", "Write the subnetwork as TNTP files");
  std::string extract_dir = ".";
  extract->add_option("--dir", extract_dir, "Output directory");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Evaluate every feasible configuration");
  bool emit_bc = false, emit_flows = false, progress = false;
  sweep->add_flag("--emit-bc", emit_bc, "Add per-arc betweenness column");
  sweep->add_flag("--emit-flows", emit_flows, "Add per-arc flow column");
  sweep->add_flag("--progress", progress, "Progress on stderr");

  // rank
  auto* rank = app.add_subcommand("rank", "Rank a sweep CSV by system travel time");
  std::string rank_in;
  rank->add_option("input", rank_in, "Sweep CSV")->required();

  // train
  auto* train = app.add_subcommand("train", "Fit the ridge scoring model");
  std::string train_in;
  std::size_t folds = 10;
  std::uint64_t cv_seed = 0;
  train->add_option("input", train_in, "Ranked sweep CSV")->required();
  train->add_option("--folds", folds, "Cross-validation folds");
  train->add_option("--cv-seed", cv_seed, "Fold shuffle seed");

  // score
  auto* score_cmd = app.add_subcommand("score", "Metrics and DCS for a configuration");
  std::optional<ConfigCode> score_code;
  std::string score_trits;
  std::optional<double> raw_tbc, raw_tltf, raw_stt;
  score_cmd->add_option("--code", score_code, "Configuration code");
  score_cmd->add_option("--trits", score_trits, "Configuration trits");
  auto* tbc_opt = score_cmd->add_option("--tbc", raw_tbc, "Raw TBC");
  auto* tltf_opt = score_cmd->add_option("--tltf", raw_tltf, "Raw TLTF");
  auto* stt_opt = score_cmd->add_option("--stt", raw_stt, "Raw STT");
  tbc_opt->needs(tltf_opt, stt_opt);

  // scenario
  auto* scenario = app.add_subcommand("scenario", "Constrained evaluation and comparisons");
  scenario->require_subcommand(1);
  std::string scen_file;
  std::optional<ConfigCode> scen_code;
  std::string scen_trits;
  auto* scen_run = scenario->add_subcommand("run", "Evaluate one configuration under a scenario");
  scen_run->add_option("--file", scen_file, "Scenario JSON")->required();
  scen_run->add_option("--code", scen_code, "Configuration code");
  scen_run->add_option("--trits", scen_trits, "Configuration trits");
  auto* scen_best = scenario->add_subcommand("best", "Best configuration honouring the scenario");
  scen_best->add_option("--file", scen_file, "Scenario JSON")->required();
  auto* scen_compare = scenario->add_subcommand("compare", "Case-study comparison table");
  std::optional<ConfigCode> optimum;
  double origin9 = 1.0;
  bool compare_csv = false;
  scen_compare->add_option("--optimum", optimum, "Optimal code (default: best of --sweep, else 0)");
  scen_compare->add_option("--origin9-multiplier", origin9, "Demand multiplier for origin 9");
  scen_compare->add_flag("--csv", compare_csv, "CSV instead of a text table");
  auto* scen_preset = scenario->add_subcommand("preset", "Print the case-study scenarios as JSON");

  // serve
  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  HttpServerOptions http;
  if (const char* env = std::getenv("FLOWDIR_PORT")) http.port = std::atoi(env);
  std::string ui_dir;
  serve->add_option("--port", http.port, "Port (0 = any free port; env FLOWDIR_PORT)");
  serve->add_option("--host", http.host, "Bind address");
  serve->add_option("--ui-dir", ui_dir, "Static files served at /");

  std::vector<std::string> argv_store{"flowdir"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*extract) {
      const auto sub = tntp::extract_subnetwork(tntp::load_network(g.network), tntp::load_trips(g.trips), g.nodes);
      std::filesystem::create_directories(extract_dir);
      const auto net_path = std::filesystem::path(extract_dir) / "sub_net.tntp";
      const auto trips_path = std::filesystem::path(extract_dir) / "sub_trips.tntp";
      std::ofstream(net_path) << tntp::to_tntp(tntp::to_dataset(sub));
      std::ofstream(trips_path) << tntp::to_tntp(sub.demand);
      json summary = {{"nodes", sub.nodes},
                      {"links", sub.links.size()},
                      {"configurations", space_size(sub.links.size())},
                      {"network", net_path.string()},
                      {"trips", trips_path.string()}};
      out << summary.dump() << '\n';
    } else if (*sweep) {
      const auto svc = make_service(g);
      SweepOptions opts;
      opts.workers = svc->options().workers;
      opts.progress = progress;
      opts.emit_bc = emit_bc;
      opts.emit_flows = emit_flows;
      opts.enumeration.view = svc->options().view;
      opts.enumeration.max_links = g.max_links;
      const auto& sub = svc->subnetwork();
      const auto ds = rank_by_stt(run_sweep(sub.links, sub.demand, svc->options().params, opts));
      std::ostringstream csv;
      write_csv(csv, ds);
      emit(g, out, csv.str());
    } else if (*rank) {
      std::ostringstream csv;
      write_csv(csv, rank_by_stt(load_csv(rank_in)));
      emit(g, out, csv.str());
    } else if (*train) {
      const auto model = train_model(rank_by_stt(load_csv(train_in)), g.alpha_grid, folds, cv_seed);
      emit(g, out, to_json(model).dump(2) + "\n");
    } else if (*score_cmd) {
      auto svc = make_service(g);
      if (raw_tbc) {
        emit(g, out, svc->score_metrics({*raw_tbc, *raw_tltf, *raw_stt}).dump() + "\n");
      } else {
        const auto config = pick_config(*svc, score_code, score_trits);
        emit(g, out, svc->config_json(config.code()).dump() + "\n");
      }
    } else if (*scenario) {
      auto svc = make_service(g);
      const auto& sub = svc->subnetwork();
      ScenarioOptions sopts;
      sopts.view = svc->options().view;
      sopts.workers = svc->options().workers;
      sopts.max_links = g.max_links;
      if (*scen_run || *scen_best) {
        const auto scen = scenario_from_json(read_json_file(scen_file), sub.links);
        const auto model = svc->active_model();
        const auto outcome =
            *scen_run ? evaluate_scenario(sub.links, sub.demand, scen, pick_config(*svc, scen_code, scen_trits),
                                          svc->options().params, model, sopts)
                      : best_under_constraints(sub.links, sub.demand, scen, svc->options().params, model, sopts);
        auto body = metrics_json(outcome.evaluation, sub.links.size());
        body["scenario"] = outcome.scenario;
        body["dcs"] = outcome.dcs;
        body["dcs_clamped"] = outcome.clamped;
        body["provenance"] = svc->provenance_json();
        emit(g, out, body.dump() + "\n");
      } else if (*scen_compare) {
        ConfigCode opt = 0;
        if (optimum) {
          opt = *optimum;
        } else if (auto ds = svc->sweep(); ds && !ds->records.empty()) {
          opt = ds->records.front().code;
        }
        if (origin9 != 1.0) {
          // Rebuild the presets with the scaled origin and evaluate each in turn.
          const auto presets = case_study_preset(sub.links, origin9);
          const auto model = svc->active_model();
          const auto base = decode(opt, sub.links.size());
          std::vector<ComparisonRow> rows;
          for (const auto& p : presets) {
            rows.push_back(to_row(evaluate_scenario(sub.links, sub.demand, p, apply_forced(base, p),
                                                    svc->options().params, model, sopts)));
          }
          const auto cmp = compare(std::move(rows), 0);
          std::ostringstream text;
          compare_csv ? write_comparison_csv(text, cmp) : void(text << format_comparison_table(cmp));
          emit(g, out, text.str());
        } else {
          const auto cmp = run_case_study(sub.links, sub.demand, opt, svc->options().params,
                                          svc->active_model(), sopts);
          std::ostringstream text;
          compare_csv ? write_comparison_csv(text, cmp) : void(text << format_comparison_table(cmp));
          emit(g, out, text.str());
        }
      } else if (*scen_preset) {
        json list = json::array();
        for (const auto& p : case_study_preset(sub.links)) list.push_back(to_json(p, sub.links));
        emit(g, out, list.dump(2) + "\n");
      }
    } else if (*serve) {
      auto svc = make_service(g);
      if (!ui_dir.empty()) http.ui_dir = ui_dir;
      HttpServer server(*svc, http);
      const int port = server.bind();
      err << json{{"listening", http.host}, {"port", port}}.dump() << '\n';
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      server.listen();
      g_server = nullptr;
    }
  } catch (const InfeasibleError& e) {
    error_line(err, "compute", e.what(), {{"origin", e.origin()}, {"destination", e.destination()}});
    return kExitCompute;
  } catch (const ComputeError& e) {
    error_line(err, "compute", e.what());
    return kExitCompute;
  } catch (const DataError& e) {
    error_line(err, "data", e.what());
    return kExitData;
  } catch (const json::exception& e) {
    error_line(err, "data", e.what());
    return kExitData;
  } catch (const StateError& e) {
    error_line(err, "data", e.what());
    return kExitData;
  } catch (const NotFoundError& e) {
    error_line(err, "data", e.what());
    return kExitData;
  } catch (const std::filesystem::filesystem_error& e) {
    error_line(err, "data", e.what());
    return kExitData;
  }
  return kExitOk;
}

int cli_main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return cli_main(args, std::cout, std::cerr);
}

}  // namespace flowdir
