#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "doctest.h"
#include "flowdir/cli.hpp"
#include "flowdir/service.hpp"
#include "httplib.h"
#include "support.hpp"

using namespace flowdir;
using nlohmann::json;

namespace {

const std::string kNet = std::string(FLOWDIR_DATA_DIR) + "/SiouxFalls_net.tntp";
const std::string kTrips = std::string(FLOWDIR_DATA_DIR) + "/SiouxFalls_trips.tntp";
const std::vector<NodeId> kTriangle{10, 16, 17};

// Service plus a live server on an ephemeral port.
struct Harness {
  std::unique_ptr<Service> service;
  std::unique_ptr<HttpServer> server;
  std::thread thread;
  std::unique_ptr<httplib::Client> client;

  explicit Harness(std::vector<NodeId> nodes = kCaseStudyNodes, ServiceOptions opts = {}) {
    service = Service::from_files(kNet, kTrips, nodes, opts);
    HttpServerOptions http;
    http.port = 0;
    server = std::make_unique<HttpServer>(*service, http);
    const int port = server->bind();
    thread = std::thread([this] { server->listen(); });
    server->wait_until_ready();
    client = std::make_unique<httplib::Client>("127.0.0.1", port);
  }
  ~Harness() {
    server->stop();
    thread.join();
  }

  httplib::Result get(const std::string& path) { return client->Get(path); }
  httplib::Result post(const std::string& path, const std::string& body) {
    return client->Post(path, body, "application/json");
  }
};

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli_main(args, out, err);
  return {code, out.str(), err.str()};
}

std::string strip(std::string s) {
  while (!s.empty() && s.back() == '\n') s.pop_back();
  return s;
}

std::filesystem::path temp(const std::string& name) { return std::filesystem::temp_directory_path() / name; }

}  // namespace

TEST_CASE("health, network and config endpoints") {
  Harness h;
  auto health = h.get("/api/health");
  REQUIRE(health);
  CHECK(health->status == 200);

  auto net = h.get("/api/network");
  REQUIRE(net);
  const auto nj = json::parse(net->body);
  CHECK(nj["links"].size() == 9);
  CHECK(nj["configurations"] == 19683);
  CHECK(nj["provenance"]["seed"] == 42);

  auto cfg = h.get("/api/config/0");
  REQUIRE(cfg);
  CHECK(cfg->status == 200);
  const auto cj = json::parse(cfg->body);
  CHECK(cj["tbc"].get<double>() == doctest::Approx(1.7619).epsilon(0.005 / 1.7619));
  CHECK(cj["trits"] == "000000000");
  CHECK(cj["arcs"].size() == 18);
  CHECK(cj["provenance"]["model_id"] == kPublishedModelId);
  CHECK(cj["provenance"]["sigma"] == 0.1);
  CHECK(cj.contains("dcs"));

  // Cached and stable.
  CHECK(h.get("/api/config/0")->body == cfg->body);
}

TEST_CASE("error statuses") {
  Harness h;
  CHECK(h.get("/api/config/19683")->status == 404);
  CHECK(h.get("/api/config/abc")->status == 404);
  CHECK(h.get("/api/nothing")->status == 404);
  CHECK(h.get("/api/ranking?top=3")->status == 409);
  CHECK(h.post("/api/train", "{}")->status == 409);
  CHECK(h.post("/api/evaluate", "{not json")->status == 400);
  CHECK(h.post("/api/evaluate", R"({"trits":"01"})")->status == 400);
  CHECK(h.post("/api/evaluate", R"({})")->status == 400);

  // Links 7 and 8 both point into node 17.
  auto inf = h.post("/api/evaluate", R"({"trits":"000000011"})");
  REQUIRE(inf);
  CHECK(inf->status == 422);
  const auto body = json::parse(inf->body);
  CHECK(body["origin"] == 17);
  CHECK(body.contains("destination"));
  CHECK(h.get("/api/config/" + std::to_string(Configuration::from_trits("000000011").code()))->status == 422);
}

TEST_CASE("no model loaded") {
  ServiceOptions opts;
  opts.default_model = false;
  Harness h(kCaseStudyNodes, opts);
  CHECK(h.get("/api/config/0")->status == 409);
  CHECK(h.get("/api/model")->status == 409);
}

TEST_CASE("evaluate with scenarios and baselines") {
  Harness h;
  auto plain = h.post("/api/evaluate", R"({"code":0})");
  REQUIRE(plain);
  CHECK(plain->status == 200);
  auto pj = json::parse(plain->body);
  CHECK(pj["deltas"]["pct_change_stt"] == 0.0);
  CHECK(pj["deltas"]["baseline"] == "all_two_way");

  // Code 0 breaks B's one-way lock on 16-17; 13122 is code 0 with that lock applied.
  CHECK(h.post("/api/evaluate", R"({"code":0,"preset":"B"})")->status == 400);
  auto b = h.post("/api/evaluate", R"({"code":13122,"preset":"B"})");
  REQUIRE(b);
  CHECK(b->status == 200);
  const auto bj = json::parse(b->body);
  CHECK(bj["stt"].get<double>() > pj["stt"].get<double>());
  CHECK(bj["deltas"]["pct_change_stt"].get<double>() < 0);
  CHECK(bj["scenario"]["name"] == "B");

  // Orientation names work too and match the code form.
  json named = {{"orientations", json::array()}};
  for (int i = 0; i < 9; ++i) named["orientations"].push_back("two_way");
  auto n = h.post("/api/evaluate", named.dump());
  CHECK(json::parse(n->body)["stt"] == pj["stt"]);

  CHECK(h.post("/api/evaluate", R"({"code":0,"baseline":"optimal"})")->status == 409);
  CHECK(h.post("/api/evaluate", R"({"code":0,"preset":"Z"})")->status == 400);

  auto presets = h.get("/api/presets/case-study");
  REQUIRE(presets);
  CHECK(json::parse(presets->body)["scenarios"].size() == 3);
}

TEST_CASE("sweep, ranking, training over HTTP") {
  Harness h(kTriangle);
  auto sweep = h.post("/api/sweep", "");
  REQUIRE(sweep);
  CHECK(sweep->status == 200);
  CHECK(json::parse(sweep->body)["records"] == 15);
  const auto progress = json::parse(h.get("/api/sweep/progress")->body);
  CHECK(progress["running"] == false);
  CHECK(progress["done"] == 15);

  auto ranking = h.get("/api/ranking?top=3");
  REQUIRE(ranking);
  const auto rows = json::parse(ranking->body)["rows"];
  REQUIRE(rows.size() == 3);
  CHECK(rows[0]["stt"].get<double>() <= rows[1]["stt"].get<double>());
  CHECK(rows[1]["stt"].get<double>() <= rows[2]["stt"].get<double>());
  CHECK(rows[0]["rank"] == 15);
  CHECK(h.get("/api/ranking?top=x")->status == 400);

  auto trained = h.post("/api/train", R"({"alphas":[0.01,0.1]})");
  REQUIRE(trained);
  CHECK(trained->status == 200);
  const auto tj = json::parse(trained->body);
  CHECK(tj["id"].get<std::string>().rfind("ridge-", 0) == 0);
  CHECK(json::parse(h.get("/api/model")->body)["id"] == tj["id"]);
  CHECK(json::parse(h.get("/api/config/0")->body)["provenance"]["model_id"] == tj["id"]);

  auto optimal = h.post("/api/evaluate", R"({"code":0,"baseline":"optimal"})");
  CHECK(optimal->status == 200);

  auto study = h.get("/api/presets/case-study");
  CHECK(study->status == 400);  // triangle lacks the case-study nodes
}

TEST_CASE("CLI and API agree byte for byte") {
  Harness h;
  const auto api = h.get("/api/config/0")->body;
  const auto run = cli({"score", "--code", "0"});
  CHECK(run.code == kExitOk);
  CHECK(strip(run.out) == api);

  const auto trits = cli({"score", "--trits", "012000210"});
  CHECK(trits.code == kExitOk);
  CHECK(strip(trits.out) == h.get("/api/config/" + std::to_string(Configuration::from_trits("012000210").code()))->body);
}

TEST_CASE("CLI pipeline on a small subnetwork") {
  const auto csv = temp("flowdir_cli_sweep.csv");
  const auto model = temp("flowdir_cli_model.json");
  const std::string nodes = "10,16,17";

  auto sweep = cli({"--nodes", nodes, "--workers", "2", "--out", csv.string(), "sweep"});
  CHECK(sweep.code == kExitOk);
  const auto ds = load_csv(csv);
  CHECK(ds.records.size() == 15);
  CHECK(ds.records.front().rank == 15);

  auto rank = cli({"rank", csv.string()});
  CHECK(rank.code == kExitOk);
  std::istringstream ranked(rank.out);
  CHECK(read_csv(ranked).records == ds.records);

  auto train = cli({"--alpha-grid", "0.01,0.1,1", "--out", model.string(), "train", csv.string()});
  CHECK(train.code == kExitOk);
  std::ifstream mf(model);
  const auto mj = json::parse(mf);
  CHECK(mj["alpha"].get<double>() <= 1.0);

  // Parity with a service holding the same sweep and model.
  auto svc = Service::from_files(kNet, kTrips, kTriangle, {});
  svc->set_sweep(load_csv(csv));
  svc->set_model(model_from_json(mj));
  const auto scored = cli({"--nodes", nodes, "--sweep", csv.string(), "--model", model.string(), "score", "--code", "0"});
  CHECK(scored.code == kExitOk);
  CHECK(strip(scored.out) == svc->config_json(0).dump());

  auto raw = cli({"score", "--tbc", "1.8", "--tltf", "90000", "--stt", "500000"});
  CHECK(raw.code == kExitOk);
  CHECK(json::parse(raw.out).contains("dcs"));

  std::filesystem::remove(csv);
  std::filesystem::remove(model);
}

TEST_CASE("CLI scenarios") {
  auto preset = cli({"scenario", "preset"});
  CHECK(preset.code == kExitOk);
  const auto list = json::parse(preset.out);
  REQUIRE(list.size() == 3);

  const auto file = temp("flowdir_scenario_b.json");
  std::ofstream(file) << list[1].dump();
  auto run = cli({"scenario", "run", "--file", file.string(), "--code", "13122"});
  CHECK(run.code == kExitOk);
  CHECK(json::parse(run.out)["scenario"] == "B");

  auto compare = cli({"scenario", "compare", "--optimum", "0"});
  CHECK(compare.code == kExitOk);
  CHECK(compare.out.find("A") != std::string::npos);

  auto csv = cli({"scenario", "compare", "--optimum", "0", "--csv"});
  CHECK(csv.out.rfind("scenario,code", 0) == 0);

  auto violation = cli({"scenario", "run", "--file", file.string(), "--trits", "100000000"});
  CHECK(violation.code == kExitData);
  std::filesystem::remove(file);
}

TEST_CASE("CLI extract") {
  const auto dir = temp("flowdir_extract");
  auto run = cli({"extract", "--dir", dir.string()});
  CHECK(run.code == kExitOk);
  CHECK(json::parse(run.out)["links"] == 9);
  const auto sub = tntp::extract_subnetwork(tntp::load_network(dir / "sub_net.tntp"),
                                            tntp::load_trips(dir / "sub_trips.tntp"), kCaseStudyNodes);
  CHECK(sub.links == testing::sioux_falls_subnet().links);
  CHECK(sub.demand == testing::sioux_falls_subnet().demand);
  std::filesystem::remove_all(dir);
}

TEST_CASE("CLI exit codes") {
  CHECK(cli({}).code == kExitUsage);
  CHECK(cli({"frobnicate"}).code == kExitUsage);
  CHECK(cli({"--help"}).code == kExitOk);

  const auto missing = cli({"--network", "/nonexistent.tntp", "score", "--code", "0"});
  CHECK(missing.code == kExitData);
  CHECK(json::parse(missing.err)["kind"] == "data");

  const auto infeasible = cli({"score", "--trits", "000000011"});
  CHECK(infeasible.code == kExitCompute);
  const auto ej = json::parse(infeasible.err);
  CHECK(ej["kind"] == "compute");
  CHECK(ej["origin"] == 17);

  CHECK(cli({"score", "--code", "19683"}).code == kExitData);
  CHECK(cli({"--nodes", "1,24", "score", "--code", "0"}).code == kExitData);
}
