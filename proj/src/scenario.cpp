#include "flowdir/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "flowdir/errors.hpp"
#include "flowdir/format.hpp"

namespace flowdir {

namespace {

std::optional<std::size_t> find_link(std::span<const Link> links, NodeId x, NodeId y) {
  const NodeId lo = std::min(x, y), hi = std::max(x, y);
  for (std::size_t i = 0; i < links.size(); ++i) {
    if (links[i].a == lo && links[i].b == hi) return i;
  }
  return std::nullopt;
}

std::size_t require_link(std::span<const Link> links, NodeId x, NodeId y) {
  if (auto i = find_link(links, x, y)) return *i;
  throw DataError("network has no link " + std::to_string(x) + "-" + std::to_string(y));
}

}  // namespace

void validate(const Scenario& scenario, std::span<const Link> links) {
  for (const auto& [index, o] : scenario.forced) {
    if (index >= links.size()) {
      throw DataError("scenario '" + scenario.name + "' locks unknown link " + std::to_string(index));
    }
  }
  const auto nodes = link_nodes(links);
  auto known = [&](NodeId id) { return std::binary_search(nodes.begin(), nodes.end(), id); };
  for (const auto& arc : scenario.added_arcs) {
    if (!known(arc.tail) || !known(arc.head)) {
      throw DataError("scenario '" + scenario.name + "' adds arc " + std::to_string(arc.tail) +
                      "->" + std::to_string(arc.head) + " touching an unknown node");
    }
    if (!(arc.attrs.capacity > 0.0) || arc.attrs.free_flow_time < 0.0) {
      throw DataError("scenario '" + scenario.name + "' adds an arc with invalid attributes");
    }
  }
  for (const auto& [origin, factor] : scenario.origin_multipliers) {
    if (!known(origin)) throw DataError("demand multiplier for unknown node " + std::to_string(origin));
    if (!(factor >= 0.0) || !std::isfinite(factor)) {
      throw DataError("demand multiplier must be finite and >= 0");
    }
  }
}

DemandMatrix scenario_demand(const DemandMatrix& base, const Scenario& scenario) {
  DemandMatrix out = scenario.demand_override ? *scenario.demand_override : base;
  for (const auto& [origin, factor] : scenario.origin_multipliers) {
    const auto entries = out.entries();
    for (const auto& [od, trips] : entries) {
      if (od.first == origin) out.set(od.first, od.second, trips * factor);
    }
  }
  return out;
}

bool satisfies(const Configuration& config, const Scenario& scenario) {
  return std::all_of(scenario.forced.begin(), scenario.forced.end(), [&](const auto& kv) {
    return kv.first < config.size() && config[kv.first] == kv.second;
  });
}

Configuration apply_forced(Configuration config, const Scenario& scenario) {
  for (const auto& [index, o] : scenario.forced) config.set(index, o);
  return config;
}

ScenarioOutcome evaluate_scenario(std::span<const Link> links, const DemandMatrix& demand,
                                  const Scenario& scenario, const Configuration& config,
                                  const SueParams& params, const ScoreModel& model,
                                  const ScenarioOptions& options) {
  validate(scenario, links);
  if (!satisfies(config, scenario)) {
    throw DataError("configuration " + config.trits() + " violates the locks of scenario '" +
                    scenario.name + "'");
  }
  const auto scenario_trips = scenario_demand(demand, scenario);
  auto network = directed_view(links, config, options.view, scenario.added_arcs);
  if (auto pair = first_unserved_pair(network, scenario_trips)) {
    throw InfeasibleError(pair->first, pair->second);
  }
  ScenarioOutcome out;
  out.scenario = scenario.name;
  out.config = config;
  out.evaluation = evaluate_network(std::move(network), config.code(), scenario_trips, params);
  out.metrics = {out.evaluation.tbc, out.evaluation.assignment.tltf, out.evaluation.assignment.stt};
  const auto s = score(model, out.metrics);
  out.dcs = s.dcs;
  out.clamped = s.clamped;
  return out;
}

ScenarioOutcome best_under_constraints(std::span<const Link> links, const DemandMatrix& demand,
                                       const Scenario& scenario, const SueParams& params,
                                       const ScoreModel& model, const ScenarioOptions& options) {
  validate(scenario, links);
  SweepOptions sweep;
  sweep.workers = options.workers;
  sweep.enumeration.max_links = options.max_links;
  sweep.enumeration.view = options.view;
  sweep.enumeration.forced = scenario.forced;
  sweep.enumeration.extra_arcs = scenario.added_arcs;
  const auto ds = run_sweep(links, scenario_demand(demand, scenario), params, sweep);
  if (ds.records.empty()) {
    throw ComputeError("no feasible configuration satisfies scenario '" + scenario.name + "'");
  }

  const SweepRecord* best = nullptr;
  double best_dcs = 0.0;
  for (const auto& r : ds.records) {
    const double dcs = score(model, {r.tbc, r.tltf, r.stt}).dcs;
    const bool better = !best || dcs > best_dcs ||
                        (dcs == best_dcs && (r.stt < best->stt || (r.stt == best->stt && r.code < best->code)));
    if (better) {
      best = &r;
      best_dcs = dcs;
    }
  }
  return evaluate_scenario(links, demand, scenario, decode(best->code, links.size()), params, model,
                           options);
}

double pct_change_stt(double stt, double baseline_stt) {
  if (baseline_stt == 0.0) throw ComputeError("baseline STT is zero");
  return (baseline_stt - stt) / baseline_stt * 100.0;
}

double Comparison::improvement_pct(std::size_t from, std::size_t to) const {
  const double base = rows.at(baseline).stt;
  if (base == 0.0) throw ComputeError("baseline STT is zero");
  return (rows.at(from).stt - rows.at(to).stt) / base * 100.0;
}

Comparison compare(std::vector<ComparisonRow> rows, std::size_t baseline) {
  if (baseline >= rows.size()) throw DataError("baseline row " + std::to_string(baseline) + " does not exist");
  const double base = rows[baseline].stt;
  for (auto& row : rows) row.pct_change_stt = pct_change_stt(row.stt, base);
  return {std::move(rows), baseline};
}

ComparisonRow to_row(const ScenarioOutcome& outcome) {
  return {outcome.scenario, outcome.config.code(), outcome.metrics.tbc, outcome.metrics.tltf,
          outcome.metrics.stt, outcome.dcs, 0.0};
}

void write_comparison_csv(std::ostream& out, const Comparison& cmp) {
  out << "scenario,code,tbc,tltf,stt,dcs,pct_change_stt,baseline\n";
  for (std::size_t i = 0; i < cmp.rows.size(); ++i) {
    const auto& r = cmp.rows[i];
    out << r.name << ',' << r.code << ',' << format_double(r.tbc) << ',' << format_double(r.tltf)
        << ',' << format_double(r.stt) << ',' << format_double(r.dcs) << ','
        << format_double(r.pct_change_stt) << ',' << (i == cmp.baseline ? "true" : "false") << '\n';
  }
}

std::string format_comparison_table(const Comparison& cmp) {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-10s %8s %8s %14s %14s %9s %10s\n", "scenario", "code", "TBC",
                "TLTF", "STT", "DCS", "dSTT %");
  out += buf;
  for (const auto& r : cmp.rows) {
    std::snprintf(buf, sizeof buf, "%-10s %8llu %8.4f %14.2f %14.2f %9.3f %9.2f%%\n", r.name.c_str(),
                  static_cast<unsigned long long>(r.code), r.tbc, r.tltf, r.stt, r.dcs,
                  r.pct_change_stt);
    out += buf;
  }
  return out;
}

std::vector<Scenario> case_study_preset(std::span<const Link> links, double origin9_multiplier) {
  const auto nodes = link_nodes(links);
  std::string missing;
  for (NodeId id : {5, 6, 8, 9, 10, 16, 17}) {
    if (!std::binary_search(nodes.begin(), nodes.end(), id)) {
      missing += (missing.empty() ? "" : ",") + std::to_string(id);
    }
  }
  if (!missing.empty()) throw DataError("case-study preset needs nodes missing from network: " + missing);

  Scenario a;
  a.name = "A";

  Scenario b;
  b.name = "B";
  for (auto [x, y] : {std::pair{5, 6}, std::pair{6, 8}, std::pair{8, 16}}) {
    b.forced[require_link(links, x, y)] = Orientation::TwoWay;
  }
  const auto link_16_17 = require_link(links, 16, 17);
  b.forced[link_16_17] = Orientation::Backward;
  if (origin9_multiplier != 1.0) b.origin_multipliers[9] = origin9_multiplier;

  Scenario c = b;
  c.name = "C";
  c.added_arcs.push_back({16, 17, links[link_16_17].forward});
  return {a, b, c};
}

Comparison run_case_study(std::span<const Link> links, const DemandMatrix& demand,
                          ConfigCode optimum, const SueParams& params, const ScoreModel& model,
                          const ScenarioOptions& options) {
  const auto presets = case_study_preset(links);
  const auto base = decode(optimum, links.size());
  std::vector<ComparisonRow> rows;
  for (const auto& s : presets) {
    rows.push_back(
        to_row(evaluate_scenario(links, demand, s, apply_forced(base, s), params, model, options)));
  }
  return compare(std::move(rows), 0);
}

nlohmann::json to_json(const Scenario& scenario, std::span<const Link> links) {
  nlohmann::json forced = nlohmann::json::object();
  for (const auto& [index, o] : scenario.forced) {
    const auto& link = links[index];
    forced[std::to_string(link.a) + "-" + std::to_string(link.b)] = std::string(to_string(o));
  }
  nlohmann::json added = nlohmann::json::array();
  for (const auto& arc : scenario.added_arcs) {
    added.push_back({{"tail", arc.tail},
                     {"head", arc.head},
                     {"capacity", arc.attrs.capacity},
                     {"free_flow_time", arc.attrs.free_flow_time},
                     {"b", arc.attrs.bpr_b},
                     {"power", arc.attrs.bpr_power},
                     {"length", arc.attrs.length}});
  }
  nlohmann::json multipliers = nlohmann::json::object();
  for (const auto& [origin, factor] : scenario.origin_multipliers) {
    multipliers[std::to_string(origin)] = factor;
  }
  return {{"name", scenario.name},
          {"forced_orientations", forced},
          {"added_arcs", added},
          {"demand_multipliers", multipliers}};
}

Scenario scenario_from_json(const nlohmann::json& j, std::span<const Link> links) {
  try {
    Scenario s;
    s.name = j.value("name", std::string("scenario"));
    if (j.contains("forced_orientations")) {
      for (const auto& [key, value] : j.at("forced_orientations").items()) {
        std::size_t index = 0;
        if (const auto dash = key.find('-'); dash != std::string::npos) {
          index = require_link(links, std::stoi(key.substr(0, dash)), std::stoi(key.substr(dash + 1)));
        } else {
          index = std::stoul(key);
        }
        s.forced[index] = orientation_from_string(value.get<std::string>());
      }
    }
    if (j.contains("added_arcs")) {
      for (const auto& a : j.at("added_arcs")) {
        Arc arc;
        arc.tail = a.at("tail").get<NodeId>();
        arc.head = a.at("head").get<NodeId>();
        arc.attrs.capacity = a.at("capacity").get<double>();
        arc.attrs.free_flow_time = a.at("free_flow_time").get<double>();
        arc.attrs.bpr_b = a.value("b", 0.15);
        arc.attrs.bpr_power = a.value("power", 4.0);
        arc.attrs.length = a.value("length", 0.0);
        s.added_arcs.push_back(arc);
      }
    }
    if (j.contains("demand_multipliers")) {
      for (const auto& [key, value] : j.at("demand_multipliers").items()) {
        s.origin_multipliers[std::stoi(key)] = value.get<double>();
      }
    }
    validate(s, links);
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("invalid scenario JSON: ") + e.what());
  } catch (const std::invalid_argument&) {
    throw DataError("invalid link key in scenario JSON");
  } catch (const std::out_of_range&) {
    throw DataError("link key out of range in scenario JSON");
  }
}

}  // namespace flowdir
