#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "flowdir/mcda.hpp"
#include "flowdir/sweep.hpp"
#include "json.hpp"

namespace flowdir {

/// Operational constraints and interventions layered over the base network.
struct Scenario {
  std::string name;
  std::map<std::size_t, Orientation> forced;  // link index -> locked orientation
  std::vector<Arc> added_arcs;                // outside the configuration code
  std::optional<DemandMatrix> demand_override;
  std::map<NodeId, double> origin_multipliers;
};

// Throws DataError for unknown links/nodes or bad multipliers.
void validate(const Scenario& scenario, std::span<const Link> links);
DemandMatrix scenario_demand(const DemandMatrix& base, const Scenario& scenario);
bool satisfies(const Configuration& config, const Scenario& scenario);
// Overwrites locked links with their forced orientation.
Configuration apply_forced(Configuration config, const Scenario& scenario);

struct ScenarioOutcome {
  std::string scenario;
  Configuration config;
  Evaluation evaluation;
  Metrics metrics;
  double dcs = 0.0;
  bool clamped = false;
};

struct ScenarioOptions {
  ViewOptions view;
  unsigned workers = 1;
  std::size_t max_links = 16;
};

// Throws DataError if `config` violates a lock, InfeasibleError if the scenario
// network cannot serve its demand.
ScenarioOutcome evaluate_scenario(std::span<const Link> links, const DemandMatrix& demand,
                                  const Scenario& scenario, const Configuration& config,
                                  const SueParams& params, const ScoreModel& model,
                                  const ScenarioOptions& options = {});

// Highest DCS among feasible configurations honouring the locks; ties go to
// lower STT, then lower code. Throws ComputeError if none is feasible.
ScenarioOutcome best_under_constraints(std::span<const Link> links, const DemandMatrix& demand,
                                       const Scenario& scenario, const SueParams& params,
                                       const ScoreModel& model,
                                       const ScenarioOptions& options = {});

struct ComparisonRow {
  std::string name;
  ConfigCode code = 0;
  double tbc = 0.0;
  double tltf = 0.0;
  double stt = 0.0;
  double dcs = 0.0;
  double pct_change_stt = 0.0;
};

/// Scenario table against a baseline row. Percentages are relative to the
/// baseline STT with improvements positive and degradations negative.
struct Comparison {
  std::vector<ComparisonRow> rows;
  std::size_t baseline = 0;

  // (STT_from - STT_to) / STT_base * 100.
  double improvement_pct(std::size_t from, std::size_t to) const;
};

double pct_change_stt(double stt, double baseline_stt);
// Throws DataError for a missing baseline row, ComputeError for zero baseline STT.
Comparison compare(std::vector<ComparisonRow> rows, std::size_t baseline);
ComparisonRow to_row(const ScenarioOutcome& outcome);

void write_comparison_csv(std::ostream& out, const Comparison& cmp);
std::string format_comparison_table(const Comparison& cmp);

// Evacuation case study over the 5-6-8-9-10-16-17 subnetwork:
//   A  unconstrained;
//   B  two-way locks on 5-6, 6-8 and 8-16 with 16->17 unavailable (17->16 only);
//   C  B plus an injected one-way arc 16->17.
// Throws DataError naming any missing node or link.
std::vector<Scenario> case_study_preset(std::span<const Link> links, double origin9_multiplier = 1.0);

// Evaluates A on `optimum` and B/C on the optimum with their locks applied.
Comparison run_case_study(std::span<const Link> links, const DemandMatrix& demand,
                          ConfigCode optimum, const SueParams& params, const ScoreModel& model,
                          const ScenarioOptions& options = {});

nlohmann::json to_json(const Scenario& scenario, std::span<const Link> links);
Scenario scenario_from_json(const nlohmann::json& j, std::span<const Link> links);

}  // namespace flowdir
