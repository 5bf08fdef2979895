#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "flowdir/netmodel.hpp"
#include "flowdir/sue.hpp"
#include "flowdir/topo.hpp"

namespace flowdir {

struct ArcValue {
  NodeId tail = 0;
  NodeId head = 0;
  double value = 0.0;

  friend bool operator==(const ArcValue&, const ArcValue&) = default;
};

struct SweepRecord {
  ConfigCode code = 0;
  std::string trits;
  double tbc = 0.0;
  double tltf = 0.0;
  double stt = 0.0;
  bool converged = false;
  double gap = 0.0;
  int rank = 0;  // 0 until ranked
  // Optional per-arc exports.
  std::vector<ArcValue> arc_bc;
  std::vector<ArcValue> arc_flow;

  friend bool operator==(const SweepRecord&, const SweepRecord&) = default;
};

struct Provenance {
  std::string dataset_hash;
  SueParams params;
  std::vector<NodeId> nodes;
  std::size_t link_count = 0;
  bool contraflow_capacity_merge = false;
  std::string timestamp;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct SweepDataset {
  std::vector<SweepRecord> records;
  Provenance provenance;

  const SweepRecord* find(ConfigCode code) const;

  friend bool operator==(const SweepDataset&, const SweepDataset&) = default;
};

// Assignment parameters for one configuration: the base params with the seed
// replaced by mix64(base seed, code).
SueParams config_params(const SueParams& base, ConfigCode code);

struct Evaluation {
  ConfigCode code = 0;
  DirectedNetwork network;
  BetweennessMap betweenness;
  AssignmentResult assignment;
  double tbc = 0.0;
};

// Topology and assignment for one directed network; `code` only seeds the noise.
Evaluation evaluate_network(DirectedNetwork network, ConfigCode code, const DemandMatrix& demand,
                            const SueParams& params);
SweepRecord to_record(const Evaluation& eval, std::size_t link_count, bool emit_bc,
                      bool emit_flows);

struct SweepOptions {
  unsigned workers = 1;
  bool progress = false;  // 1 Hz progress lines on stderr
  bool emit_bc = false;
  bool emit_flows = false;
  EnumerationOptions enumeration;
  std::function<void(std::size_t done, std::size_t total)> on_progress;
};

// FNV-1a digest of links and demand, as 16 hex digits.
std::string dataset_hash(std::span<const Link> links, const DemandMatrix& demand);

// One record per feasible code, in ascending code order, unranked.
// Throws ComputeError naming the code if any assignment fails.
SweepDataset run_sweep(std::span<const Link> links, const DemandMatrix& demand,
                       const SueParams& params, const SweepOptions& options = {});

// Rank N = lowest STT; equal STT gives the smaller code the higher rank.
// Output records are sorted by rank descending.
SweepDataset rank_by_stt(SweepDataset ds);

inline const char* const kCsvColumns[] = {"code", "trits", "feasible", "tbc",  "tltf",
                                          "stt",  "converged", "gap", "rank"};

void write_csv(std::ostream& out, const SweepDataset& ds);
SweepDataset read_csv(std::istream& in);
void save_csv(const SweepDataset& ds, const std::filesystem::path& path);
SweepDataset load_csv(const std::filesystem::path& path);

}  // namespace flowdir
