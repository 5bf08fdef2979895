#pragma once

// Readers and writers for the TNTP plain-text network and trip-table formats
// used by the public transportation network test problems, plus extraction of
// node-induced subnetworks.

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "flowdir/types.hpp"

namespace flowdir::tntp {

struct ArcRecord {
  NodeId init_node = 0;
  NodeId term_node = 0;
  double capacity = 0.0;
  double length = 0.0;
  double free_flow_time = 0.0;
  double bpr_b = 0.0;
  double bpr_power = 0.0;
  double speed = 0.0;
  double toll = 0.0;
  double link_type = 0.0;

  ArcAttributes attributes() const {
    return {capacity, free_flow_time, bpr_b, bpr_power, length};
  }

  friend bool operator==(const ArcRecord&, const ArcRecord&) = default;
};

struct NetworkDataset {
  // Header lines in file order, e.g. {"NUMBER OF LINKS", "76"}.
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<ArcRecord> arcs;

  // Integer value of a header key; throws DataError if absent or non-integer.
  long long metadata_int(const std::string& key) const;
  bool has_metadata(const std::string& key) const;
  // Sorted distinct node ids referenced by arcs.
  std::vector<NodeId> nodes() const;

  friend bool operator==(const NetworkDataset&, const NetworkDataset&) = default;
};

NetworkDataset parse_network(std::istream& in);
NetworkDataset parse_network(const std::string& text);
NetworkDataset load_network(const std::filesystem::path& path);
std::string to_tntp(const NetworkDataset& net);

DemandMatrix parse_trips(std::istream& in);
DemandMatrix parse_trips(const std::string& text);
DemandMatrix load_trips(const std::filesystem::path& path);
std::string to_tntp(const DemandMatrix& demand);

struct Subnetwork {
  std::vector<NodeId> nodes;  // sorted
  std::vector<Link> links;    // sorted by (a, b)
  DemandMatrix demand;
};

// One undirected link per node pair joined by at least one dataset arc.
// Throws DataError for selections with fewer than two nodes, unknown nodes,
// or a link set that does not connect the selection.
Subnetwork extract_subnetwork(const NetworkDataset& net, const DemandMatrix& trips,
                              std::span<const NodeId> nodes);

// Writes a subnetwork back as a directed TNTP dataset (both directions per link).
NetworkDataset to_dataset(const Subnetwork& sub);

}  // namespace flowdir::tntp
