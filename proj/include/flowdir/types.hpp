#pragma once

#include <cstddef>
#include <map>
#include <utility>
#include <vector>

namespace flowdir {

using NodeId = int;

/// Link performance attributes for one travel direction.
struct ArcAttributes {
  double capacity = 0.0;
  double free_flow_time = 0.0;
  double bpr_b = 0.15;
  double bpr_power = 4.0;
  double length = 0.0;

  friend bool operator==(const ArcAttributes&, const ArcAttributes&) = default;
};

/// Undirected road segment between two nodes with per-direction attributes.
/// Endpoints are stored with a < b; "forward" is a->b.
struct Link {
  NodeId a = 0;
  NodeId b = 0;
  ArcAttributes forward;
  ArcAttributes backward;
  // One direction was absent from the source dataset and mirrors the other.
  bool mirrored = false;

  friend bool operator==(const Link&, const Link&) = default;
};

/// Fixed O-D trip table. Pairs that were never set read as zero.
class DemandMatrix {
 public:
  DemandMatrix() = default;
  explicit DemandMatrix(std::vector<NodeId> zones) : zones_(std::move(zones)) {}

  const std::vector<NodeId>& zones() const noexcept { return zones_; }
  void set_zones(std::vector<NodeId> zones) { zones_ = std::move(zones); }

  double at(NodeId origin, NodeId destination) const;
  // Throws DataError on negative or non-finite values.
  void set(NodeId origin, NodeId destination, double trips);
  bool contains(NodeId origin, NodeId destination) const;

  // Non-zero off-diagonal entries in (origin, destination) order.
  const std::map<std::pair<NodeId, NodeId>, double>& entries() const noexcept { return demand_; }

  double total() const;

  friend bool operator==(const DemandMatrix&, const DemandMatrix&) = default;

 private:
  std::vector<NodeId> zones_;
  std::map<std::pair<NodeId, NodeId>, double> demand_;
};

}  // namespace flowdir
