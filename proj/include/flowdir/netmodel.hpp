#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "flowdir/types.hpp"

namespace flowdir {

/// Operating direction of one link. The underlying value is the base-3 digit
/// used in configuration codes.
enum class Orientation : std::uint8_t { TwoWay = 0, Forward = 1, Backward = 2 };

/// Signed direction convention: 0 two-way, +1 a->b, -1 b->a.
int direction_sign(Orientation o) noexcept;
std::string_view to_string(Orientation o) noexcept;
// Accepts "two_way" | "forward" | "backward"; throws DataError otherwise.
Orientation orientation_from_string(std::string_view name);

using ConfigCode = std::uint64_t;

// 3^links; throws DataError if it would overflow.
ConfigCode space_size(std::size_t link_count);

/// Per-link orientation vector. Link 0 is the least-significant base-3 digit
/// of the code and the leftmost character of the trits string.
class Configuration {
 public:
  Configuration() = default;
  explicit Configuration(std::size_t link_count, Orientation fill = Orientation::TwoWay)
      : orientations_(link_count, fill) {}
  explicit Configuration(std::vector<Orientation> orientations)
      : orientations_(std::move(orientations)) {}

  std::size_t size() const noexcept { return orientations_.size(); }
  Orientation operator[](std::size_t i) const { return orientations_.at(i); }
  void set(std::size_t i, Orientation o) { orientations_.at(i) = o; }
  const std::vector<Orientation>& orientations() const noexcept { return orientations_; }

  ConfigCode code() const;
  std::string trits() const;
  static Configuration from_trits(std::string_view trits);

  friend bool operator==(const Configuration&, const Configuration&) = default;

 private:
  std::vector<Orientation> orientations_;
};

ConfigCode encode(const Configuration& config);
// Throws DataError if code >= 3^link_count.
Configuration decode(ConfigCode code, std::size_t link_count);

struct Arc {
  NodeId tail = 0;
  NodeId head = 0;
  ArcAttributes attrs;

  friend bool operator==(const Arc&, const Arc&) = default;
};

/// Arc set over a fixed node list with a forward-star index.
class DirectedNetwork {
 public:
  DirectedNetwork() = default;
  // Throws DataError on duplicate arcs, self-loops, or arcs touching unknown nodes.
  DirectedNetwork(std::vector<NodeId> nodes, std::vector<Arc> arcs);

  const std::vector<NodeId>& nodes() const noexcept { return nodes_; }
  const std::vector<Arc>& arcs() const noexcept { return arcs_; }
  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t arc_count() const noexcept { return arcs_.size(); }

  // Dense index of a node id, or nullopt.
  std::optional<std::size_t> index_of(NodeId id) const;
  std::size_t tail_index(std::size_t arc) const { return tails_[arc]; }
  std::size_t head_index(std::size_t arc) const { return heads_[arc]; }
  // Arc indices leaving the node at dense index `node`, in ascending head id order.
  std::span<const std::size_t> out_arcs(std::size_t node) const {
    return {out_arcs_.data() + out_offsets_[node], out_offsets_[node + 1] - out_offsets_[node]};
  }
  std::span<const std::size_t> in_arcs(std::size_t node) const {
    return {in_arcs_.data() + in_offsets_[node], in_offsets_[node + 1] - in_offsets_[node]};
  }

 private:
  std::vector<NodeId> nodes_;
  std::vector<Arc> arcs_;
  std::vector<std::size_t> tails_, heads_;
  std::vector<std::size_t> out_offsets_, out_arcs_;
  std::vector<std::size_t> in_offsets_, in_arcs_;
};

struct ViewOptions {
  // Sum both directions' capacities onto a one-way arc instead of keeping the
  // arc's own direction capacity.
  bool contraflow_capacity_merge = false;
};

// Sorted distinct endpoints of the links.
std::vector<NodeId> link_nodes(std::span<const Link> links);

// Extra arcs follow the link arcs; one that duplicates a link arc instead adds
// its capacity to that arc.
DirectedNetwork directed_view(std::span<const Link> links, const Configuration& config,
                              const ViewOptions& options = {},
                              std::span<const Arc> extra_arcs = {});

// First (origin, destination) pair in ascending order with positive demand and
// no directed path, if any.
std::optional<std::pair<NodeId, NodeId>> first_unserved_pair(const DirectedNetwork& dn,
                                                             const DemandMatrix& demand);
bool is_feasible(const DirectedNetwork& dn, const DemandMatrix& demand);
bool is_strongly_connected(const DirectedNetwork& dn);

struct EnumerationOptions {
  std::size_t max_links = 16;
  ViewOptions view;
  // Link index -> locked orientation; only matching codes are visited.
  std::map<std::size_t, Orientation> forced;
  // Arcs appended to every configuration's network (interventions).
  std::vector<Arc> extra_arcs;
};

// Visits codes matching the forced orientations in ascending order.
void for_each_code(std::size_t link_count, const std::map<std::size_t, Orientation>& forced,
                   const std::function<void(ConfigCode)>& visit);

struct FeasibleSet {
  std::vector<ConfigCode> codes;  // ascending
  ConfigCode searched = 0;        // codes visited
};

// Throws DataError when links exceed options.max_links.
FeasibleSet enumerate_feasible(std::span<const Link> links, const DemandMatrix& demand,
                               const EnumerationOptions& options = {});

// Streams feasible configurations in ascending code order.
void for_each_feasible(std::span<const Link> links, const DemandMatrix& demand,
                       const EnumerationOptions& options,
                       const std::function<void(ConfigCode, const Configuration&)>& visit);

struct FeasibilityDiagnostics {
  ConfigCode total = 0;
  ConfigCode demand_feasible = 0;
  ConfigCode strongly_connected = 0;
  std::vector<std::pair<NodeId, NodeId>> zero_demand_pairs;
};

FeasibilityDiagnostics feasibility_diagnostics(std::span<const Link> links,
                                               const DemandMatrix& demand,
                                               const EnumerationOptions& options = {});

}  // namespace flowdir
