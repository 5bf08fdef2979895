#include "flowdir/netmodel.hpp"

#include <algorithm>
#include <limits>
#include <set>

#include "flowdir/errors.hpp"

namespace flowdir {

int direction_sign(Orientation o) noexcept {
  switch (o) {
    case Orientation::Forward: return 1;
    case Orientation::Backward: return -1;
    case Orientation::TwoWay: break;
  }
  return 0;
}

std::string_view to_string(Orientation o) noexcept {
  switch (o) {
    case Orientation::Forward: return "forward";
    case Orientation::Backward: return "backward";
    case Orientation::TwoWay: break;
  }
  return "two_way";
}

Orientation orientation_from_string(std::string_view name) {
  if (name == "two_way") return Orientation::TwoWay;
  if (name == "forward") return Orientation::Forward;
  if (name == "backward") return Orientation::Backward;
  throw DataError("unknown orientation '" + std::string(name) + "'");
}

ConfigCode space_size(std::size_t link_count) {
  ConfigCode size = 1;
  for (std::size_t i = 0; i < link_count; ++i) {
    if (size > std::numeric_limits<ConfigCode>::max() / 3) {
      throw DataError("configuration space 3^" + std::to_string(link_count) + " overflows");
    }
    size *= 3;
  }
  return size;
}

ConfigCode Configuration::code() const { return encode(*this); }

std::string Configuration::trits() const {
  std::string out;
  out.reserve(orientations_.size());
  for (auto o : orientations_) out.push_back(static_cast<char>('0' + static_cast<int>(o)));
  return out;
}

Configuration Configuration::from_trits(std::string_view trits) {
  std::vector<Orientation> orientations;
  orientations.reserve(trits.size());
  for (char c : trits) {
    if (c < '0' || c > '2') throw DataError("invalid trit '" + std::string(1, c) + "'");
    orientations.push_back(static_cast<Orientation>(c - '0'));
  }
  return Configuration(std::move(orientations));
}

ConfigCode encode(const Configuration& config) {
  const auto& o = config.orientations();
  ConfigCode code = 0;
  for (std::size_t i = o.size(); i-- > 0;) code = code * 3 + static_cast<ConfigCode>(o[i]);
  return code;
}

Configuration decode(ConfigCode code, std::size_t link_count) {
  if (code >= space_size(link_count)) {
    throw DataError("configuration code " + std::to_string(code) + " out of range for " +
                    std::to_string(link_count) + " links");
  }
  std::vector<Orientation> orientations(link_count);
  for (auto& o : orientations) {
    o = static_cast<Orientation>(code % 3);
    code /= 3;
  }
  return Configuration(std::move(orientations));
}

DirectedNetwork::DirectedNetwork(std::vector<NodeId> nodes, std::vector<Arc> arcs)
    : nodes_(std::move(nodes)), arcs_(std::move(arcs)) {
  std::sort(nodes_.begin(), nodes_.end());
  nodes_.erase(std::unique(nodes_.begin(), nodes_.end()), nodes_.end());

  const std::size_t n = nodes_.size();
  tails_.reserve(arcs_.size());
  heads_.reserve(arcs_.size());
  std::set<std::pair<NodeId, NodeId>> seen;
  for (const auto& arc : arcs_) {
    auto t = index_of(arc.tail);
    auto h = index_of(arc.head);
    if (!t || !h) {
      throw DataError("arc " + std::to_string(arc.tail) + "->" + std::to_string(arc.head) +
                      " references an unknown node");
    }
    if (*t == *h) throw DataError("self-loop at node " + std::to_string(arc.tail));
    if (!seen.insert({arc.tail, arc.head}).second) {
      throw DataError("duplicate arc " + std::to_string(arc.tail) + "->" +
                      std::to_string(arc.head));
    }
    tails_.push_back(*t);
    heads_.push_back(*h);
  }

  auto build_star = [&](const std::vector<std::size_t>& key, const std::vector<std::size_t>& other,
                        std::vector<std::size_t>& offsets, std::vector<std::size_t>& index) {
    offsets.assign(n + 1, 0);
    for (auto k : key) ++offsets[k + 1];
    for (std::size_t i = 0; i < n; ++i) offsets[i + 1] += offsets[i];
    index.resize(arcs_.size());
    auto cursor = offsets;
    for (std::size_t a = 0; a < arcs_.size(); ++a) index[cursor[key[a]]++] = a;
    for (std::size_t i = 0; i < n; ++i) {
      std::sort(index.begin() + offsets[i], index.begin() + offsets[i + 1],
                [&](std::size_t x, std::size_t y) { return other[x] < other[y]; });
    }
  };
  build_star(tails_, heads_, out_offsets_, out_arcs_);
  build_star(heads_, tails_, in_offsets_, in_arcs_);
}

std::optional<std::size_t> DirectedNetwork::index_of(NodeId id) const {
  auto it = std::lower_bound(nodes_.begin(), nodes_.end(), id);
  if (it == nodes_.end() || *it != id) return std::nullopt;
  return static_cast<std::size_t>(it - nodes_.begin());
}

std::vector<NodeId> link_nodes(std::span<const Link> links) {
  std::vector<NodeId> nodes;
  nodes.reserve(2 * links.size());
  for (const auto& link : links) {
    nodes.push_back(link.a);
    nodes.push_back(link.b);
  }
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  return nodes;
}

DirectedNetwork directed_view(std::span<const Link> links, const Configuration& config,
                              const ViewOptions& options, std::span<const Arc> extra_arcs) {
  if (links.size() != config.size()) {
    throw DataError("configuration has " + std::to_string(config.size()) + " links, network has " +
                    std::to_string(links.size()));
  }
  std::vector<Arc> arcs;
  arcs.reserve(2 * links.size() + extra_arcs.size());
  for (std::size_t i = 0; i < links.size(); ++i) {
    const auto& link = links[i];
    switch (config[i]) {
      case Orientation::TwoWay:
        arcs.push_back({link.a, link.b, link.forward});
        arcs.push_back({link.b, link.a, link.backward});
        break;
      case Orientation::Forward: {
        Arc arc{link.a, link.b, link.forward};
        if (options.contraflow_capacity_merge) arc.attrs.capacity += link.backward.capacity;
        arcs.push_back(arc);
        break;
      }
      case Orientation::Backward: {
        Arc arc{link.b, link.a, link.backward};
        if (options.contraflow_capacity_merge) arc.attrs.capacity += link.forward.capacity;
        arcs.push_back(arc);
        break;
      }
    }
  }
  for (const auto& extra : extra_arcs) {
    // An added arc parallel to an existing one widens it.
    auto it = std::find_if(arcs.begin(), arcs.end(),
                           [&](const Arc& a) { return a.tail == extra.tail && a.head == extra.head; });
    if (it == arcs.end()) {
      arcs.push_back(extra);
    } else {
      it->attrs.capacity += extra.attrs.capacity;
    }
  }
  return DirectedNetwork(link_nodes(links), std::move(arcs));
}

namespace {

// Nodes reachable from `source` (dense indices), by breadth-first search.
std::vector<char> reachable_from(const DirectedNetwork& dn, std::size_t source) {
  std::vector<char> seen(dn.node_count(), 0);
  std::vector<std::size_t> queue{source};
  seen[source] = 1;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    for (auto arc : dn.out_arcs(queue[head])) {
      const auto v = dn.head_index(arc);
      if (!seen[v]) {
        seen[v] = 1;
        queue.push_back(v);
      }
    }
  }
  return seen;
}

void check_sweep_guard(std::size_t link_count, std::size_t max_links) {
  if (link_count > max_links) {
    throw DataError(std::to_string(link_count) + " links exceeds the sweep guard of " +
                    std::to_string(max_links) + "; raise the link limit explicitly to enumerate 3^" +
                    std::to_string(link_count) + " configurations");
  }
}

}  // namespace

std::optional<std::pair<NodeId, NodeId>> first_unserved_pair(const DirectedNetwork& dn,
                                                             const DemandMatrix& demand) {
  std::optional<NodeId> cached_origin;
  std::vector<char> reach;
  for (const auto& [od, trips] : demand.entries()) {
    if (trips <= 0.0) continue;
    auto o = dn.index_of(od.first);
    auto d = dn.index_of(od.second);
    if (!o || !d) return od;
    if (cached_origin != od.first) {
      reach = reachable_from(dn, *o);
      cached_origin = od.first;
    }
    if (!reach[*d]) return od;
  }
  return std::nullopt;
}

bool is_feasible(const DirectedNetwork& dn, const DemandMatrix& demand) {
  return !first_unserved_pair(dn, demand).has_value();
}

bool is_strongly_connected(const DirectedNetwork& dn) {
  for (std::size_t s = 0; s < dn.node_count(); ++s) {
    auto reach = reachable_from(dn, s);
    if (std::find(reach.begin(), reach.end(), 0) != reach.end()) return false;
  }
  return true;
}

void for_each_code(std::size_t link_count, const std::map<std::size_t, Orientation>& forced,
                   const std::function<void(ConfigCode)>& visit) {
  space_size(link_count);
  std::vector<ConfigCode> place(link_count);
  ConfigCode base = 0;
  for (std::size_t i = 0; i < link_count; ++i) place[i] = i == 0 ? 1 : place[i - 1] * 3;

  std::vector<std::size_t> free_links;
  for (const auto& [index, o] : forced) {
    if (index >= link_count) throw DataError("forced link " + std::to_string(index) + " does not exist");
  }
  for (std::size_t i = 0; i < link_count; ++i) {
    auto it = forced.find(i);
    if (it == forced.end()) {
      free_links.push_back(i);
    } else {
      base += place[i] * static_cast<ConfigCode>(it->second);
    }
  }

  // Odometer over the free digits, least-significant first, keeps codes ascending.
  std::vector<std::uint8_t> digits(free_links.size(), 0);
  ConfigCode code = base;
  while (true) {
    visit(code);
    std::size_t k = 0;
    for (; k < digits.size(); ++k) {
      if (digits[k] < 2) {
        ++digits[k];
        code += place[free_links[k]];
        break;
      }
      code -= 2 * place[free_links[k]];
      digits[k] = 0;
    }
    if (k == digits.size()) break;
  }
}

void for_each_feasible(std::span<const Link> links, const DemandMatrix& demand,
                       const EnumerationOptions& options,
                       const std::function<void(ConfigCode, const Configuration&)>& visit) {
  check_sweep_guard(links.size(), options.max_links);
  for_each_code(links.size(), options.forced, [&](ConfigCode code) {
    const auto config = decode(code, links.size());
    if (is_feasible(directed_view(links, config, options.view, options.extra_arcs), demand)) visit(code, config);
  });
}

FeasibleSet enumerate_feasible(std::span<const Link> links, const DemandMatrix& demand,
                               const EnumerationOptions& options) {
  FeasibleSet result;
  check_sweep_guard(links.size(), options.max_links);
  for_each_code(links.size(), options.forced, [&](ConfigCode code) {
    ++result.searched;
    const auto config = decode(code, links.size());
    if (is_feasible(directed_view(links, config, options.view, options.extra_arcs), demand)) {
      result.codes.push_back(code);
    }
  });
  return result;
}

FeasibilityDiagnostics feasibility_diagnostics(std::span<const Link> links,
                                               const DemandMatrix& demand,
                                               const EnumerationOptions& options) {
  FeasibilityDiagnostics diag;
  const auto nodes = link_nodes(links);
  for (NodeId o : nodes) {
    for (NodeId d : nodes) {
      if (o != d && demand.at(o, d) <= 0.0) diag.zero_demand_pairs.emplace_back(o, d);
    }
  }
  check_sweep_guard(links.size(), options.max_links);
  for_each_code(links.size(), options.forced, [&](ConfigCode code) {
    ++diag.total;
    const auto dn =
        directed_view(links, decode(code, links.size()), options.view, options.extra_arcs);
    if (is_feasible(dn, demand)) ++diag.demand_feasible;
    if (is_strongly_connected(dn)) ++diag.strongly_connected;
  });
  return diag;
}

}  // namespace flowdir
