#include "flowdir/tntp.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>

#include "flowdir/errors.hpp"
#include "flowdir/format.hpp"

namespace flowdir {

double DemandMatrix::at(NodeId origin, NodeId destination) const {
  if (origin == destination) return 0.0;
  auto it = demand_.find({origin, destination});
  return it == demand_.end() ? 0.0 : it->second;
}

void DemandMatrix::set(NodeId origin, NodeId destination, double trips) {
  if (!std::isfinite(trips) || trips < 0.0) {
    throw DataError("demand " + std::to_string(origin) + "->" + std::to_string(destination) +
                    " must be finite and non-negative");
  }
  if (origin == destination || trips == 0.0) {
    demand_.erase({origin, destination});
    return;
  }
  demand_[{origin, destination}] = trips;
}

bool DemandMatrix::contains(NodeId origin, NodeId destination) const {
  return demand_.count({origin, destination}) != 0;
}

double DemandMatrix::total() const {
  double sum = 0.0;
  for (const auto& [od, trips] : demand_) sum += trips;
  return sum;
}

namespace tntp {
namespace {

constexpr std::string_view kEndOfMetadata = "<END OF METADATA>";

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

template <typename T>
bool parse_number(std::string_view token, T& out) {
  const char* begin = token.data();
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc{} && ptr == end;
}

struct MetadataBlock {
  std::vector<std::pair<std::string, std::string>> entries;
  std::size_t lines_consumed = 0;
};

// Reads `<KEY> value` lines up to and including <END OF METADATA>.
MetadataBlock read_metadata(std::istream& in) {
  MetadataBlock block;
  std::string line;
  while (std::getline(in, line)) {
    ++block.lines_consumed;
    const auto text = trim(line);
    if (text.empty() || text.front() == '~') continue;
    if (text == kEndOfMetadata) return block;
    if (text.front() != '<') {
      throw ParseError(block.lines_consumed, "expected <KEY> value header line");
    }
    const auto close = text.find('>');
    if (close == std::string_view::npos) {
      throw ParseError(block.lines_consumed, "unterminated header key");
    }
    block.entries.emplace_back(std::string(trim(text.substr(1, close - 1))),
                               std::string(trim(text.substr(close + 1))));
  }
  throw DataError("missing <END OF METADATA>");
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    const std::size_t start = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

std::optional<long long> lookup_int(const std::vector<std::pair<std::string, std::string>>& meta,
                                    const std::string& key) {
  for (const auto& [k, v] : meta) {
    if (k == key) {
      long long value = 0;
      if (!parse_number(std::string_view(v), value)) {
        throw DataError("header <" + key + "> is not an integer: " + v);
      }
      return value;
    }
  }
  return std::nullopt;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

long long NetworkDataset::metadata_int(const std::string& key) const {
  auto value = lookup_int(metadata, key);
  if (!value) throw DataError("missing header <" + key + ">");
  return *value;
}

bool NetworkDataset::has_metadata(const std::string& key) const {
  return std::any_of(metadata.begin(), metadata.end(),
                     [&](const auto& kv) { return kv.first == key; });
}

std::vector<NodeId> NetworkDataset::nodes() const {
  std::set<NodeId> ids;
  for (const auto& arc : arcs) {
    ids.insert(arc.init_node);
    ids.insert(arc.term_node);
  }
  return {ids.begin(), ids.end()};
}

NetworkDataset parse_network(std::istream& in) {
  NetworkDataset net;
  auto meta = read_metadata(in);
  net.metadata = std::move(meta.entries);
  std::size_t line_no = meta.lines_consumed;

  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    auto text = trim(line);
    if (text.empty() || text.front() == '~') continue;
    if (const auto semi = text.find(';'); semi != std::string_view::npos) {
      if (!trim(text.substr(semi + 1)).empty()) {
        throw ParseError(line_no, "unexpected text after ';'");
      }
      text = text.substr(0, semi);
    }
    const auto fields = split_ws(text);
    if (fields.size() != 10) {
      throw ParseError(line_no, "expected 10 fields, found " + std::to_string(fields.size()));
    }
    ArcRecord arc;
    double* numeric[] = {&arc.capacity, &arc.length, &arc.free_flow_time, &arc.bpr_b,
                         &arc.bpr_power, &arc.speed,  &arc.toll,           &arc.link_type};
    if (!parse_number(fields[0], arc.init_node) || !parse_number(fields[1], arc.term_node)) {
      throw ParseError(line_no, "node ids must be integers");
    }
    for (std::size_t i = 0; i < 8; ++i) {
      if (!parse_number(fields[i + 2], *numeric[i]) || !std::isfinite(*numeric[i])) {
        throw ParseError(line_no, "non-numeric field '" + std::string(fields[i + 2]) + "'");
      }
    }
    if (arc.init_node <= 0 || arc.term_node <= 0) throw ParseError(line_no, "node ids must be positive");
    if (arc.init_node == arc.term_node) throw ParseError(line_no, "self-loop arc");
    if (arc.capacity <= 0.0) throw ParseError(line_no, "capacity must be positive");
    if (arc.free_flow_time < 0.0) throw ParseError(line_no, "free-flow time must be non-negative");
    if (arc.bpr_b < 0.0 || arc.bpr_power < 0.0) {
      throw ParseError(line_no, "BPR parameters must be non-negative");
    }
    net.arcs.push_back(arc);
  }

  if (auto declared = lookup_int(net.metadata, "NUMBER OF LINKS");
      declared && *declared != static_cast<long long>(net.arcs.size())) {
    throw DataError("header declares " + std::to_string(*declared) + " links but " +
                    std::to_string(net.arcs.size()) + " arc rows were read");
  }
  if (auto node_count = lookup_int(net.metadata, "NUMBER OF NODES")) {
    for (const auto& arc : net.arcs) {
      if (arc.init_node > *node_count || arc.term_node > *node_count) {
        throw DataError("arc " + std::to_string(arc.init_node) + "->" +
                        std::to_string(arc.term_node) + " exceeds declared node count");
      }
    }
  }
  return net;
}

NetworkDataset parse_network(const std::string& text) {
  std::istringstream in(text);
  return parse_network(in);
}

NetworkDataset load_network(const std::filesystem::path& path) {
  return parse_network(read_file(path));
}

std::string to_tntp(const NetworkDataset& net) {
  std::string out;
  for (const auto& [key, value] : net.metadata) out += "<" + key + "> " + value + "\n";
  out += std::string(kEndOfMetadata) + "\n\n\n";
  out += "~\tinit_node\tterm_node\tcapacity\tlength\tfree_flow_time\tb\tpower\tspeed\ttoll\tlink_type\t;\n";
  for (const auto& arc : net.arcs) {
    out += '\t' + std::to_string(arc.init_node) + '\t' + std::to_string(arc.term_node);
    for (double v : {arc.capacity, arc.length, arc.free_flow_time, arc.bpr_b, arc.bpr_power,
                     arc.speed, arc.toll, arc.link_type}) {
      out += '\t' + format_double(v);
    }
    out += "\t;\n";
  }
  return out;
}

DemandMatrix parse_trips(std::istream& in) {
  auto meta = read_metadata(in);
  std::size_t line_no = meta.lines_consumed;

  DemandMatrix demand;
  std::set<NodeId> seen_nodes;
  std::set<std::pair<NodeId, NodeId>> seen_pairs;
  std::optional<NodeId> origin;

  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    auto text = trim(line);
    if (text.empty() || text.front() == '~') continue;
    if (text.starts_with("Origin")) {
      NodeId id = 0;
      const auto fields = split_ws(text);
      if (fields.size() != 2 || !parse_number(fields[1], id) || id <= 0) {
        throw ParseError(line_no, "malformed Origin line");
      }
      origin = id;
      seen_nodes.insert(id);
      continue;
    }
    if (!origin) throw ParseError(line_no, "destination entries before any Origin line");

    // `dest : flow;` pairs, possibly several per line.
    std::string_view rest = text;
    while (!trim(rest).empty()) {
      const auto semi = rest.find(';');
      if (semi == std::string_view::npos) throw ParseError(line_no, "entry missing ';'");
      const auto entry = rest.substr(0, semi);
      rest = rest.substr(semi + 1);
      const auto colon = entry.find(':');
      if (colon == std::string_view::npos) throw ParseError(line_no, "entry missing ':'");
      NodeId dest = 0;
      double flow = 0.0;
      if (!parse_number(trim(entry.substr(0, colon)), dest) || dest <= 0) {
        throw ParseError(line_no, "non-numeric destination");
      }
      if (!parse_number(trim(entry.substr(colon + 1)), flow) || !std::isfinite(flow)) {
        throw ParseError(line_no, "non-numeric flow");
      }
      if (flow < 0.0) throw ParseError(line_no, "negative flow");
      if (!seen_pairs.insert({*origin, dest}).second) {
        throw ParseError(line_no, "duplicate pair " + std::to_string(*origin) + "->" +
                                      std::to_string(dest));
      }
      seen_nodes.insert(dest);
      demand.set(*origin, dest, flow);
    }
  }

  // Zones are 1..n when every listed id fits the declared count; extracted
  // subnetworks keep their original (non-contiguous) ids instead.
  std::vector<NodeId> zones(seen_nodes.begin(), seen_nodes.end());
  if (auto count = lookup_int(meta.entries, "NUMBER OF ZONES");
      count && *count > 0 && (seen_nodes.empty() || *seen_nodes.rbegin() <= *count)) {
    zones.resize(static_cast<std::size_t>(*count));
    std::iota(zones.begin(), zones.end(), 1);
  }
  demand.set_zones(std::move(zones));
  return demand;
}

DemandMatrix parse_trips(const std::string& text) {
  std::istringstream in(text);
  return parse_trips(in);
}

DemandMatrix load_trips(const std::filesystem::path& path) { return parse_trips(read_file(path)); }

std::string to_tntp(const DemandMatrix& demand) {
  std::string out;
  out += "<NUMBER OF ZONES> " + std::to_string(demand.zones().size()) + "\n";
  out += "<TOTAL OD FLOW> " + format_double(demand.total()) + "\n";
  out += std::string(kEndOfMetadata) + "\n\n\n";
  for (NodeId o : demand.zones()) {
    out += "Origin \t" + std::to_string(o) + "\n";
    int column = 0;
    for (NodeId d : demand.zones()) {
      out += "    " + std::to_string(d) + " : " + format_double(demand.at(o, d)) + ";";
      if (++column % 5 == 0) out += '\n';
    }
    if (column % 5 != 0) out += '\n';
    out += '\n';
  }
  return out;
}

Subnetwork extract_subnetwork(const NetworkDataset& net, const DemandMatrix& trips,
                              std::span<const NodeId> nodes) {
  std::set<NodeId> selection(nodes.begin(), nodes.end());
  if (selection.size() < 2) throw DataError("node selection needs at least two distinct nodes");

  const auto known = net.nodes();
  std::string missing;
  for (NodeId id : selection) {
    if (!std::binary_search(known.begin(), known.end(), id)) {
      missing += (missing.empty() ? "" : ",") + std::to_string(id);
    }
  }
  if (!missing.empty()) throw DataError("nodes not in network: " + missing);

  struct Directions {
    const ArcRecord* forward = nullptr;
    const ArcRecord* backward = nullptr;
  };
  std::map<std::pair<NodeId, NodeId>, Directions> pairs;
  for (const auto& arc : net.arcs) {
    if (!selection.count(arc.init_node) || !selection.count(arc.term_node)) continue;
    const NodeId lo = std::min(arc.init_node, arc.term_node);
    const NodeId hi = std::max(arc.init_node, arc.term_node);
    auto& slot = pairs[{lo, hi}];
    auto& target = arc.init_node == lo ? slot.forward : slot.backward;
    if (target) {
      throw DataError("duplicate arc " + std::to_string(arc.init_node) + "->" +
                      std::to_string(arc.term_node));
    }
    target = &arc;
  }

  Subnetwork sub;
  sub.nodes.assign(selection.begin(), selection.end());
  for (const auto& [key, dirs] : pairs) {
    Link link;
    link.a = key.first;
    link.b = key.second;
    const ArcRecord& fwd = dirs.forward ? *dirs.forward : *dirs.backward;
    const ArcRecord& bwd = dirs.backward ? *dirs.backward : *dirs.forward;
    link.forward = fwd.attributes();
    link.backward = bwd.attributes();
    link.mirrored = !dirs.forward || !dirs.backward;
    sub.links.push_back(link);
  }

  // Union-find over the selection to reject disconnected picks.
  std::map<NodeId, NodeId> parent;
  for (NodeId id : selection) parent[id] = id;
  auto find = [&](NodeId x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& link : sub.links) parent[find(link.a)] = find(link.b);
  const NodeId root = find(*selection.begin());
  for (NodeId id : selection) {
    if (find(id) != root) throw DataError("disconnected selection: node " + std::to_string(id));
  }

  sub.demand = DemandMatrix(sub.nodes);
  for (const auto& [od, flow] : trips.entries()) {
    if (selection.count(od.first) && selection.count(od.second)) {
      sub.demand.set(od.first, od.second, flow);
    }
  }
  return sub;
}

NetworkDataset to_dataset(const Subnetwork& sub) {
  NetworkDataset net;
  const NodeId max_node = sub.nodes.empty() ? 0 : sub.nodes.back();
  net.metadata = {{"NUMBER OF ZONES", std::to_string(max_node)},
                  {"NUMBER OF NODES", std::to_string(max_node)},
                  {"FIRST THRU NODE", "1"},
                  {"NUMBER OF LINKS", std::to_string(2 * sub.links.size())}};
  auto row = [](NodeId from, NodeId to, const ArcAttributes& attrs) {
    ArcRecord arc;
    arc.init_node = from;
    arc.term_node = to;
    arc.capacity = attrs.capacity;
    arc.length = attrs.length;
    arc.free_flow_time = attrs.free_flow_time;
    arc.bpr_b = attrs.bpr_b;
    arc.bpr_power = attrs.bpr_power;
    arc.link_type = 1;
    return arc;
  };
  for (const auto& link : sub.links) {
    net.arcs.push_back(row(link.a, link.b, link.forward));
    net.arcs.push_back(row(link.b, link.a, link.backward));
  }
  return net;
}

}  // namespace tntp
}  // namespace flowdir
