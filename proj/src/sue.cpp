#include "flowdir/sue.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <random>

#include "flowdir/errors.hpp"

namespace flowdir {

void SueParams::validate() const {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw DataError("sigma must be finite and >= 0");
  if (max_iterations < 1) throw DataError("max_iterations must be >= 1");
  if (!(gap_tolerance > 0.0)) throw DataError("gap_tolerance must be > 0");
}

double bpr_time(double fft, double b, double power, double flow, double capacity) {
  if (!(capacity > 0.0)) throw ComputeError("BPR capacity must be positive");
  return fft * (1.0 + b * std::pow(flow / capacity, power));
}

double bpr_time(const ArcAttributes& attrs, double flow) {
  return bpr_time(attrs.free_flow_time, attrs.bpr_b, attrs.bpr_power, flow, attrs.capacity);
}

std::uint64_t mix64(std::uint64_t base, std::uint64_t value) noexcept {
  auto splitmix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return splitmix(base ^ splitmix(value));
}

double system_travel_time(const DirectedNetwork& dn, std::span<const double> arc_flow) {
  double stt = 0.0;
  for (std::size_t a = 0; a < dn.arc_count(); ++a) {
    stt += arc_flow[a] * bpr_time(dn.arcs()[a].attrs, arc_flow[a]);
  }
  return stt;
}

double total_link_flow(std::span<const double> arc_flow) {
  double sum = 0.0;
  for (double f : arc_flow) sum += f;
  return sum;
}

double system_travel_time(const DirectedNetwork& dn, const AssignmentResult& result) {
  return system_travel_time(dn, result.arc_flow);
}

double total_link_flow(const AssignmentResult& result) { return total_link_flow(result.arc_flow); }

namespace {

struct OriginDemand {
  std::size_t origin;
  std::vector<std::pair<std::size_t, double>> destinations;
};

/// Single-source shortest paths with ties resolved toward the lexicographically
/// smallest node sequence.
class PathTree {
 public:
  explicit PathTree(const DirectedNetwork& dn)
      : dn_(dn), dist_(dn.node_count()), pred_(dn.node_count()) {}

  void build(std::size_t origin, std::span<const double> cost) {
    constexpr auto kInf = std::numeric_limits<double>::infinity();
    std::fill(dist_.begin(), dist_.end(), kInf);
    std::fill(pred_.begin(), pred_.end(), kNone);
    std::vector<char> done(dn_.node_count(), 0);
    using Entry = std::pair<double, std::size_t>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
    dist_[origin] = 0.0;
    heap.emplace(0.0, origin);
    while (!heap.empty()) {
      const auto [d, u] = heap.top();
      heap.pop();
      if (done[u]) continue;
      done[u] = 1;
      for (auto arc : dn_.out_arcs(u)) {
        const auto v = dn_.head_index(arc);
        if (done[v]) continue;
        const double nd = d + cost[arc];
        if (nd < dist_[v] || (nd == dist_[v] && lexicographically_smaller(u, v))) {
          dist_[v] = nd;
          pred_[v] = arc;
          heap.emplace(nd, v);
        }
      }
    }
  }

  double distance(std::size_t node) const { return dist_[node]; }
  std::size_t pred_arc(std::size_t node) const { return pred_[node]; }
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

 private:
  std::vector<NodeId> sequence(std::size_t node) const {
    std::vector<NodeId> seq;
    for (auto cur = node;; cur = dn_.tail_index(pred_[cur])) {
      seq.push_back(dn_.nodes()[cur]);
      if (pred_[cur] == kNone) break;
    }
    std::reverse(seq.begin(), seq.end());
    return seq;
  }

  // Is path(u) + v smaller than the current path to v?
  bool lexicographically_smaller(std::size_t u, std::size_t v) const {
    if (pred_[v] == kNone) return true;
    auto candidate = sequence(u);
    candidate.push_back(dn_.nodes()[v]);
    return candidate < sequence(v);
  }

  const DirectedNetwork& dn_;
  std::vector<double> dist_;
  std::vector<std::size_t> pred_;
};

}  // namespace

AssignmentResult sue_assign(const DirectedNetwork& dn, const DemandMatrix& demand,
                            const SueParams& params, const IterationObserver& observer) {
  params.validate();
  if (auto pair = first_unserved_pair(dn, demand)) {
    throw InfeasibleError(pair->first, pair->second);
  }

  std::vector<OriginDemand> origins;
  for (const auto& [od, trips] : demand.entries()) {
    if (trips <= 0.0) continue;
    const auto o = *dn.index_of(od.first);
    const auto d = *dn.index_of(od.second);
    if (origins.empty() || origins.back().origin != o) origins.push_back({o, {}});
    origins.back().destinations.emplace_back(d, trips);
  }

  const std::size_t m = dn.arc_count();
  std::vector<double> x(m, 0.0), y(m, 0.0), time(m, 0.0), cost(m, 0.0);
  std::mt19937_64 rng(params.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  PathTree tree(dn);

  AssignmentResult result;
  for (int k = 0; k < params.max_iterations; ++k) {
    for (std::size_t a = 0; a < m; ++a) {
      time[a] = bpr_time(dn.arcs()[a].attrs, x[a]);
      double factor = 1.0;
      if (params.sigma > 0.0) factor = std::max(kPerceptionFloor, 1.0 + params.sigma * noise(rng));
      cost[a] = time[a] * factor;
      if (!std::isfinite(cost[a])) {
        throw ComputeError("non-finite cost on arc " + std::to_string(dn.arcs()[a].tail) + "->" +
                           std::to_string(dn.arcs()[a].head));
      }
    }

    std::fill(y.begin(), y.end(), 0.0);
    for (const auto& group : origins) {
      tree.build(group.origin, cost);
      for (const auto& [dest, trips] : group.destinations) {
        for (auto node = dest; node != group.origin;) {
          const auto arc = tree.pred_arc(node);
          y[arc] += trips;
          node = dn.tail_index(arc);
        }
      }
    }

    double diff = 0.0, total = 0.0;
    for (std::size_t a = 0; a < m; ++a) {
      diff += std::abs(y[a] - x[a]);
      total += x[a];
    }
    const double gap = diff / std::max(total, 1.0);

    const double step = 1.0 / static_cast<double>(k + 1);
    for (std::size_t a = 0; a < m; ++a) x[a] += (y[a] - x[a]) * step;

    result.iterations = k + 1;
    result.final_gap = gap;
    if (observer) observer({k, cost, y, x, gap});
    if (gap < params.gap_tolerance) {
      result.converged = true;
      break;
    }
  }

  result.arc_time.resize(m);
  for (std::size_t a = 0; a < m; ++a) result.arc_time[a] = bpr_time(dn.arcs()[a].attrs, x[a]);
  result.stt = 0.0;
  for (std::size_t a = 0; a < m; ++a) result.stt += x[a] * result.arc_time[a];
  result.tltf = total_link_flow(x);
  result.arc_flow = std::move(x);
  return result;
}

}  // namespace flowdir
