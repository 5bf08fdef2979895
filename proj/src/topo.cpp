#include "flowdir/topo.hpp"

#include <algorithm>
#include <numeric>

namespace flowdir {

long long HopMatrix::reachable_sum() const {
  long long sum = 0;
  for (std::size_t s = 0; s < n_; ++s) {
    for (std::size_t t = 0; t < n_; ++t) {
      if (s != t && reachable(s, t)) sum += at(s, t);
    }
  }
  return sum;
}

std::size_t HopMatrix::reachable_pairs() const {
  std::size_t count = 0;
  for (std::size_t s = 0; s < n_; ++s) {
    for (std::size_t t = 0; t < n_; ++t) {
      if (s != t && reachable(s, t)) ++count;
    }
  }
  return count;
}

HopMatrix hop_distances(const DirectedNetwork& dn) {
  const std::size_t n = dn.node_count();
  HopMatrix hops(n);
  std::vector<std::size_t> queue;
  queue.reserve(n);
  for (std::size_t s = 0; s < n; ++s) {
    queue.assign(1, s);
    hops.at(s, s) = 0;
    for (std::size_t i = 0; i < queue.size(); ++i) {
      const auto u = queue[i];
      for (auto arc : dn.out_arcs(u)) {
        const auto v = dn.head_index(arc);
        if (!hops.reachable(s, v)) {
          hops.at(s, v) = hops.at(s, u) + 1;
          queue.push_back(v);
        }
      }
    }
  }
  return hops;
}

BetweennessMap edge_betweenness(const DirectedNetwork& dn) {
  const std::size_t n = dn.node_count();
  BetweennessMap result;
  result.per_arc.assign(dn.arc_count(), 0.0);
  if (n < 2) return result;
  result.normalization = 1.0 / (static_cast<double>(n) * static_cast<double>(n - 1));

  std::vector<int> dist(n);
  std::vector<double> sigma(n);
  std::vector<double> delta(n);
  std::vector<std::size_t> order;
  order.reserve(n);

  // Sources in fixed ascending order so the floating-point reduction is stable.
  for (std::size_t s = 0; s < n; ++s) {
    std::fill(dist.begin(), dist.end(), -1);
    std::fill(sigma.begin(), sigma.end(), 0.0);
    std::fill(delta.begin(), delta.end(), 0.0);
    order.assign(1, s);
    dist[s] = 0;
    sigma[s] = 1.0;
    for (std::size_t i = 0; i < order.size(); ++i) {
      const auto u = order[i];
      for (auto arc : dn.out_arcs(u)) {
        const auto v = dn.head_index(arc);
        if (dist[v] < 0) {
          dist[v] = dist[u] + 1;
          order.push_back(v);
        }
        if (dist[v] == dist[u] + 1) sigma[v] += sigma[u];
      }
    }
    // Each target w contributes itself (the 1) plus everything routed through it.
    for (std::size_t i = order.size(); i-- > 1;) {
      const auto w = order[i];
      for (auto arc : dn.in_arcs(w)) {
        const auto v = dn.tail_index(arc);
        if (dist[v] >= 0 && dist[v] + 1 == dist[w]) {
          const double share = sigma[v] / sigma[w] * (1.0 + delta[w]);
          result.per_arc[arc] += share;
          delta[v] += share;
        }
      }
    }
  }
  for (auto& value : result.per_arc) value *= result.normalization;
  return result;
}

double tbc(const BetweennessMap& bc) {
  return std::accumulate(bc.per_arc.begin(), bc.per_arc.end(), 0.0);
}

}  // namespace flowdir
