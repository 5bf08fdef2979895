#pragma once

// Fixtures and brute-force oracles shared by the unit and acceptance tests.
// Oracles here deliberately avoid the library's algorithms.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <stdexcept>
#include <vector>

#include "flowdir/netmodel.hpp"
#include "flowdir/tntp.hpp"

namespace testing {

using namespace flowdir;

inline ArcAttributes attrs(double capacity = 1000.0, double fft = 1.0, double b = 0.15,
                           double power = 4.0) {
  return {capacity, fft, b, power, fft};
}

inline Link link(NodeId a, NodeId b, ArcAttributes fw = attrs(), ArcAttributes bw = attrs()) {
  return {a, b, fw, bw, false};
}

inline DemandMatrix all_pairs(const std::vector<NodeId>& nodes, double trips = 10.0) {
  DemandMatrix d(nodes);
  for (auto o : nodes)
    for (auto t : nodes)
      if (o != t) d.set(o, t, trips);
  return d;
}

inline std::vector<Link> triangle() { return {link(1, 2), link(1, 3), link(2, 3)}; }

inline tntp::Subnetwork sioux_falls_subnet() {
  const std::string dir = FLOWDIR_DATA_DIR;
  return tntp::extract_subnetwork(tntp::load_network(dir + "/SiouxFalls_net.tntp"),
                                  tntp::load_trips(dir + "/SiouxFalls_trips.tntp"),
                                  std::vector<NodeId>{5, 6, 8, 9, 10, 16, 17});
}

// Transitive closure by Floyd-Warshall over an explicit arc list.
inline std::vector<std::vector<bool>> closure(const std::vector<NodeId>& nodes,
                                              const std::vector<std::pair<NodeId, NodeId>>& arcs) {
  const auto n = nodes.size();
  auto idx = [&](NodeId id) {
    return static_cast<std::size_t>(std::find(nodes.begin(), nodes.end(), id) - nodes.begin());
  };
  std::vector<std::vector<bool>> r(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i) r[i][i] = true;
  for (auto [t, h] : arcs) r[idx(t)][idx(h)] = true;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (r[i][k] && r[k][j]) r[i][j] = true;
  return r;
}

// Arcs a configuration produces, derived straight from the trit digits.
inline std::vector<std::pair<NodeId, NodeId>> oriented_arcs(const std::vector<Link>& links,
                                                            ConfigCode code) {
  std::vector<std::pair<NodeId, NodeId>> out;
  for (const auto& l : links) {
    const auto digit = code % 3;
    code /= 3;
    if (digit != 2) out.emplace_back(l.a, l.b);
    if (digit != 1) out.emplace_back(l.b, l.a);
  }
  return out;
}

// Naive full-scan count of codes whose every positive-demand pair is reachable.
inline std::vector<ConfigCode> naive_feasible(const std::vector<Link>& links, const DemandMatrix& demand) {
  std::vector<NodeId> nodes;
  for (const auto& l : links) {
    nodes.push_back(l.a);
    nodes.push_back(l.b);
  }
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  auto idx = [&](NodeId id) {
    return static_cast<std::size_t>(std::find(nodes.begin(), nodes.end(), id) - nodes.begin());
  };
  ConfigCode total = 1;
  for (std::size_t i = 0; i < links.size(); ++i) total *= 3;
  std::vector<ConfigCode> out;
  for (ConfigCode c = 0; c < total; ++c) {
    const auto r = closure(nodes, oriented_arcs(links, c));
    bool ok = true;
    for (const auto& [od, trips] : demand.entries())
      if (trips > 0 && !r[idx(od.first)][idx(od.second)]) ok = false;
    if (ok) out.push_back(c);
  }
  return out;
}

// Arc betweenness by enumerating every simple path for every ordered pair.
// Returned in dn.arcs() order, normalized by 1/(N(N-1)).
inline std::vector<double> brute_force_betweenness(const DirectedNetwork& dn) {
  const auto n = dn.node_count();
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adj(n);  // (head, arc)
  for (std::size_t a = 0; a < dn.arc_count(); ++a) adj[dn.tail_index(a)].emplace_back(dn.head_index(a), a);

  std::vector<double> bc(dn.arc_count(), 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t t = 0; t < n; ++t) {
      if (s == t) continue;
      std::vector<std::vector<std::size_t>> paths;
      std::vector<std::size_t> stack;
      std::vector<bool> seen(n, false);
      seen[s] = true;
      std::function<void(std::size_t)> dfs = [&](std::size_t v) {
        if (v == t) {
          paths.push_back(stack);
          return;
        }
        for (auto [w, a] : adj[v]) {
          if (seen[w]) continue;
          seen[w] = true;
          stack.push_back(a);
          dfs(w);
          stack.pop_back();
          seen[w] = false;
        }
      };
      dfs(s);
      if (paths.empty()) continue;
      std::size_t best = SIZE_MAX;
      for (const auto& p : paths) best = std::min(best, p.size());
      double count = 0;
      for (const auto& p : paths) count += p.size() == best;
      for (const auto& p : paths)
        if (p.size() == best)
          for (auto a : p) bc[a] += 1.0 / count;
    }
  }
  const double norm = n < 2 ? 0.0 : 1.0 / (static_cast<double>(n) * (n - 1));
  for (auto& v : bc) v *= norm;
  return bc;
}

// Random digraph on n nodes (ids 1..n), each ordered pair present with probability p.
inline DirectedNetwork random_digraph(std::mt19937_64& rng, std::size_t n, double p) {
  std::bernoulli_distribution coin(p);
  std::vector<NodeId> nodes;
  for (std::size_t i = 1; i <= n; ++i) nodes.push_back(static_cast<NodeId>(i));
  std::vector<Arc> arcs;
  for (auto a : nodes)
    for (auto b : nodes)
      if (a != b && coin(rng)) arcs.push_back({a, b, attrs()});
  return DirectedNetwork(nodes, arcs);
}

// Solves A x = b by Gauss-Jordan elimination on an explicit inverse.
inline std::vector<double> solve_by_inverse(std::vector<std::vector<double>> a, std::vector<double> b) {
  const auto n = a.size();
  std::vector<std::vector<double>> inv(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    if (std::abs(a[piv][c]) < 1e-300) throw std::runtime_error("singular");
    std::swap(a[c], a[piv]);
    std::swap(inv[c], inv[piv]);
    const double d = a[c][c];
    for (std::size_t j = 0; j < n; ++j) {
      a[c][j] /= d;
      inv[c][j] /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a[r][c];
      for (std::size_t j = 0; j < n; ++j) {
        a[r][j] -= f * a[c][j];
        inv[r][j] -= f * inv[c][j];
      }
    }
  }
  std::vector<double> x(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) x[i] += inv[i][j] * b[j];
  return x;
}

// Ridge with unpenalized intercept via the 4x4 augmented normal equations.
// Returns (b0, w1, w2, w3).
inline std::array<double, 4> ridge_oracle(const std::vector<std::array<double, 3>>& x,
                                          const std::vector<double>& y, double alpha) {
  std::vector<std::vector<double>> a(4, std::vector<double>(4, 0.0));
  std::vector<double> rhs(4, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const std::array<double, 4> row{1.0, x[i][0], x[i][1], x[i][2]};
    for (int r = 0; r < 4; ++r) {
      rhs[r] += row[r] * y[i];
      for (int c = 0; c < 4; ++c) a[r][c] += row[r] * row[c];
    }
  }
  for (int d = 1; d < 4; ++d) a[d][d] += alpha;
  const auto s = solve_by_inverse(a, rhs);
  return {s[0], s[1], s[2], s[3]};
}

}  // namespace testing
