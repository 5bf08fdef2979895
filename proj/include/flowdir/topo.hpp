#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "flowdir/netmodel.hpp"

namespace flowdir {

/// All-pairs unweighted shortest-path lengths over dense node indices.
class HopMatrix {
 public:
  static constexpr int kUnreachable = std::numeric_limits<int>::max();

  explicit HopMatrix(std::size_t n) : n_(n), d_(n * n, kUnreachable) {}

  std::size_t size() const noexcept { return n_; }
  int at(std::size_t from, std::size_t to) const { return d_[from * n_ + to]; }
  int& at(std::size_t from, std::size_t to) { return d_[from * n_ + to]; }
  bool reachable(std::size_t from, std::size_t to) const { return at(from, to) != kUnreachable; }

  // Sum of hop counts over reachable ordered pairs (s != t).
  long long reachable_sum() const;
  std::size_t reachable_pairs() const;

 private:
  std::size_t n_;
  std::vector<int> d_;
};

HopMatrix hop_distances(const DirectedNetwork& dn);

struct BetweennessMap {
  // Indexed like DirectedNetwork::arcs().
  std::vector<double> per_arc;
  // 1 / (N (N - 1)); zero when N < 2.
  double normalization = 0.0;
};

// Per-arc betweenness: for every ordered pair (s, t) the fraction of unweighted
// shortest s->t paths using the arc, summed and scaled by 1/(N(N-1)).
BetweennessMap edge_betweenness(const DirectedNetwork& dn);

// Total betweenness centrality: sum of per-arc values.
double tbc(const BetweennessMap& bc);

}  // namespace flowdir
