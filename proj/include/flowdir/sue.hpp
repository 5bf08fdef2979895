#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "flowdir/netmodel.hpp"

namespace flowdir {

struct SueParams {
  double sigma = 0.1;           // perception noise scale
  int max_iterations = 200;
  double gap_tolerance = 1e-3;  // relative gap
  std::uint64_t seed = 42;

  // Throws DataError on out-of-range values.
  void validate() const;

  friend bool operator==(const SueParams&, const SueParams&) = default;
};

// Multiplicative perception factors never drop below this.
inline constexpr double kPerceptionFloor = 0.05;

struct AssignmentResult {
  std::vector<double> arc_flow;  // indexed like DirectedNetwork::arcs()
  std::vector<double> arc_time;
  double stt = 0.0;
  double tltf = 0.0;
  bool converged = false;
  double final_gap = 0.0;
  int iterations = 0;

  friend bool operator==(const AssignmentResult&, const AssignmentResult&) = default;
};

/// Snapshot handed to an observer after every successive-averages step.
struct IterationTrace {
  int iteration = 0;
  std::span<const double> perceived_cost;  // costs the loading used
  std::span<const double> auxiliary_flow;  // all-or-nothing load y
  std::span<const double> flow;            // blended flow x after the step
  double gap = 0.0;
};

using IterationObserver = std::function<void(const IterationTrace&)>;

// BPR volume-delay: fft * (1 + b * (flow / capacity)^power).
double bpr_time(double fft, double b, double power, double flow, double capacity);
double bpr_time(const ArcAttributes& attrs, double flow);

// Stochastic user equilibrium by the method of successive averages with
// Monte-Carlo perceived-cost all-or-nothing loading.
// Throws InfeasibleError if a positive-demand pair has no path, ComputeError on
// non-finite costs.
AssignmentResult sue_assign(const DirectedNetwork& dn, const DemandMatrix& demand,
                            const SueParams& params, const IterationObserver& observer = {});

// Recomputed from flows: sum of flow * BPR time.
double system_travel_time(const DirectedNetwork& dn, std::span<const double> arc_flow);
double total_link_flow(std::span<const double> arc_flow);
double system_travel_time(const DirectedNetwork& dn, const AssignmentResult& result);
double total_link_flow(const AssignmentResult& result);

// SplitMix64-based combiner for deriving independent per-task seeds.
std::uint64_t mix64(std::uint64_t base, std::uint64_t value) noexcept;

}  // namespace flowdir
