#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

#include "shapinf/diffusion.hpp"
#include "shapinf/graph.hpp"
#include "shapinf/random.hpp"
#include "shapinf/report.hpp"

namespace shapinf {

/// Fixed sample counts. `primary` is n_pi (permute-mc), n (live-edge) or
/// theta (rr-set); `secondary` is n_MC for permute-mc and ignored otherwise.
struct ExplicitBudget {
  std::size_t primary = 0;
  std::size_t secondary = 0;
};

/// (epsilon, delta) guarantee for permute-mc and live-edge.
struct GuaranteeBudget {
  double epsilon = 0.0;
  double delta = 0.0;
};

/// (epsilon, ell, k) guarantee for rr-set.
struct RRGuaranteeBudget {
  double epsilon = 0.0;
  double ell = 1.0;
  std::size_t k = 1;
};

using SampleBudget = std::variant<ExplicitBudget, GuaranteeBudget, RRGuaranteeBudget>;

/// Thrown when a guarantee-mode budget resolves to more work than allowed.
class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Default ceiling on sampled units (cascades, live-edge graphs or RR sets).
inline constexpr double kDefaultCostCeiling = 2e9;

struct ApproxOptions {
  StreamKey key{0};
  unsigned workers = 1;
  double cost_ceiling = kDefaultCostCeiling;
};

struct PermuteMCSize {
  std::uint64_t permutations = 0;
  std::uint64_t cascades = 0;  // per value estimate
};

/// n_pi = ceil(8|V|^2/eps^2 ln(4|T|/delta)), n_MC = ceil(8|V|^2/eps^2 ln(4 n_pi |T|/delta)).
PermuteMCSize permute_mc_guarantee_size(std::size_t nodes, std::size_t seeds, double epsilon, double delta);
/// n = ceil(|V|^2/(2 eps^2) ln(2|T|/delta)).
std::uint64_t live_edge_guarantee_size(std::size_t nodes, std::size_t seeds, double epsilon, double delta);
/// theta = ceil(n'(2 + 2eps/3)/(eps^2 LB) (ell ln n' + ln|T| + ln 4)).
std::uint64_t rr_theta(std::size_t n_prime, std::size_t seeds, double epsilon, double ell, double lb);
/// theta_i of the threshold search with eps' already applied.
std::uint64_t rr_round_theta(std::size_t n_prime, std::size_t seeds, double eps_prime, double ell, std::size_t round);

/// Per-seed credit sums of a sampling estimator plus the second moments
/// needed for standard errors. Merging adds field-wise.
class EstimatorAccumulator {
 public:
  explicit EstimatorAccumulator(std::size_t seed_count);

  /// One sample with a credit per seed position.
  void add_dense(std::span<const double> credits);
  /// One sample that splits a unit credit evenly over `positions` (an empty
  /// span is a sample that credits nobody).
  void add_split(std::span<const std::size_t> positions);
  void merge(const EstimatorAccumulator& other);

  [[nodiscard]] std::size_t seed_count() const noexcept { return sum_.size(); }
  [[nodiscard]] std::uint64_t sample_count() const noexcept { return samples_; }
  [[nodiscard]] std::span<const double> sums() const noexcept { return sum_; }
  [[nodiscard]] std::span<const double> sum_squares() const noexcept { return sum_sq_; }

  [[nodiscard]] double mean(std::size_t pos) const;
  [[nodiscard]] double std_error(std::size_t pos) const;
  /// Mean and standard error of the per-sample total credit.
  [[nodiscard]] double total_mean() const;
  [[nodiscard]] double total_std_error() const;

 private:
  std::vector<double> sum_;
  std::vector<double> sum_sq_;
  double total_ = 0.0;
  double total_sq_ = 0.0;
  std::uint64_t samples_ = 0;
};

/// One reverse-reachable set: a non-seed root and the seed positions reaching it.
struct RRSample {
  NodeId root = 0;
  std::vector<std::size_t> seed_hits;  // ascending seed positions
};

/// Lazy reverse BFS over G' (no edges into seeds). Each in-edge's state is
/// drawn the first time the edge is examined, and the search stops expanding
/// at `depth_bound` reverse hops. Seeds are collected, never expanded.
class RRSampler {
 public:
  RRSampler(const DirectedGraph& g_prime, const SeedSet& seeds,
            std::size_t depth_bound = TerminationPolicy::kUnbounded);

  /// Fills `hits` with the seed positions reaching `root`; returns hits.size().
  std::size_t sample(NodeId root, Rng& rng, std::vector<std::size_t>& hits);
  /// Number of nodes visited by the last call.
  [[nodiscard]] std::size_t last_visited() const noexcept { return visited_count_; }

 private:
  const DirectedGraph* g_;
  const SeedSet* seeds_;
  std::size_t depth_bound_;
  std::vector<std::uint32_t> mark_;
  std::uint32_t epoch_ = 0;
  std::vector<NodeId> queue_;
  std::vector<std::size_t> depth_;
  std::size_t visited_count_ = 0;
};

RRSample sample_rr_set(const DirectedGraph& g_prime, const SeedSet& seeds, NodeId root,
                       std::optional<std::size_t> depth_bound, Rng& rng);

/// Depth bound for reverse searches under `policy` (kUnbounded for Complete).
std::size_t rr_depth_bound(TerminationPolicy policy);

struct ThresholdResult {
  double lb = 1.0;
  std::size_t rounds = 0;        // rounds executed
  bool triggered = false;        // a round passed the stopping test
  std::uint64_t samples = 0;     // RR sets drawn
};

/// Lower bound on the k-th largest Shapley value by doubling search over
/// x_i = n'/2^i with eps' = sqrt(2) eps. Requires n' >= 4.
ThresholdResult estimate_threshold(const DirectedGraph& g_prime, const SeedSet& seeds, double epsilon, double ell,
                                   std::size_t k, TerminationPolicy policy, const ApproxOptions& opts);

ShapleyReport approx_permute_mc(const DirectedGraph& g, const SeedSet& seeds, TerminationPolicy policy,
                                const SampleBudget& budget, const ApproxOptions& opts);
ShapleyReport approx_live_edge(const DirectedGraph& g, const SeedSet& seeds, TerminationPolicy policy,
                               const SampleBudget& budget, const ApproxOptions& opts);
ShapleyReport approx_rr_set(const DirectedGraph& g, const SeedSet& seeds, TerminationPolicy policy,
                            const SampleBudget& budget, const ApproxOptions& opts);

/// Fraction of RR sets (uniform non-seed roots) hitting the coalition, scaled
/// by n'. An unbiased estimate of U(S).
ValueEstimate rr_coalition_value(const DirectedGraph& g, const SeedSet& seeds, const Coalition& coalition,
                                 TerminationPolicy policy, std::size_t samples, const ApproxOptions& opts);

}  // namespace shapinf
