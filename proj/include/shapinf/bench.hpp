#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "shapinf/graph.hpp"
#include "shapinf/report.hpp"
#include "shapinf/shapley_approx.hpp"

namespace shapinf {

struct TopOutDegree {
  std::size_t k = 0;
};
struct GreedyIM {
  std::size_t k = 0;
  std::size_t rr_budget = 0;
};
struct ExplicitFile {
  std::filesystem::path path;
};
using SeedStrategy = std::variant<TopOutDegree, GreedyIM, ExplicitFile>;

/// k highest out-degree nodes, ties to the smaller id.
std::vector<NodeId> top_out_degree(const DirectedGraph& g, std::size_t k);

struct GreedyResult {
  std::vector<NodeId> picks;
  std::vector<std::uint64_t> coverage;  // newly covered RR sets per pick
};

/// Max-coverage greedy over `rr_budget` standard RR sets (roots uniform over
/// all nodes, full graph). Ties go to the smaller id.
GreedyResult greedy_im(const DirectedGraph& g, std::size_t k, std::size_t rr_budget, const StreamKey& key,
                       unsigned workers = 1);

SeedSet select_seeds(const DirectedGraph& g, const SeedStrategy& strategy, const StreamKey& key, unsigned workers = 1);

/// Power iteration on the topology (probabilities ignored); dangling mass is
/// spread uniformly. Scores sum to 1.
std::vector<double> pagerank(const DirectedGraph& g, double damping = 0.85, std::size_t iters = 100);

/// 1-based competition ranks of `scores`, larger is better; equal scores
/// share the smaller rank.
std::vector<std::size_t> descending_ranks(std::span<const double> scores);

struct ErrorSummary {
  double avg_relative_error = 0.0;
  std::map<NodeId, double> per_seed_errors;  // seeds with non-zero truth only
  std::size_t excluded_zero_truth = 0;
  std::string ground_truth_source;
};

/// Mean over seeds of |est - truth| / truth. Seeds whose truth is 0 are left
/// out and counted in `excluded_zero_truth`.
ErrorSummary average_relative_error(const ShapleyReport& estimate, const ShapleyReport& truth);

/// Accuracy of the automatic ground truth on large instances.
inline constexpr double kGroundTruthEpsilon = 0.01;
inline constexpr double kGroundTruthEll = 1.0;
inline constexpr std::size_t kGroundTruthK = 1;

/// Exact values when available (SingleStep always; other policies within the
/// brute-force guards), otherwise rr-set with (0.01, 1, 1). The source is
/// recorded in params["source"] as "exact" or "approx-ground-truth".
ShapleyReport make_ground_truth(const DirectedGraph& g, const SeedSet& seeds, TerminationPolicy policy,
                                const ApproxOptions& opts);

/// File name of a cached ground truth: hashes of graph and seeds, policy,
/// accuracy parameters and master seed.
std::string ground_truth_cache_name(const DirectedGraph& g, const SeedSet& seeds, TerminationPolicy policy,
                                    std::uint64_t master_seed);

/// make_ground_truth backed by a directory of JSON reports.
ShapleyReport cached_ground_truth(const DirectedGraph& g, const SeedSet& seeds, TerminationPolicy policy,
                                  const ApproxOptions& opts, const std::filesystem::path& cache_dir);

}  // namespace shapinf
