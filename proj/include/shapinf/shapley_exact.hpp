#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "shapinf/diffusion.hpp"
#include "shapinf/graph.hpp"
#include "shapinf/report.hpp"

namespace shapinf {

/// C[k] = k! (n-k-1)! / n! for k = 0..n-1, evaluated through lgamma so large
/// n does not overflow.
std::vector<double> factorial_coefficients(std::size_t t_count);

/// alpha[k] = sum over k-subsets S of L of prod_{w in S} (1 - p_w), k = 0..|L|,
/// filled by the in-place recurrence with k descending and L consumed in order.
std::vector<double> alpha_coefficients(std::span<const double> probs);

/// Shapley values under single-step termination in O(sum_u |T(u)|^3).
/// Work is split over fixed node chunks, so the result does not depend on
/// `workers`.
ShapleyReport exact_single_step(const DirectedGraph& g, const SeedSet& seeds, unsigned workers = 1);

inline constexpr std::size_t kBruteForceMaxSeeds = 12;
inline constexpr std::size_t kBruteForceMaxEdges = 20;

/// How the brute-force oracle evaluates U(S).
struct ValueMode {
  enum class Kind { Exact, MonteCarlo };
  Kind kind = Kind::Exact;
  std::size_t samples = 0;

  static ValueMode exact() { return {}; }
  static ValueMode monte_carlo(std::size_t n) { return {Kind::MonteCarlo, n}; }
};

/// Exact U(S) for every coalition, indexed by bitmask over seed positions.
/// SingleStep uses the closed form; other policies enumerate every live-edge
/// realization of the edges that do not enter a seed (at most
/// kBruteForceMaxEdges of them) and run a bounded BFS in G_{T,S}.
std::vector<double> exact_coalition_values(const DirectedGraph& g, const SeedSet& seeds, TerminationPolicy policy);

/// Monte Carlo U(S) for every coalition, n cascades each.
std::vector<double> sampled_coalition_values(const DirectedGraph& g, const SeedSet& seeds, TerminationPolicy policy,
                                             std::size_t samples, const StreamKey& key, unsigned workers = 1);

/// Shapley values from a full table of coalition values (bitmask-indexed):
/// Shap(t) = sum_{S not containing t} |S|!(n-|S|-1)!/n! (U(S+t) - U(S)).
std::vector<double> shapley_from_coalition_values(std::span<const double> u, std::size_t seed_count);

/// Brute-force Shapley oracle for any policy on tiny instances.
ShapleyReport shapley_bruteforce(const DirectedGraph& g, const SeedSet& seeds, TerminationPolicy policy,
                                 ValueMode mode, const StreamKey& key, unsigned workers = 1);

}  // namespace shapinf
