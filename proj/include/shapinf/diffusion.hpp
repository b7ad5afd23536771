#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "shapinf/graph.hpp"
#include "shapinf/random.hpp"

namespace shapinf {

/// Outcome of one forward cascade. `activated` lists non-seed nodes in
/// activation order; `steps_taken` counts rounds that activated something.
struct CascadeResult {
  std::vector<NodeId> activated;
  std::size_t steps_taken = 0;
};

/// Reusable forward IC simulator over G_{T,S}. Seeds outside the coalition
/// are treated as absent: they are never activated and never relay.
///
/// Attempts run in frontier order, then out-adjacency order, one engine draw
/// per attempt, so a given Rng state always yields the same cascade.
class CascadeSimulator {
 public:
  CascadeSimulator(const DirectedGraph& g, const SeedSet& seeds);

  /// Number of non-seed nodes activated.
  std::size_t run(const Coalition& coalition, TerminationPolicy policy, Rng& rng);
  CascadeResult run_detailed(const Coalition& coalition, TerminationPolicy policy, Rng& rng);

 private:
  template <bool Record>
  std::size_t simulate(const Coalition& coalition, TerminationPolicy policy, Rng& rng, CascadeResult* out);
  void next_epoch();

  const DirectedGraph* g_;
  const SeedSet* seeds_;
  std::vector<std::uint32_t> active_;   // == epoch_ when active in the current run
  std::vector<std::uint32_t> removed_;  // == epoch_ when in T \ S for the current run
  std::uint32_t epoch_ = 0;
  std::vector<NodeId> frontier_;
  std::vector<NodeId> next_;
};

CascadeResult simulate_cascade(const DirectedGraph& g, const SeedSet& seeds, const Coalition& coalition,
                               TerminationPolicy policy, Rng& rng);

/// Monte Carlo estimate of U(S) with its standard error.
struct ValueEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

/// Samples per chunk of cascades; each chunk owns the stream key.child(chunk).
inline constexpr std::size_t kCascadeChunk = 1024;

/// Mean of |activated| over n_samples cascades on G_{T,S}. The empty
/// coalition returns 0 without sampling. Output does not depend on `workers`.
ValueEstimate estimate_value(const DirectedGraph& g, const SeedSet& seeds, const Coalition& coalition,
                             TerminationPolicy policy, std::size_t n_samples, const StreamKey& key,
                             unsigned workers = 1);

/// Closed-form single-step value: sum over non-seeds u of
/// 1 - prod_{w in N^-(u) ∩ S} (1 - p_{w,u}).
double exact_value_single_step(const DirectedGraph& g, const SeedSet& seeds, const Coalition& coalition);

/// For every non-seed v of one live-edge realization, the seeds t with a kept
/// path t -> v of length <= the policy's step bound. Kept edges entering a
/// seed are ignored, so distances are those of G' (see docs/formats.md).
/// Seed rows are always empty.
class ReachabilityMap {
 public:
  ReachabilityMap(std::size_t node_count, std::size_t seed_count);

  [[nodiscard]] std::size_t node_count() const noexcept { return node_count_; }
  [[nodiscard]] std::size_t seed_count() const noexcept { return seed_count_; }
  [[nodiscard]] std::size_t words() const noexcept { return words_; }

  [[nodiscard]] bool contains(NodeId v, std::size_t seed_pos) const {
    return (row(v)[seed_pos >> 6] >> (seed_pos & 63)) & 1u;
  }
  [[nodiscard]] std::size_t count(NodeId v) const;
  /// Seed positions reaching v, ascending.
  [[nodiscard]] std::vector<std::size_t> positions(NodeId v) const;

  template <class Fn>
  void for_each(NodeId v, Fn&& fn) const {
    const auto r = row(v);
    for (std::size_t w = 0; w < words_; ++w) {
      std::uint64_t bits = r[w];
      while (bits) {
        fn(w * 64 + static_cast<std::size_t>(__builtin_ctzll(bits)));
        bits &= bits - 1;
      }
    }
  }

  [[nodiscard]] std::span<const std::uint64_t> row(NodeId v) const { return {bits_.data() + v * words_, words_}; }
  [[nodiscard]] std::span<std::uint64_t> row(NodeId v) { return {bits_.data() + v * words_, words_}; }

 private:
  std::size_t node_count_;
  std::size_t seed_count_;
  std::size_t words_;
  std::vector<std::uint64_t> bits_;
};

ReachabilityMap multi_source_reach(const LiveEdgeGraph& live, const SeedSet& seeds, TerminationPolicy policy);

}  // namespace shapinf
