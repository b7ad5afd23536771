#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "shapinf/random.hpp"

namespace shapinf {

using NodeId = std::uint32_t;
using EdgeId = std::uint32_t;

/// Directed edge (src -> dst) with activation probability in (0, 1].
struct Edge {
  NodeId src;
  NodeId dst;
  double prob;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Adjacency entry: the neighbor on the other end, the edge probability, and
/// the id of the underlying edge.
struct Arc {
  NodeId node;
  double prob;
  EdgeId edge;
};

class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Edge-list parse failure; `line()` is 1-based, 0 when not tied to a line.
class GraphFormatError : public GraphError {
 public:
  GraphFormatError(std::size_t line, const std::string& what);
  [[nodiscard]] std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Immutable directed graph with per-edge activation probabilities.
///
/// Nodes are dense ids 0..n-1. Edges are stored sorted by (src, dst); an
/// EdgeId is the edge's position in that order and doubles as its index in
/// the out-adjacency CSR. Each node may carry an external label; unlabeled
/// graphs use the decimal id as label.
class DirectedGraph {
 public:
  DirectedGraph() = default;

  /// Validates and builds a graph. Rejects self-loops, duplicate (src, dst)
  /// pairs, out-of-range endpoints and probabilities outside (0, 1].
  /// `labels` is either empty or has exactly `node_count` unique entries.
  static DirectedGraph from_edges(std::size_t node_count, std::vector<Edge> edges,
                                  std::vector<std::string> labels = {});

  [[nodiscard]] std::size_t node_count() const noexcept { return node_count_; }
  [[nodiscard]] std::size_t edge_count() const noexcept { return edges_.size(); }

  [[nodiscard]] std::span<const Edge> edges() const noexcept { return edges_; }
  [[nodiscard]] const Edge& edge(EdgeId e) const { return edges_[e]; }

  [[nodiscard]] std::span<const Arc> out_arcs(NodeId u) const noexcept {
    return {out_arcs_.data() + out_offsets_[u], out_arcs_.data() + out_offsets_[u + 1]};
  }
  [[nodiscard]] std::span<const Arc> in_arcs(NodeId v) const noexcept {
    return {in_arcs_.data() + in_offsets_[v], in_arcs_.data() + in_offsets_[v + 1]};
  }
  [[nodiscard]] std::size_t out_degree(NodeId u) const noexcept { return out_offsets_[u + 1] - out_offsets_[u]; }
  [[nodiscard]] std::size_t in_degree(NodeId v) const noexcept { return in_offsets_[v + 1] - in_offsets_[v]; }

  /// True when every in-edge of v carries the same probability.
  [[nodiscard]] bool uniform_in_prob(NodeId v) const noexcept { return uniform_in_[v] != 0; }

  [[nodiscard]] std::optional<double> edge_prob(NodeId src, NodeId dst) const;

  [[nodiscard]] std::string label(NodeId v) const;
  [[nodiscard]] std::optional<NodeId> find(std::string_view label) const;
  [[nodiscard]] bool has_labels() const noexcept { return labels_ != nullptr; }

  /// Same topology and labels, new probabilities (indexed by EdgeId).
  [[nodiscard]] DirectedGraph with_probabilities(std::span<const double> probs) const;

  /// Keeps the edges for which `keep(edge)` is true; node ids and labels are unchanged.
  template <class Pred>
  [[nodiscard]] DirectedGraph filter_edges(Pred&& keep) const {
    std::vector<Edge> kept;
    kept.reserve(edges_.size());
    for (const Edge& e : edges_)
      if (keep(e)) kept.push_back(e);
    return rebuild(std::move(kept));
  }

  /// 64-bit content hash over node count, edges (bitwise probabilities) and labels.
  [[nodiscard]] std::uint64_t content_hash() const;

  /// Equality up to renumbering: same node labels and the same labeled,
  /// probability-weighted edge set.
  friend bool operator==(const DirectedGraph& a, const DirectedGraph& b);

 private:
  struct LabelTable {
    std::vector<std::string> names;
    std::unordered_map<std::string, NodeId> index;
  };

  [[nodiscard]] DirectedGraph rebuild(std::vector<Edge> sorted_edges) const;
  void build_adjacency();

  std::size_t node_count_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::size_t> out_offsets_{0};
  std::vector<Arc> out_arcs_;
  std::vector<std::size_t> in_offsets_{0};
  std::vector<Arc> in_arcs_;
  std::vector<char> uniform_in_;
  std::shared_ptr<const LabelTable> labels_;
};

/// The fixed set of seed nodes (the players). Iteration order is insertion order.
class SeedSet {
 public:
  static constexpr std::int32_t kNotSeed = -1;

  SeedSet(const DirectedGraph& g, std::vector<NodeId> members);

  [[nodiscard]] std::span<const NodeId> members() const noexcept { return members_; }
  [[nodiscard]] std::size_t size() const noexcept { return members_.size(); }
  [[nodiscard]] NodeId operator[](std::size_t i) const { return members_[i]; }
  [[nodiscard]] bool contains(NodeId v) const noexcept { return v < position_.size() && position_[v] != kNotSeed; }
  /// Position of v in the seed order, or kNotSeed.
  [[nodiscard]] std::int32_t position(NodeId v) const noexcept {
    return v < position_.size() ? position_[v] : kNotSeed;
  }
  [[nodiscard]] std::size_t node_count() const noexcept { return position_.size(); }
  [[nodiscard]] std::uint64_t content_hash() const;

 private:
  std::vector<NodeId> members_;
  std::vector<std::int32_t> position_;
};

/// A subset S of the seed set, stored as membership flags over seed positions.
class Coalition {
 public:
  static Coalition none(const SeedSet& seeds);
  static Coalition all(const SeedSet& seeds);
  /// Throws std::invalid_argument when a node is not a seed.
  static Coalition of(const SeedSet& seeds, std::span<const NodeId> nodes);
  /// Bit i of `mask` selects seeds[i]; requires seeds.size() <= 64.
  static Coalition from_mask(const SeedSet& seeds, std::uint64_t mask);

  [[nodiscard]] bool contains_position(std::size_t i) const { return member_[i] != 0; }
  [[nodiscard]] std::size_t size() const noexcept { return count_; }
  [[nodiscard]] bool empty() const noexcept { return count_ == 0; }
  [[nodiscard]] std::size_t seed_count() const noexcept { return member_.size(); }

  void insert_position(std::size_t i);

 private:
  explicit Coalition(std::size_t seed_count) : member_(seed_count, 0) {}
  std::vector<char> member_;
  std::size_t count_ = 0;
};

class TerminationPolicy {
 public:
  enum class Kind { SingleStep, KSteps, Complete };
  static constexpr std::size_t kUnbounded = std::numeric_limits<std::size_t>::max();

  static constexpr TerminationPolicy single_step() noexcept { return TerminationPolicy(Kind::SingleStep, 1); }
  /// K >= 2; K = 1 must be expressed as single_step().
  static TerminationPolicy k_steps(std::size_t k);
  static constexpr TerminationPolicy complete() noexcept { return TerminationPolicy(Kind::Complete, kUnbounded); }
  /// Parses "single", "k:<K>" or "complete".
  static TerminationPolicy parse(std::string_view text);

  [[nodiscard]] constexpr Kind kind() const noexcept { return kind_; }
  /// Maximum number of diffusion steps (kUnbounded for Complete).
  [[nodiscard]] constexpr std::size_t step_bound() const noexcept { return bound_; }
  [[nodiscard]] std::string to_string() const;

  friend constexpr bool operator==(const TerminationPolicy&, const TerminationPolicy&) = default;

 private:
  constexpr TerminationPolicy(Kind kind, std::size_t bound) noexcept : kind_(kind), bound_(bound) {}
  Kind kind_;
  std::size_t bound_;
};

/// G_{T,S}: the graph with the seeds outside the coalition removed together
/// with all their incident edges. Node ids are kept; removed nodes are flagged.
struct CoalitionSubgraph {
  DirectedGraph graph;
  std::vector<char> present;

  [[nodiscard]] bool contains(NodeId v) const { return present[v] != 0; }
  [[nodiscard]] std::size_t present_count() const;
};

/// One live-edge realization: each edge of the source graph kept independently
/// with its probability. Holds a reference to the source graph, which must
/// outlive it.
class LiveEdgeGraph {
 public:
  LiveEdgeGraph(const DirectedGraph& source, std::vector<char> kept);

  [[nodiscard]] const DirectedGraph& source() const noexcept { return *source_; }
  [[nodiscard]] bool kept(EdgeId e) const { return kept_[e] != 0; }
  [[nodiscard]] std::size_t kept_count() const noexcept { return kept_count_; }
  [[nodiscard]] std::vector<Edge> kept_edges() const;

 private:
  const DirectedGraph* source_;
  std::vector<char> kept_;
  std::size_t kept_count_ = 0;
};

// --- construction and I/O -------------------------------------------------

/// Reads a whitespace-separated `src dst [prob]` edge list. Lines whose first
/// non-blank character is '#' and blank lines are skipped. The prob column may
/// be omitted only when `default_prob` is given. Node ids are assigned in
/// order of first appearance.
DirectedGraph load_edge_list(const std::filesystem::path& path, std::optional<double> default_prob = std::nullopt);
DirectedGraph parse_edge_list(std::string_view text, std::optional<double> default_prob = std::nullopt);

/// Writes one `src dst prob` line per edge, labels as node names, probabilities
/// with 17 significant digits. Round-trips through load_edge_list.
void write_edge_list(const DirectedGraph& g, const std::filesystem::path& path);
std::string format_edge_list(const DirectedGraph& g);

/// Reads one node label per line ('#' comments and blank lines skipped).
SeedSet load_seed_file(const DirectedGraph& g, const std::filesystem::path& path);
SeedSet parse_seed_list(const DirectedGraph& g, std::string_view text);

// --- transformations -----------------------------------------------------

/// Weighted Cascade: every edge (u, v) gets probability 1 / in_degree(v).
DirectedGraph assign_weighted_cascade(const DirectedGraph& topology);

/// Every edge gets probability p, p in (0, 1].
DirectedGraph assign_uniform(const DirectedGraph& topology, double p);

/// G(n, m) Erdos-Renyi digraph with m = min(round(n * avg_degree), n(n-1))
/// distinct non-loop edges, all probabilities 1.
DirectedGraph generate_erdos_renyi(std::size_t n, double avg_degree, std::uint64_t rng_seed);

CoalitionSubgraph coalition_subgraph(const DirectedGraph& g, const SeedSet& seeds, const Coalition& coalition);

/// G': all edges entering a seed removed.
DirectedGraph remove_seed_in_edges(const DirectedGraph& g, const SeedSet& seeds);

/// Draws one live-edge realization; one Bernoulli per edge in EdgeId order.
LiveEdgeGraph sample_live_edge(const DirectedGraph& g, Rng& rng);

}  // namespace shapinf
