#include "shapinf/graph.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstring>
#include <numeric>
#include <tuple>

namespace shapinf {

GraphFormatError::GraphFormatError(std::size_t line, const std::string& what)
    : GraphError(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}

namespace {

void check_probability(double p) {
  if (!(p > 0.0 && p <= 1.0)) throw GraphError("edge probability " + std::to_string(p) + " outside (0, 1]");
}

std::uint64_t mix(std::uint64_t h, std::uint64_t v) { return detail::splitmix64(h ^ v); }

}  // namespace

DirectedGraph DirectedGraph::from_edges(std::size_t node_count, std::vector<Edge> edges,
                                        std::vector<std::string> labels) {
  if (node_count > std::numeric_limits<NodeId>::max()) throw GraphError("too many nodes");
  if (edges.size() > std::numeric_limits<EdgeId>::max()) throw GraphError("too many edges");
  for (const Edge& e : edges) {
    if (e.src >= node_count || e.dst >= node_count)
      throw GraphError("edge endpoint out of range: " + std::to_string(e.src) + " -> " + std::to_string(e.dst));
    if (e.src == e.dst) throw GraphError("self-loop on node " + std::to_string(e.src));
    check_probability(e.prob);
  }
  std::sort(edges.begin(), edges.end(),
            [](const Edge& a, const Edge& b) { return a.src != b.src ? a.src < b.src : a.dst < b.dst; });
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (edges[i].src == edges[i - 1].src && edges[i].dst == edges[i - 1].dst)
      throw GraphError("duplicate edge " + std::to_string(edges[i].src) + " -> " + std::to_string(edges[i].dst));
  }

  DirectedGraph g;
  g.node_count_ = node_count;
  g.edges_ = std::move(edges);
  if (!labels.empty()) {
    if (labels.size() != node_count) throw GraphError("label count does not match node count");
    auto table = std::make_shared<LabelTable>();
    table->index.reserve(labels.size());
    for (NodeId v = 0; v < labels.size(); ++v) {
      if (!table->index.emplace(labels[v], v).second) throw GraphError("duplicate node label '" + labels[v] + "'");
    }
    table->names = std::move(labels);
    g.labels_ = std::move(table);
  }
  g.build_adjacency();
  return g;
}

void DirectedGraph::build_adjacency() {
  const std::size_t n = node_count_;
  out_offsets_.assign(n + 1, 0);
  in_offsets_.assign(n + 1, 0);
  for (const Edge& e : edges_) {
    ++out_offsets_[e.src + 1];
    ++in_offsets_[e.dst + 1];
  }
  std::partial_sum(out_offsets_.begin(), out_offsets_.end(), out_offsets_.begin());
  std::partial_sum(in_offsets_.begin(), in_offsets_.end(), in_offsets_.begin());

  out_arcs_.resize(edges_.size());
  in_arcs_.resize(edges_.size());
  std::vector<std::size_t> in_fill(in_offsets_.begin(), in_offsets_.end() - 1);
  for (EdgeId id = 0; id < edges_.size(); ++id) {
    const Edge& e = edges_[id];
    out_arcs_[id] = Arc{e.dst, e.prob, id};
    in_arcs_[in_fill[e.dst]++] = Arc{e.src, e.prob, id};
  }

  uniform_in_.assign(n, 1);
  for (NodeId v = 0; v < n; ++v) {
    const auto arcs = in_arcs(v);
    for (const Arc& a : arcs) {
      if (a.prob != arcs.front().prob) {
        uniform_in_[v] = 0;
        break;
      }
    }
  }
}

DirectedGraph DirectedGraph::rebuild(std::vector<Edge> sorted_edges) const {
  DirectedGraph g;
  g.node_count_ = node_count_;
  g.edges_ = std::move(sorted_edges);
  g.labels_ = labels_;
  g.build_adjacency();
  return g;
}

std::optional<double> DirectedGraph::edge_prob(NodeId src, NodeId dst) const {
  const auto arcs = out_arcs(src);
  const auto it = std::lower_bound(arcs.begin(), arcs.end(), dst, [](const Arc& a, NodeId d) { return a.node < d; });
  if (it != arcs.end() && it->node == dst) return it->prob;
  return std::nullopt;
}

std::string DirectedGraph::label(NodeId v) const {
  if (labels_) return labels_->names[v];
  return std::to_string(v);
}

std::optional<NodeId> DirectedGraph::find(std::string_view label) const {
  if (labels_) {
    const auto it = labels_->index.find(std::string(label));
    if (it == labels_->index.end()) return std::nullopt;
    return it->second;
  }
  NodeId v = 0;
  const auto* end = label.data() + label.size();
  const auto [ptr, ec] = std::from_chars(label.data(), end, v);
  if (ec != std::errc{} || ptr != end || v >= node_count_) return std::nullopt;
  return v;
}

DirectedGraph DirectedGraph::with_probabilities(std::span<const double> probs) const {
  if (probs.size() != edges_.size()) throw GraphError("probability vector size mismatch");
  std::vector<Edge> edges = edges_;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    check_probability(probs[i]);
    edges[i].prob = probs[i];
  }
  return rebuild(std::move(edges));
}

std::uint64_t DirectedGraph::content_hash() const {
  std::uint64_t h = mix(0x5a17u, node_count_);
  for (const Edge& e : edges_) {
    h = mix(h, (static_cast<std::uint64_t>(e.src) << 32) | e.dst);
    h = mix(h, std::bit_cast<std::uint64_t>(e.prob));
  }
  if (labels_) {
    for (const auto& name : labels_->names) h = mix(h, detail::fnv1a(name));
  }
  return h;
}

bool operator==(const DirectedGraph& a, const DirectedGraph& b) {
  if (a.node_count_ != b.node_count_ || a.edges_.size() != b.edges_.size()) return false;
  if (!a.labels_ && !b.labels_) return a.edges_ == b.edges_;
  using Key = std::tuple<std::string, std::string, double>;
  auto keyed = [](const DirectedGraph& g) {
    std::vector<Key> out;
    out.reserve(g.edges_.size());
    for (const Edge& e : g.edges_) out.emplace_back(g.label(e.src), g.label(e.dst), e.prob);
    std::sort(out.begin(), out.end());
    return out;
  };
  if (keyed(a) != keyed(b)) return false;
  std::vector<std::string> la, lb;
  for (NodeId v = 0; v < a.node_count_; ++v) {
    la.push_back(a.label(v));
    lb.push_back(b.label(v));
  }
  std::sort(la.begin(), la.end());
  std::sort(lb.begin(), lb.end());
  return la == lb;
}

// --- SeedSet / Coalition / TerminationPolicy -------------------------------

SeedSet::SeedSet(const DirectedGraph& g, std::vector<NodeId> members)
    : members_(std::move(members)), position_(g.node_count(), kNotSeed) {
  if (members_.empty()) throw std::invalid_argument("seed set must not be empty");
  for (std::size_t i = 0; i < members_.size(); ++i) {
    const NodeId v = members_[i];
    if (v >= g.node_count()) throw std::invalid_argument("seed " + std::to_string(v) + " is not a node");
    if (position_[v] != kNotSeed) throw std::invalid_argument("duplicate seed " + g.label(v));
    position_[v] = static_cast<std::int32_t>(i);
  }
}

std::uint64_t SeedSet::content_hash() const {
  std::uint64_t h = mix(0x7eedu, members_.size());
  for (NodeId v : members_) h = mix(h, v);
  return h;
}

Coalition Coalition::none(const SeedSet& seeds) { return Coalition(seeds.size()); }

Coalition Coalition::all(const SeedSet& seeds) {
  Coalition c(seeds.size());
  std::fill(c.member_.begin(), c.member_.end(), 1);
  c.count_ = seeds.size();
  return c;
}

Coalition Coalition::of(const SeedSet& seeds, std::span<const NodeId> nodes) {
  Coalition c(seeds.size());
  for (NodeId v : nodes) {
    const auto pos = seeds.position(v);
    if (pos == SeedSet::kNotSeed) throw std::invalid_argument("coalition member " + std::to_string(v) + " is not a seed");
    c.insert_position(static_cast<std::size_t>(pos));
  }
  return c;
}

Coalition Coalition::from_mask(const SeedSet& seeds, std::uint64_t mask) {
  if (seeds.size() > 64) throw std::invalid_argument("bitmask coalitions need at most 64 seeds");
  if (seeds.size() < 64 && (mask >> seeds.size()) != 0) throw std::invalid_argument("mask selects non-existent seeds");
  Coalition c(seeds.size());
  for (std::size_t i = 0; i < seeds.size(); ++i)
    if ((mask >> i) & 1u) c.insert_position(i);
  return c;
}

void Coalition::insert_position(std::size_t i) {
  if (!member_.at(i)) {
    member_[i] = 1;
    ++count_;
  }
}

TerminationPolicy TerminationPolicy::k_steps(std::size_t k) {
  if (k < 2) throw std::invalid_argument("KSteps requires K >= 2 (use single_step for K = 1)");
  if (k == kUnbounded) throw std::invalid_argument("KSteps bound too large");
  return TerminationPolicy(Kind::KSteps, k);
}

TerminationPolicy TerminationPolicy::parse(std::string_view text) {
  if (text == "single") return single_step();
  if (text == "complete") return complete();
  if (text.starts_with("k:")) {
    std::size_t k = 0;
    const auto digits = text.substr(2);
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
    if (ec == std::errc{} && ptr == digits.data() + digits.size() && !digits.empty()) {
      if (k == 1) return single_step();
      return k_steps(k);
    }
  }
  throw std::invalid_argument("unknown termination policy '" + std::string(text) + "' (expected single, k:<K>, complete)");
}

std::string TerminationPolicy::to_string() const {
  switch (kind_) {
    case Kind::SingleStep:
      return "single";
    case Kind::KSteps:
      return "k:" + std::to_string(bound_);
    case Kind::Complete:
      return "complete";
  }
  return "?";
}

// --- subgraphs and realizations --------------------------------------------

std::size_t CoalitionSubgraph::present_count() const {
  return static_cast<std::size_t>(std::count(present.begin(), present.end(), 1));
}

CoalitionSubgraph coalition_subgraph(const DirectedGraph& g, const SeedSet& seeds, const Coalition& coalition) {
  if (coalition.seed_count() != seeds.size()) throw std::invalid_argument("coalition built for a different seed set");
  std::vector<char> present(g.node_count(), 1);
  for (std::size_t i = 0; i < seeds.size(); ++i)
    if (!coalition.contains_position(i)) present[seeds[i]] = 0;
  DirectedGraph sub = g.filter_edges([&](const Edge& e) { return present[e.src] && present[e.dst]; });
  return CoalitionSubgraph{std::move(sub), std::move(present)};
}

DirectedGraph remove_seed_in_edges(const DirectedGraph& g, const SeedSet& seeds) {
  return g.filter_edges([&](const Edge& e) { return !seeds.contains(e.dst); });
}

DirectedGraph assign_weighted_cascade(const DirectedGraph& topology) {
  if (topology.edge_count() == 0) throw GraphError("weighted cascade needs at least one edge");
  std::vector<double> probs(topology.edge_count());
  for (EdgeId id = 0; id < probs.size(); ++id)
    probs[id] = 1.0 / static_cast<double>(topology.in_degree(topology.edge(id).dst));
  return topology.with_probabilities(probs);
}

DirectedGraph assign_uniform(const DirectedGraph& topology, double p) {
  check_probability(p);
  std::vector<double> probs(topology.edge_count(), p);
  return topology.with_probabilities(probs);
}

LiveEdgeGraph::LiveEdgeGraph(const DirectedGraph& source, std::vector<char> kept)
    : source_(&source), kept_(std::move(kept)) {
  if (kept_.size() != source.edge_count()) throw std::invalid_argument("live-edge mask size mismatch");
  kept_count_ = static_cast<std::size_t>(std::count(kept_.begin(), kept_.end(), 1));
}

std::vector<Edge> LiveEdgeGraph::kept_edges() const {
  std::vector<Edge> out;
  out.reserve(kept_count_);
  for (EdgeId id = 0; id < kept_.size(); ++id)
    if (kept_[id]) out.push_back(source_->edge(id));
  return out;
}

LiveEdgeGraph sample_live_edge(const DirectedGraph& g, Rng& rng) {
  std::vector<char> kept(g.edge_count());
  const auto edges = g.edges();
  for (std::size_t i = 0; i < edges.size(); ++i) kept[i] = bernoulli(rng, edges[i].prob) ? 1 : 0;
  return LiveEdgeGraph(g, std::move(kept));
}

}  // namespace shapinf
