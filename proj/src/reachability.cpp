#include <algorithm>
#include <bit>

#include "shapinf/diffusion.hpp"

namespace shapinf {

ReachabilityMap::ReachabilityMap(std::size_t node_count, std::size_t seed_count)
    : node_count_(node_count),
      seed_count_(seed_count),
      words_((seed_count + 63) / 64),
      bits_(node_count * words_, 0) {}

std::size_t ReachabilityMap::count(NodeId v) const {
  std::size_t c = 0;
  for (std::uint64_t w : row(v)) c += static_cast<std::size_t>(std::popcount(w));
  return c;
}

std::vector<std::size_t> ReachabilityMap::positions(NodeId v) const {
  std::vector<std::size_t> out;
  for_each(v, [&](std::size_t p) { out.push_back(p); });
  return out;
}

namespace {

// Per-seed distance <= bound: after round i, row v holds the seeds within i
// kept hops. Each round ORs every kept edge's source row into its target.
void bounded_reach(const LiveEdgeGraph& live, const SeedSet& seeds, std::size_t bound, ReachabilityMap& out) {
  const DirectedGraph& g = live.source();
  const std::size_t words = out.words();
  std::vector<std::uint64_t> prev(g.node_count() * words, 0);
  for (std::size_t i = 0; i < seeds.size(); ++i) prev[seeds[i] * words + (i >> 6)] |= std::uint64_t{1} << (i & 63);

  std::vector<EdgeId> active;
  for (EdgeId e = 0; e < g.edge_count(); ++e)
    if (live.kept(e) && !seeds.contains(g.edge(e).dst)) active.push_back(e);

  std::vector<std::uint64_t> cur = prev;
  for (std::size_t round = 0; round < bound; ++round) {
    bool changed = false;
    for (EdgeId e : active) {
      const Edge& ed = g.edge(e);
      const std::uint64_t* src = prev.data() + ed.src * words;
      std::uint64_t* dst = cur.data() + ed.dst * words;
      for (std::size_t w = 0; w < words; ++w) {
        const std::uint64_t merged = dst[w] | src[w];
        changed |= merged != dst[w];
        dst[w] = merged;
      }
    }
    if (!changed) break;
    prev = cur;
  }

  for (NodeId v = 0; v < g.node_count(); ++v) {
    if (seeds.contains(v)) continue;
    std::copy_n(cur.data() + v * words, words, out.row(v).data());
  }
}

// Unbounded: condense the kept subgraph reachable from the seeds into SCCs
// (iterative Tarjan), then union seed sets along a topological order.
void complete_reach(const LiveEdgeGraph& live, const SeedSet& seeds, ReachabilityMap& out) {
  const DirectedGraph& g = live.source();
  const std::size_t n = g.node_count();
  const std::size_t words = out.words();
  constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

  auto usable = [&](const Arc& a) { return live.kept(a.edge) && !seeds.contains(a.node); };

  std::vector<std::uint32_t> index(n, kNone), low(n, 0), comp(n, kNone);
  std::vector<char> on_stack(n, 0);
  std::vector<NodeId> stack;
  std::vector<std::pair<NodeId, std::size_t>> call;  // node, next out-arc offset
  std::vector<NodeId> comp_nodes;                    // nodes grouped by component
  std::vector<std::size_t> comp_begin;               // component c spans [comp_begin[c], comp_begin[c+1])
  std::uint32_t counter = 0;

  for (NodeId root : seeds.members()) {
    if (index[root] != kNone) continue;
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = 1;
    call.emplace_back(root, 0);
    while (!call.empty()) {
      auto& [v, next] = call.back();
      const auto arcs = g.out_arcs(v);
      bool descended = false;
      while (next < arcs.size()) {
        const Arc& a = arcs[next++];
        if (!usable(a)) continue;
        const NodeId w = a.node;
        if (index[w] == kNone) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = 1;
          call.emplace_back(w, 0);
          descended = true;
          break;
        }
        if (on_stack[w]) low[v] = std::min(low[v], index[w]);
      }
      if (descended) continue;
      const NodeId done = v;
      call.pop_back();
      if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[done]);
      if (low[done] == index[done]) {
        const auto c = static_cast<std::uint32_t>(comp_begin.size());
        comp_begin.push_back(comp_nodes.size());
        NodeId w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          comp[w] = c;
          comp_nodes.push_back(w);
        } while (w != done);
      }
    }
  }
  comp_begin.push_back(comp_nodes.size());

  // Tarjan emits components sinks-first; walk them in reverse.
  const std::size_t comps = comp_begin.size() - 1;
  std::vector<std::uint64_t> bits(comps * words, 0);
  for (std::size_t c = comps; c-- > 0;) {
    std::uint64_t* row = bits.data() + c * words;
    for (std::size_t i = comp_begin[c]; i < comp_begin[c + 1]; ++i) {
      const NodeId v = comp_nodes[i];
      const auto pos = seeds.position(v);
      if (pos != SeedSet::kNotSeed) {
        row[static_cast<std::size_t>(pos) >> 6] |= std::uint64_t{1} << (pos & 63);
        continue;
      }
      for (const Arc& a : g.in_arcs(v)) {
        if (!live.kept(a.edge)) continue;
        const std::uint32_t cu = comp[a.node];
        if (cu == kNone || cu == c) continue;
        const std::uint64_t* src = bits.data() + cu * words;
        for (std::size_t w = 0; w < words; ++w) row[w] |= src[w];
      }
    }
  }

  for (NodeId v = 0; v < n; ++v) {
    if (comp[v] == kNone || seeds.contains(v)) continue;
    std::copy_n(bits.data() + comp[v] * words, words, out.row(v).data());
  }
}

}  // namespace

ReachabilityMap multi_source_reach(const LiveEdgeGraph& live, const SeedSet& seeds, TerminationPolicy policy) {
  if (seeds.node_count() != live.source().node_count())
    throw std::invalid_argument("seed set built for a different graph");
  ReachabilityMap out(live.source().node_count(), seeds.size());
  if (policy.kind() == TerminationPolicy::Kind::Complete)
    complete_reach(live, seeds, out);
  else
    bounded_reach(live, seeds, policy.step_bound(), out);
  return out;
}

}  // namespace shapinf
