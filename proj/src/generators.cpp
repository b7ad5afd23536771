#include <cmath>
#include <unordered_set>

#include "shapinf/graph.hpp"

namespace shapinf {

DirectedGraph generate_erdos_renyi(std::size_t n, double avg_degree, std::uint64_t rng_seed) {
  if (n < 2) throw GraphError("Erdos-Renyi generator needs n >= 2");
  if (!(avg_degree > 0.0) || !std::isfinite(avg_degree)) throw GraphError("average degree must be positive");
  const double wanted = std::round(static_cast<double>(n) * avg_degree);
  const double possible = static_cast<double>(n) * static_cast<double>(n - 1);
  // Past n(n-1) the graph saturates to the complete digraph.
  const auto m = static_cast<std::size_t>(std::min(wanted, possible));

  Rng rng = StreamKey(rng_seed).child("erdos-renyi").make_rng();
  std::vector<Edge> edges;
  edges.reserve(m);

  // Dense requests: enumerate all pairs and take a random prefix.
  if (static_cast<double>(m) > possible / 2) {
    std::vector<std::uint64_t> pairs;
    pairs.reserve(static_cast<std::size_t>(possible));
    for (std::uint64_t u = 0; u < n; ++u)
      for (std::uint64_t v = 0; v < n; ++v)
        if (u != v) pairs.push_back(u * n + v);
    for (std::size_t i = 0; i < m; ++i) {
      const auto j = i + uniform_index(rng, pairs.size() - i);
      std::swap(pairs[i], pairs[j]);
      edges.push_back(Edge{static_cast<NodeId>(pairs[i] / n), static_cast<NodeId>(pairs[i] % n), 1.0});
    }
  } else {
    std::unordered_set<std::uint64_t> taken;
    taken.reserve(m * 2);
    while (edges.size() < m) {
      const auto u = uniform_index(rng, n);
      const auto v = uniform_index(rng, n);
      if (u == v) continue;
      if (taken.insert(u * n + v).second) edges.push_back(Edge{static_cast<NodeId>(u), static_cast<NodeId>(v), 1.0});
    }
  }
  return DirectedGraph::from_edges(n, std::move(edges));
}

}  // namespace shapinf
