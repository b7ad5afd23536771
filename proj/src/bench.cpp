#include "shapinf/bench.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "shapinf/parallel.hpp"
#include "shapinf/report_io.hpp"
#include "shapinf/shapley_exact.hpp"

namespace shapinf {

std::vector<NodeId> top_out_degree(const DirectedGraph& g, std::size_t k) {
  if (k < 1 || k > g.node_count())
    throw std::invalid_argument("top-degree k=" + std::to_string(k) + " outside [1, " + std::to_string(g.node_count()) +
                                "]");
  std::vector<NodeId> order(g.node_count());
  std::iota(order.begin(), order.end(), NodeId{0});
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&](NodeId a, NodeId b) {
                      const auto da = g.out_degree(a);
                      const auto db = g.out_degree(b);
                      return da != db ? da > db : a < b;
                    });
  order.resize(k);
  return order;
}

namespace {

// Full reverse reachable set (all visited nodes) on the unmodified graph.
void full_rr_set(const DirectedGraph& g, NodeId root, Rng& rng, std::vector<std::uint32_t>& mark, std::uint32_t epoch,
                 std::vector<NodeId>& out) {
  out.clear();
  out.push_back(root);
  mark[root] = epoch;
  for (std::size_t head = 0; head < out.size(); ++head) {
    for (const Arc& a : g.in_arcs(out[head])) {
      if (mark[a.node] == epoch || !bernoulli(rng, a.prob)) continue;
      mark[a.node] = epoch;
      out.push_back(a.node);
    }
  }
}

}  // namespace

GreedyResult greedy_im(const DirectedGraph& g, std::size_t k, std::size_t rr_budget, const StreamKey& key,
                       unsigned workers) {
  const std::size_t n = g.node_count();
  if (k < 1 || k > n) throw std::invalid_argument("greedy k outside [1, |V|]");
  if (rr_budget == 0) throw std::invalid_argument("greedy needs rr_budget >= 1");

  constexpr std::size_t kChunk = 4096;
  std::vector<std::vector<std::vector<NodeId>>> chunks(chunk_count(rr_budget, kChunk));
  const StreamKey stream = key.child("greedy-im");
  for_each_chunk(rr_budget, kChunk, workers, [&](ChunkRange r) {
    Rng rng = stream.child(r.chunk).make_rng();
    std::vector<std::uint32_t> mark(n, 0);
    std::uint32_t epoch = 0;
    auto& sets = chunks[r.chunk];
    sets.resize(r.end - r.begin);
    for (std::size_t i = r.begin; i < r.end; ++i)
      full_rr_set(g, static_cast<NodeId>(uniform_index(rng, n)), rng, mark, ++epoch, sets[i - r.begin]);
  });

  // node -> ids of RR sets containing it
  std::vector<std::vector<std::uint32_t>> member_of(n);
  std::vector<const std::vector<NodeId>*> sets;
  sets.reserve(rr_budget);
  for (const auto& c : chunks)
    for (const auto& s : c) {
      for (NodeId v : s) member_of[v].push_back(static_cast<std::uint32_t>(sets.size()));
      sets.push_back(&s);
    }

  std::vector<std::uint64_t> count(n);
  for (NodeId v = 0; v < n; ++v) count[v] = member_of[v].size();
  std::vector<char> covered(sets.size(), 0), picked(n, 0);
  GreedyResult result;
  for (std::size_t step = 0; step < k; ++step) {
    NodeId best = 0;
    bool found = false;
    for (NodeId v = 0; v < n; ++v) {
      if (picked[v]) continue;
      if (!found || count[v] > count[best]) {
        best = v;
        found = true;
      }
    }
    picked[best] = 1;
    result.picks.push_back(best);
    result.coverage.push_back(count[best]);
    for (std::uint32_t s : member_of[best]) {
      if (covered[s]) continue;
      covered[s] = 1;
      for (NodeId v : *sets[s]) --count[v];
    }
  }
  return result;
}

SeedSet select_seeds(const DirectedGraph& g, const SeedStrategy& strategy, const StreamKey& key, unsigned workers) {
  if (const auto* s = std::get_if<TopOutDegree>(&strategy)) return SeedSet(g, top_out_degree(g, s->k));
  if (const auto* s = std::get_if<GreedyIM>(&strategy)) return SeedSet(g, greedy_im(g, s->k, s->rr_budget, key, workers).picks);
  return load_seed_file(g, std::get<ExplicitFile>(strategy).path);
}

std::vector<double> pagerank(const DirectedGraph& g, double damping, std::size_t iters) {
  if (!(damping > 0.0 && damping < 1.0)) throw std::invalid_argument("damping must be in (0, 1)");
  const std::size_t n = g.node_count();
  if (n == 0) return {};
  const double nd = static_cast<double>(n);
  std::vector<double> rank(n, 1.0 / nd), next(n);
  for (std::size_t it = 0; it < iters; ++it) {
    double dangling = 0.0;
    for (NodeId u = 0; u < n; ++u)
      if (g.out_degree(u) == 0) dangling += rank[u];
    const double base = (1.0 - damping) / nd + damping * dangling / nd;
    std::fill(next.begin(), next.end(), base);
    for (NodeId u = 0; u < n; ++u) {
      const auto deg = g.out_degree(u);
      if (deg == 0) continue;
      const double share = damping * rank[u] / static_cast<double>(deg);
      for (const Arc& a : g.out_arcs(u)) next[a.node] += share;
    }
    const double sum = std::accumulate(next.begin(), next.end(), 0.0);
    for (double& x : next) x /= sum;
    rank.swap(next);
  }
  return rank;
}

std::vector<std::size_t> descending_ranks(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<std::size_t> rank(scores.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (i > 0 && scores[order[i]] == scores[order[i - 1]])
      rank[order[i]] = rank[order[i - 1]];
    else
      rank[order[i]] = i + 1;
  }
  return rank;
}

ErrorSummary average_relative_error(const ShapleyReport& estimate, const ShapleyReport& truth) {
  if (estimate.seeds.size() != truth.seeds.size() || estimate.values.size() != estimate.seeds.size() ||
      truth.values.size() != truth.seeds.size())
    throw std::invalid_argument("reports cover different seed sets");
  ErrorSummary out;
  if (const auto it = truth.params.find("source"); it != truth.params.end())
    if (const auto* s = std::get_if<std::string>(&it->second)) out.ground_truth_source = *s;
  if (out.ground_truth_source.empty()) out.ground_truth_source = truth.algorithm;

  double sum = 0.0;
  for (std::size_t i = 0; i < truth.seeds.size(); ++i) {
    const NodeId t = truth.seeds[i];
    const double est = estimate.value_of(t);  // throws when t is missing
    const double tv = truth.values[i];
    if (tv == 0.0) {
      ++out.excluded_zero_truth;
      continue;
    }
    const double err = std::abs(est - tv) / std::abs(tv);
    out.per_seed_errors[t] = err;
    sum += err;
  }
  if (!out.per_seed_errors.empty()) out.avg_relative_error = sum / static_cast<double>(out.per_seed_errors.size());
  return out;
}

namespace {

bool bruteforce_feasible(const DirectedGraph& g, const SeedSet& seeds) {
  if (seeds.size() > kBruteForceMaxSeeds) return false;
  std::size_t free_edges = 0;
  for (const Edge& e : g.edges())
    if (!seeds.contains(e.dst)) ++free_edges;
  return free_edges <= kBruteForceMaxEdges;
}

}  // namespace

ShapleyReport make_ground_truth(const DirectedGraph& g, const SeedSet& seeds, TerminationPolicy policy,
                                const ApproxOptions& opts) {
  ShapleyReport r;
  if (policy.kind() == TerminationPolicy::Kind::SingleStep) {
    r = exact_single_step(g, seeds, opts.workers);
    r.params["source"] = std::string("exact");
  } else if (bruteforce_feasible(g, seeds)) {
    r = shapley_bruteforce(g, seeds, policy, ValueMode::exact(), opts.key, opts.workers);
    r.params["source"] = std::string("exact");
  } else {
    const std::size_t k = std::min(kGroundTruthK, seeds.size());
    r = approx_rr_set(g, seeds, policy, RRGuaranteeBudget{kGroundTruthEpsilon, kGroundTruthEll, k}, opts);
    r.params["source"] = std::string("approx-ground-truth");
  }
  return r;
}

std::string ground_truth_cache_name(const DirectedGraph& g, const SeedSet& seeds, TerminationPolicy policy,
                                    std::uint64_t master_seed) {
  std::string pol = policy.to_string();
  std::replace(pol.begin(), pol.end(), ':', '-');
  return "truth-" + hex64(g.content_hash()) + "-" + hex64(seeds.content_hash()) + "-" + pol + "-eps" +
         format_double(kGroundTruthEpsilon) + "-ell" + format_double(kGroundTruthEll) + "-k" +
         std::to_string(kGroundTruthK) + "-seed" + std::to_string(master_seed) + ".json";
}

ShapleyReport cached_ground_truth(const DirectedGraph& g, const SeedSet& seeds, TerminationPolicy policy,
                                  const ApproxOptions& opts, const std::filesystem::path& cache_dir) {
  const auto path = cache_dir / ground_truth_cache_name(g, seeds, policy, opts.key.master_seed());
  if (std::filesystem::exists(path)) {
    ShapleyReport cached = report_from_json(read_text_file(path), g);
    if (cached.seeds.size() == seeds.size() &&
        std::all_of(cached.seeds.begin(), cached.seeds.end(), [&](NodeId t) { return seeds.contains(t); })) {
      // The file lists seeds by label; restore seed-set order.
      ShapleyReport ordered = cached;
      ordered.seeds.assign(seeds.members().begin(), seeds.members().end());
      for (std::size_t i = 0; i < seeds.size(); ++i) {
        const auto at = static_cast<std::size_t>(std::find(cached.seeds.begin(), cached.seeds.end(), seeds[i]) -
                                                 cached.seeds.begin());
        ordered.values[i] = cached.values[at];
        if (cached.has_std_errors()) ordered.std_errors[i] = cached.std_errors[at];
      }
      return ordered;
    }
  }
  ShapleyReport r = make_ground_truth(g, seeds, policy, opts);
  std::filesystem::create_directories(cache_dir);
  write_text_file(path, report_to_json(r, g, {.include_timing = true}));
  return r;
}

}  // namespace shapinf
