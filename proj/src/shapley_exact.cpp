#include "shapinf/shapley_exact.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>

#include "shapinf/parallel.hpp"

namespace shapinf {

std::vector<double> factorial_coefficients(std::size_t t_count) {
  if (t_count == 0) throw std::invalid_argument("factorial_coefficients needs t_count >= 1");
  const auto n = static_cast<double>(t_count);
  const double log_n_fact = std::lgamma(n + 1.0);
  std::vector<double> c(t_count);
  for (std::size_t k = 0; k < t_count; ++k) {
    const auto kd = static_cast<double>(k);
    c[k] = std::exp(std::lgamma(kd + 1.0) + std::lgamma(n - kd) - log_n_fact);
  }
  return c;
}

std::vector<double> alpha_coefficients(std::span<const double> probs) {
  std::vector<double> alpha(probs.size() + 1, 0.0);
  alpha[0] = 1.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double q = 1.0 - probs[i];
    for (std::size_t k = i + 1; k >= 1; --k) alpha[k] += q * alpha[k - 1];
  }
  return alpha;
}

namespace {

constexpr std::size_t kNodeChunk = 4096;

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

ShapleyReport exact_single_step(const DirectedGraph& g, const SeedSet& seeds, unsigned workers) {
  const auto start = std::chrono::steady_clock::now();
  if (seeds.node_count() != g.node_count()) throw std::invalid_argument("seed set built for a different graph");
  const std::size_t n = g.node_count();
  const std::size_t chunks = chunk_count(n, kNodeChunk);
  std::vector<std::vector<double>> partial(chunks);

  for_each_chunk(n, kNodeChunk, workers, [&](ChunkRange r) {
    std::vector<double> acc(seeds.size(), 0.0);
    std::vector<std::pair<std::size_t, double>> local;  // (seed position, p_{t,u}) in seed order
    std::vector<double> others;
    for (NodeId u = static_cast<NodeId>(r.begin); u < r.end; ++u) {
      if (seeds.contains(u)) continue;
      local.clear();
      for (const Arc& a : g.in_arcs(u)) {
        const auto pos = seeds.position(a.node);
        if (pos != SeedSet::kNotSeed) local.emplace_back(static_cast<std::size_t>(pos), a.prob);
      }
      if (local.empty()) continue;
      std::sort(local.begin(), local.end());
      const auto coeff = factorial_coefficients(local.size());
      for (std::size_t i = 0; i < local.size(); ++i) {
        others.clear();
        for (std::size_t j = 0; j < local.size(); ++j)
          if (j != i) others.push_back(local[j].second);
        const auto alpha = alpha_coefficients(others);
        double s = 0.0;
        for (std::size_t k = 0; k < alpha.size(); ++k) s += coeff[k] * alpha[k];
        acc[local[i].first] += local[i].second * s;
      }
    }
    partial[r.chunk] = std::move(acc);
  });

  ShapleyReport report;
  report.seeds.assign(seeds.members().begin(), seeds.members().end());
  report.values.assign(seeds.size(), 0.0);
  for (const auto& p : partial)
    for (std::size_t i = 0; i < p.size(); ++i) report.values[i] += p[i];
  report.algorithm = "exact-single-step";
  report.params["policy"] = std::string("single");
  report.elapsed_seconds = seconds_since(start);
  return report;
}

namespace {

void check_bruteforce_seeds(const SeedSet& seeds) {
  if (seeds.size() > kBruteForceMaxSeeds)
    throw std::invalid_argument("brute-force oracle supports at most " + std::to_string(kBruteForceMaxSeeds) +
                                " seeds, got " + std::to_string(seeds.size()));
}

}  // namespace

std::vector<double> exact_coalition_values(const DirectedGraph& g, const SeedSet& seeds, TerminationPolicy policy) {
  check_bruteforce_seeds(seeds);
  const std::size_t masks = std::size_t{1} << seeds.size();
  std::vector<double> u(masks, 0.0);

  if (policy.kind() == TerminationPolicy::Kind::SingleStep) {
    for (std::size_t m = 1; m < masks; ++m) u[m] = exact_value_single_step(g, seeds, Coalition::from_mask(seeds, m));
    return u;
  }

  std::vector<EdgeId> free_edges;
  for (EdgeId e = 0; e < g.edge_count(); ++e)
    if (!seeds.contains(g.edge(e).dst)) free_edges.push_back(e);
  if (free_edges.size() > kBruteForceMaxEdges)
    throw std::invalid_argument("exact multi-step oracle supports at most " + std::to_string(kBruteForceMaxEdges) +
                                " edges outside seed in-edges, got " + std::to_string(free_edges.size()));

  const std::size_t n = g.node_count();
  const std::size_t bound = policy.step_bound();
  std::vector<char> kept(g.edge_count(), 0);
  std::vector<std::size_t> dist(n);
  std::vector<NodeId> queue;
  constexpr std::size_t kUnseen = std::numeric_limits<std::size_t>::max();

  const std::size_t realizations = std::size_t{1} << free_edges.size();
  for (std::size_t r = 0; r < realizations; ++r) {
    double weight = 1.0;
    for (std::size_t i = 0; i < free_edges.size(); ++i) {
      const bool on = (r >> i) & 1u;
      const double p = g.edge(free_edges[i]).prob;
      kept[free_edges[i]] = on ? 1 : 0;
      weight *= on ? p : 1.0 - p;
    }
    if (weight == 0.0) continue;

    for (std::size_t m = 1; m < masks; ++m) {
      // BFS in G_{T,S}: seeds outside the coalition are absent.
      std::fill(dist.begin(), dist.end(), kUnseen);
      queue.clear();
      for (std::size_t i = 0; i < seeds.size(); ++i) {
        if ((m >> i) & 1u) {
          dist[seeds[i]] = 0;
          queue.push_back(seeds[i]);
        }
      }
      std::size_t reached = 0;
      for (std::size_t head = 0; head < queue.size(); ++head) {
        const NodeId v = queue[head];
        if (dist[v] >= bound) continue;
        for (const Arc& a : g.out_arcs(v)) {
          if (!kept[a.edge] || dist[a.node] != kUnseen) continue;
          const auto pos = seeds.position(a.node);
          if (pos != SeedSet::kNotSeed) continue;
          dist[a.node] = dist[v] + 1;
          queue.push_back(a.node);
          ++reached;
        }
      }
      u[m] += weight * static_cast<double>(reached);
    }
  }
  return u;
}

std::vector<double> sampled_coalition_values(const DirectedGraph& g, const SeedSet& seeds, TerminationPolicy policy,
                                             std::size_t samples, const StreamKey& key, unsigned workers) {
  check_bruteforce_seeds(seeds);
  const std::size_t masks = std::size_t{1} << seeds.size();
  std::vector<double> u(masks, 0.0);
  for (std::size_t m = 1; m < masks; ++m)
    u[m] = estimate_value(g, seeds, Coalition::from_mask(seeds, m), policy, samples, key.child(m), workers).mean;
  return u;
}

std::vector<double> shapley_from_coalition_values(std::span<const double> u, std::size_t seed_count) {
  if (seed_count == 0 || seed_count > kBruteForceMaxSeeds) throw std::invalid_argument("unsupported seed count");
  if (u.size() != (std::size_t{1} << seed_count)) throw std::invalid_argument("coalition table has the wrong size");
  // Factorials up to 12! are exact in double.
  std::vector<double> fact(seed_count + 1, 1.0);
  for (std::size_t i = 1; i <= seed_count; ++i) fact[i] = fact[i - 1] * static_cast<double>(i);
  std::vector<double> weight(seed_count);
  for (std::size_t k = 0; k < seed_count; ++k) weight[k] = fact[k] * fact[seed_count - k - 1] / fact[seed_count];

  std::vector<double> shap(seed_count, 0.0);
  for (std::size_t t = 0; t < seed_count; ++t) {
    const std::size_t bit = std::size_t{1} << t;
    for (std::size_t s = 0; s < u.size(); ++s) {
      if (s & bit) continue;
      shap[t] += weight[static_cast<std::size_t>(std::popcount(s))] * (u[s | bit] - u[s]);
    }
  }
  return shap;
}

ShapleyReport shapley_bruteforce(const DirectedGraph& g, const SeedSet& seeds, TerminationPolicy policy,
                                 ValueMode mode, const StreamKey& key, unsigned workers) {
  const auto start = std::chrono::steady_clock::now();
  check_bruteforce_seeds(seeds);
  ShapleyReport report;
  std::vector<double> u;
  if (mode.kind == ValueMode::Kind::Exact) {
    u = exact_coalition_values(g, seeds, policy);
    report.params["value_mode"] =
        std::string(policy.kind() == TerminationPolicy::Kind::SingleStep ? "closed-form" : "live-edge-enumeration");
  } else {
    if (mode.samples == 0) throw std::invalid_argument("Monte Carlo value mode needs samples >= 1");
    u = sampled_coalition_values(g, seeds, policy, mode.samples, key.child("bruteforce"), workers);
    report.params["value_mode"] = std::string("monte-carlo");
    report.params["samples"] = static_cast<std::uint64_t>(mode.samples);
    report.params["rng_seed"] = static_cast<std::uint64_t>(key.master_seed());
  }
  report.seeds.assign(seeds.members().begin(), seeds.members().end());
  report.values = shapley_from_coalition_values(u, seeds.size());
  report.algorithm = "bruteforce";
  report.params["policy"] = policy.to_string();
  report.elapsed_seconds = seconds_since(start);
  return report;
}

}  // namespace shapinf
