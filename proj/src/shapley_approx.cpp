#include "shapinf/shapley_approx.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "shapinf/parallel.hpp"

namespace shapinf {

namespace {

constexpr std::size_t kLiveEdgeChunk = 16;
constexpr std::size_t kRRChunk = 8192;

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void check_epsilon_delta(double epsilon, double delta) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw std::invalid_argument("epsilon must be > 0");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must be in (0, 1)");
}

std::uint64_t ceil_count(double x, const char* what) {
  if (!std::isfinite(x) || x >= 1.8e19) throw BudgetExceeded(std::string(what) + " sample count overflows");
  return static_cast<std::uint64_t>(std::ceil(x));
}

std::string format_count(double x) {
  std::ostringstream s;
  s.precision(6);
  s << x;
  return s.str();
}

void fill_from_accumulator(ShapleyReport& report, const EstimatorAccumulator& acc, double scale) {
  report.values.resize(acc.seed_count());
  report.std_errors.resize(acc.seed_count());
  for (std::size_t i = 0; i < acc.seed_count(); ++i) {
    report.values[i] = scale * acc.mean(i);
    report.std_errors[i] = scale * acc.std_error(i);
  }
  report.total_std_error = scale * acc.total_std_error();
}

std::vector<NodeId> non_seed_nodes(const DirectedGraph& g, const SeedSet& seeds) {
  std::vector<NodeId> out;
  out.reserve(g.node_count() - std::min(g.node_count(), seeds.size()));
  for (NodeId v = 0; v < g.node_count(); ++v)
    if (!seeds.contains(v)) out.push_back(v);
  return out;
}

void check_seeds(const DirectedGraph& g, const SeedSet& seeds) {
  if (seeds.node_count() != g.node_count()) throw std::invalid_argument("seed set built for a different graph");
}

// Draws RR sets [0, count) of one batch into `acc`, chunked under `key`.
EstimatorAccumulator draw_rr_batch(const DirectedGraph& g_prime, const SeedSet& seeds, std::span<const NodeId> roots,
                                   std::size_t depth_bound, std::uint64_t count, const StreamKey& key,
                                   unsigned workers) {
  std::vector<EstimatorAccumulator> partial(chunk_count(count, kRRChunk), EstimatorAccumulator(seeds.size()));
  for_each_chunk(count, kRRChunk, workers, [&](ChunkRange r) {
    RRSampler sampler(g_prime, seeds, depth_bound);
    Rng rng = key.child(r.chunk).make_rng();
    std::vector<std::size_t> hits;
    EstimatorAccumulator& acc = partial[r.chunk];
    for (std::size_t i = r.begin; i < r.end; ++i) {
      sampler.sample(roots[uniform_index(rng, roots.size())], rng, hits);
      acc.add_split(hits);
    }
  });
  EstimatorAccumulator total(seeds.size());
  for (const auto& p : partial) total.merge(p);
  return total;
}

}  // namespace

// --- sample sizes ------------------------------------------------------------

PermuteMCSize permute_mc_guarantee_size(std::size_t nodes, std::size_t seeds, double epsilon, double delta) {
  check_epsilon_delta(epsilon, delta);
  const double v2 = static_cast<double>(nodes) * static_cast<double>(nodes);
  const double t = static_cast<double>(seeds);
  const double base = 8.0 * v2 / (epsilon * epsilon);
  PermuteMCSize s;
  s.permutations = ceil_count(base * std::log(4.0 * t / delta), "permutation");
  s.cascades = ceil_count(base * std::log(4.0 * static_cast<double>(s.permutations) * t / delta), "cascade");
  return s;
}

std::uint64_t live_edge_guarantee_size(std::size_t nodes, std::size_t seeds, double epsilon, double delta) {
  check_epsilon_delta(epsilon, delta);
  const double v2 = static_cast<double>(nodes) * static_cast<double>(nodes);
  return ceil_count(v2 / (2.0 * epsilon * epsilon) * std::log(2.0 * static_cast<double>(seeds) / delta), "live-edge");
}

std::uint64_t rr_theta(std::size_t n_prime, std::size_t seeds, double epsilon, double ell, double lb) {
  if (!(epsilon > 0.0) || !(ell > 0.0) || !(lb > 0.0)) throw std::invalid_argument("epsilon, ell and LB must be > 0");
  const double n = static_cast<double>(n_prime);
  const double logs = ell * std::log(n) + std::log(static_cast<double>(seeds)) + std::log(4.0);
  return ceil_count(n * (2.0 + 2.0 * epsilon / 3.0) / (epsilon * epsilon * lb) * logs, "RR");
}

std::uint64_t rr_round_theta(std::size_t n_prime, std::size_t seeds, double eps_prime, double ell, std::size_t round) {
  const double n = static_cast<double>(n_prime);
  const double x = n / std::ldexp(1.0, static_cast<int>(round));
  const double logs = ell * std::log(n) + std::log(static_cast<double>(seeds)) + std::log(std::log2(n)) + std::log(2.0);
  return ceil_count(n * (2.0 + 2.0 * eps_prime / 3.0) / (eps_prime * eps_prime * x) * logs, "RR");
}

// --- threshold search ------------------------------------------------------------

ThresholdResult estimate_threshold(const DirectedGraph& g_prime, const SeedSet& seeds, double epsilon, double ell,
                                   std::size_t k, TerminationPolicy policy, const ApproxOptions& opts) {
  check_seeds(g_prime, seeds);
  if (!(epsilon > 0.0) || !(ell > 0.0)) throw std::invalid_argument("epsilon and ell must be > 0");
  if (k < 1 || k > seeds.size()) throw std::invalid_argument("k must be in [1, |T|]");
  const auto roots = non_seed_nodes(g_prime, seeds);
  const std::size_t n_prime = roots.size();
  if (n_prime < 4) throw std::invalid_argument("threshold search needs at least 4 non-seed nodes");

  const double eps_prime = std::sqrt(2.0) * epsilon;
  const auto rounds = static_cast<std::size_t>(std::floor(std::log2(static_cast<double>(n_prime)))) - 1;
  const std::size_t depth = rr_depth_bound(policy);
  const StreamKey key = opts.key.child("threshold");

  ThresholdResult result;
  EstimatorAccumulator est(seeds.size());
  std::uint64_t theta_prev = 0;
  std::vector<double> sorted(seeds.size());
  for (std::size_t i = 1; i <= rounds; ++i) {
    const std::uint64_t theta_i = rr_round_theta(n_prime, seeds.size(), eps_prime, ell, i);
    if (static_cast<double>(theta_i) > opts.cost_ceiling)
      throw BudgetExceeded("threshold round " + std::to_string(i) + " needs " + std::to_string(theta_i) +
                           " RR sets, above the ceiling of " + format_count(opts.cost_ceiling));
    if (theta_i > theta_prev)
      est.merge(draw_rr_batch(g_prime, seeds, roots, depth, theta_i - theta_prev, key.child(i), opts.workers));
    theta_prev = std::max(theta_prev, theta_i);
    result.rounds = i;
    result.samples = theta_prev;

    const auto sums = est.sums();
    std::copy(sums.begin(), sums.end(), sorted.begin());
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k - 1), sorted.end(),
                     std::greater<>());
    const double est_k = sorted[k - 1];
    const double x_i = static_cast<double>(n_prime) / std::ldexp(1.0, static_cast<int>(i));
    const double scaled = static_cast<double>(n_prime) * est_k / static_cast<double>(theta_prev);
    if (scaled >= (1.0 + eps_prime) * x_i) {
      result.lb = scaled / (1.0 + eps_prime);
      result.triggered = true;
      break;
    }
  }
  return result;
}

// --- estimators -----------------------------------------------------------------

ShapleyReport approx_permute_mc(const DirectedGraph& g, const SeedSet& seeds, TerminationPolicy policy,
                                const SampleBudget& budget, const ApproxOptions& opts) {
  const auto start = std::chrono::steady_clock::now();
  check_seeds(g, seeds);
  ShapleyReport report;
  std::uint64_t n_pi = 0;
  std::uint64_t n_mc = 0;
  if (const auto* e = std::get_if<ExplicitBudget>(&budget)) {
    if (e->primary == 0 || e->secondary == 0)
      throw std::invalid_argument("permute-mc needs permutations >= 1 and cascades >= 1");
    n_pi = e->primary;
    n_mc = e->secondary;
  } else if (const auto* gb = std::get_if<GuaranteeBudget>(&budget)) {
    const auto size = permute_mc_guarantee_size(g.node_count(), seeds.size(), gb->epsilon, gb->delta);
    const double cost =
        static_cast<double>(size.permutations) * static_cast<double>(seeds.size()) * 2.0 * static_cast<double>(size.cascades);
    if (cost > opts.cost_ceiling)
      throw BudgetExceeded("permute-mc guarantee needs n_pi=" + std::to_string(size.permutations) +
                           " permutations and n_MC=" + std::to_string(size.cascades) + " cascades (" +
                           format_count(cost) + " cascades in total), above the ceiling of " +
                           format_count(opts.cost_ceiling));
    n_pi = size.permutations;
    n_mc = size.cascades;
    report.params["epsilon"] = gb->epsilon;
    report.params["delta"] = gb->delta;
  } else {
    throw std::invalid_argument("permute-mc takes an explicit or (epsilon, delta) budget");
  }

  const StreamKey key = opts.key.child("permute-mc");
  const std::size_t t_count = seeds.size();
  std::vector<EstimatorAccumulator> partial(n_pi, EstimatorAccumulator(t_count));
  for_each_chunk(n_pi, 1, opts.workers, [&](ChunkRange r) {
    CascadeSimulator sim(g, seeds);
    Rng rng = key.child(r.chunk).make_rng();
    std::vector<std::size_t> order(t_count);
    for (std::size_t i = 0; i < t_count; ++i) order[i] = i;
    shuffle(order.begin(), order.end(), rng);

    auto estimate = [&](const Coalition& c) {
      if (c.empty()) return 0.0;
      double sum = 0.0;
      for (std::uint64_t j = 0; j < n_mc; ++j) sum += static_cast<double>(sim.run(c, policy, rng));
      return sum / static_cast<double>(n_mc);
    };

    std::vector<double> marginal(t_count, 0.0);
    Coalition s = Coalition::none(seeds);
    for (std::size_t pos : order) {
      Coalition with = s;
      with.insert_position(pos);
      const double u_with = estimate(with);
      const double u_without = estimate(s);
      marginal[pos] = u_with - u_without;
      s = std::move(with);
    }
    partial[r.chunk].add_dense(marginal);
  });

  EstimatorAccumulator acc(t_count);
  for (const auto& p : partial) acc.merge(p);
  report.seeds.assign(seeds.members().begin(), seeds.members().end());
  fill_from_accumulator(report, acc, 1.0);
  report.algorithm = "permute-mc";
  report.params["policy"] = policy.to_string();
  report.params["permutations"] = n_pi;
  report.params["mc_samples"] = n_mc;
  report.params["rng_seed"] = opts.key.master_seed();
  report.elapsed_seconds = seconds_since(start);
  return report;
}

ShapleyReport approx_live_edge(const DirectedGraph& g, const SeedSet& seeds, TerminationPolicy policy,
                               const SampleBudget& budget, const ApproxOptions& opts) {
  const auto start = std::chrono::steady_clock::now();
  check_seeds(g, seeds);
  ShapleyReport report;
  std::uint64_t n = 0;
  if (const auto* e = std::get_if<ExplicitBudget>(&budget)) {
    if (e->primary == 0) throw std::invalid_argument("live-edge needs samples >= 1");
    n = e->primary;
  } else if (const auto* gb = std::get_if<GuaranteeBudget>(&budget)) {
    n = live_edge_guarantee_size(g.node_count(), seeds.size(), gb->epsilon, gb->delta);
    if (static_cast<double>(n) > opts.cost_ceiling)
      throw BudgetExceeded("live-edge guarantee needs n=" + std::to_string(n) +
                           " live-edge graphs, above the ceiling of " + format_count(opts.cost_ceiling));
    report.params["epsilon"] = gb->epsilon;
    report.params["delta"] = gb->delta;
  } else {
    throw std::invalid_argument("live-edge takes an explicit or (epsilon, delta) budget");
  }

  const DirectedGraph g_prime = remove_seed_in_edges(g, seeds);
  const StreamKey key = opts.key.child("live-edge");
  const std::size_t t_count = seeds.size();
  std::vector<EstimatorAccumulator> partial(chunk_count(n, kLiveEdgeChunk), EstimatorAccumulator(t_count));
  for_each_chunk(n, kLiveEdgeChunk, opts.workers, [&](ChunkRange r) {
    Rng rng = key.child(r.chunk).make_rng();
    std::vector<double> credit(t_count);
    for (std::size_t i = r.begin; i < r.end; ++i) {
      const LiveEdgeGraph live = sample_live_edge(g_prime, rng);
      const ReachabilityMap reach = multi_source_reach(live, seeds, policy);
      std::fill(credit.begin(), credit.end(), 0.0);
      for (NodeId v = 0; v < g.node_count(); ++v) {
        const std::size_t c = reach.count(v);
        if (c == 0) continue;
        const double share = 1.0 / static_cast<double>(c);
        reach.for_each(v, [&](std::size_t pos) { credit[pos] += share; });
      }
      partial[r.chunk].add_dense(credit);
    }
  });

  EstimatorAccumulator acc(t_count);
  for (const auto& p : partial) acc.merge(p);
  report.seeds.assign(seeds.members().begin(), seeds.members().end());
  fill_from_accumulator(report, acc, 1.0);
  report.algorithm = "live-edge";
  report.params["policy"] = policy.to_string();
  report.params["samples"] = n;
  report.params["rng_seed"] = opts.key.master_seed();
  report.elapsed_seconds = seconds_since(start);
  return report;
}

ShapleyReport approx_rr_set(const DirectedGraph& g, const SeedSet& seeds, TerminationPolicy policy,
                            const SampleBudget& budget, const ApproxOptions& opts) {
  const auto start = std::chrono::steady_clock::now();
  check_seeds(g, seeds);
  const DirectedGraph g_prime = remove_seed_in_edges(g, seeds);
  const auto roots = non_seed_nodes(g, seeds);
  if (roots.empty()) throw std::invalid_argument("rr-set needs at least one non-seed node");
  const std::size_t n_prime = roots.size();

  ShapleyReport report;
  std::uint64_t theta = 0;
  if (const auto* e = std::get_if<ExplicitBudget>(&budget)) {
    if (e->primary == 0) throw std::invalid_argument("rr-set needs theta >= 1");
    theta = e->primary;
  } else if (const auto* rb = std::get_if<RRGuaranteeBudget>(&budget)) {
    const ThresholdResult th = estimate_threshold(g_prime, seeds, rb->epsilon, rb->ell, rb->k, policy, opts);
    theta = rr_theta(n_prime, seeds.size(), rb->epsilon, rb->ell, th.lb);
    if (static_cast<double>(theta) > opts.cost_ceiling)
      throw BudgetExceeded("rr-set guarantee needs theta=" + std::to_string(theta) + " RR sets (LB=" +
                           format_count(th.lb) + "), above the ceiling of " + format_count(opts.cost_ceiling));
    report.params["epsilon"] = rb->epsilon;
    report.params["ell"] = rb->ell;
    report.params["k"] = static_cast<std::uint64_t>(rb->k);
    report.params["lb"] = th.lb;
    report.params["threshold_samples"] = th.samples;
  } else {
    throw std::invalid_argument("rr-set takes an explicit theta or an (epsilon, ell, k) budget");
  }

  // Phase 2 starts from fresh counters; threshold samples are not reused.
  const EstimatorAccumulator acc = draw_rr_batch(g_prime, seeds, roots, rr_depth_bound(policy), theta,
                                                 opts.key.child("rr-set"), opts.workers);
  report.seeds.assign(seeds.members().begin(), seeds.members().end());
  fill_from_accumulator(report, acc, static_cast<double>(n_prime));
  report.algorithm = "rr-set";
  report.params["policy"] = policy.to_string();
  report.params["theta"] = theta;
  report.params["rng_seed"] = opts.key.master_seed();
  report.elapsed_seconds = seconds_since(start);
  return report;
}

}  // namespace shapinf
