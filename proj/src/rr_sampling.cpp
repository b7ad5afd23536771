#include <algorithm>
#include <cmath>

#include "shapinf/parallel.hpp"
#include "shapinf/shapley_approx.hpp"

namespace shapinf {

// --- accumulator -----------------------------------------------------------

EstimatorAccumulator::EstimatorAccumulator(std::size_t seed_count) : sum_(seed_count, 0.0), sum_sq_(seed_count, 0.0) {}

void EstimatorAccumulator::add_dense(std::span<const double> credits) {
  if (credits.size() != sum_.size()) throw std::invalid_argument("credit vector size mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < credits.size(); ++i) {
    sum_[i] += credits[i];
    sum_sq_[i] += credits[i] * credits[i];
    total += credits[i];
  }
  total_ += total;
  total_sq_ += total * total;
  ++samples_;
}

void EstimatorAccumulator::add_split(std::span<const std::size_t> positions) {
  ++samples_;
  if (positions.empty()) return;
  const double share = 1.0 / static_cast<double>(positions.size());
  for (std::size_t pos : positions) {
    sum_[pos] += share;
    sum_sq_[pos] += share * share;
  }
  total_ += 1.0;
  total_sq_ += 1.0;
}

void EstimatorAccumulator::merge(const EstimatorAccumulator& other) {
  if (other.sum_.size() != sum_.size()) throw std::invalid_argument("accumulator size mismatch");
  for (std::size_t i = 0; i < sum_.size(); ++i) {
    sum_[i] += other.sum_[i];
    sum_sq_[i] += other.sum_sq_[i];
  }
  total_ += other.total_;
  total_sq_ += other.total_sq_;
  samples_ += other.samples_;
}

namespace {

double mean_of(double sum, std::uint64_t n) { return n == 0 ? 0.0 : sum / static_cast<double>(n); }

double se_of(double sum, double sum_sq, std::uint64_t n) {
  if (n < 2) return 0.0;
  const auto nd = static_cast<double>(n);
  const double m = sum / nd;
  const double var = std::max(0.0, (sum_sq - nd * m * m) / (nd - 1.0));
  return std::sqrt(var / nd);
}

}  // namespace

double EstimatorAccumulator::mean(std::size_t pos) const { return mean_of(sum_.at(pos), samples_); }
double EstimatorAccumulator::std_error(std::size_t pos) const { return se_of(sum_.at(pos), sum_sq_.at(pos), samples_); }
double EstimatorAccumulator::total_mean() const { return mean_of(total_, samples_); }
double EstimatorAccumulator::total_std_error() const { return se_of(total_, total_sq_, samples_); }

// --- reverse reachable sets --------------------------------------------------

RRSampler::RRSampler(const DirectedGraph& g_prime, const SeedSet& seeds, std::size_t depth_bound)
    : g_(&g_prime),
      seeds_(&seeds),
      depth_bound_(depth_bound),
      mark_(g_prime.node_count(), 0),
      depth_(g_prime.node_count(), 0) {
  if (seeds.node_count() != g_prime.node_count()) throw std::invalid_argument("seed set built for a different graph");
  if (depth_bound == 0) throw std::invalid_argument("RR depth bound must be >= 1");
}

std::size_t RRSampler::sample(NodeId root, Rng& rng, std::vector<std::size_t>& hits) {
  if (seeds_->contains(root)) throw std::invalid_argument("RR root must not be a seed");
  hits.clear();
  if (++epoch_ == 0) {
    std::fill(mark_.begin(), mark_.end(), 0);
    epoch_ = 1;
  }
  queue_.clear();
  queue_.push_back(root);
  mark_[root] = epoch_;
  depth_[root] = 0;
  for (std::size_t head = 0; head < queue_.size(); ++head) {
    const NodeId v = queue_[head];
    const std::size_t d = depth_[v];
    if (d >= depth_bound_) continue;
    for (const Arc& a : g_->in_arcs(v)) {
      const NodeId u = a.node;
      if (mark_[u] == epoch_) continue;
      if (!bernoulli(rng, a.prob)) continue;
      mark_[u] = epoch_;
      const auto pos = seeds_->position(u);
      if (pos != SeedSet::kNotSeed) {
        hits.push_back(static_cast<std::size_t>(pos));
        continue;
      }
      depth_[u] = d + 1;
      queue_.push_back(u);
    }
  }
  visited_count_ = queue_.size() + hits.size();
  std::sort(hits.begin(), hits.end());
  return hits.size();
}

RRSample sample_rr_set(const DirectedGraph& g_prime, const SeedSet& seeds, NodeId root,
                       std::optional<std::size_t> depth_bound, Rng& rng) {
  RRSampler sampler(g_prime, seeds, depth_bound.value_or(TerminationPolicy::kUnbounded));
  RRSample s;
  s.root = root;
  sampler.sample(root, rng, s.seed_hits);
  return s;
}

std::size_t rr_depth_bound(TerminationPolicy policy) { return policy.step_bound(); }

ValueEstimate rr_coalition_value(const DirectedGraph& g, const SeedSet& seeds, const Coalition& coalition,
                                 TerminationPolicy policy, std::size_t samples, const ApproxOptions& opts) {
  if (samples == 0) throw std::invalid_argument("rr_coalition_value needs at least one sample");
  const DirectedGraph g_prime = remove_seed_in_edges(g, seeds);
  std::vector<NodeId> roots;
  for (NodeId v = 0; v < g.node_count(); ++v)
    if (!seeds.contains(v)) roots.push_back(v);
  if (roots.empty()) throw std::invalid_argument("graph has no non-seed nodes");

  constexpr std::size_t kChunk = 8192;
  std::vector<std::uint64_t> hit_counts(chunk_count(samples, kChunk), 0);
  const StreamKey key = opts.key.child("rr-coalition");
  for_each_chunk(samples, kChunk, opts.workers, [&](ChunkRange r) {
    RRSampler sampler(g_prime, seeds, rr_depth_bound(policy));
    Rng rng = key.child(r.chunk).make_rng();
    std::vector<std::size_t> hits;
    std::uint64_t count = 0;
    for (std::size_t i = r.begin; i < r.end; ++i) {
      sampler.sample(roots[uniform_index(rng, roots.size())], rng, hits);
      for (std::size_t pos : hits) {
        if (coalition.contains_position(pos)) {
          ++count;
          break;
        }
      }
    }
    hit_counts[r.chunk] = count;
  });

  std::uint64_t hits = 0;
  for (auto c : hit_counts) hits += c;
  const auto n = static_cast<double>(samples);
  const double frac = static_cast<double>(hits) / n;
  const auto n_prime = static_cast<double>(roots.size());
  ValueEstimate est;
  est.samples = samples;
  est.mean = n_prime * frac;
  est.std_error = samples > 1 ? n_prime * std::sqrt(frac * (1.0 - frac) / (n - 1.0)) : 0.0;
  return est;
}

}  // namespace shapinf
