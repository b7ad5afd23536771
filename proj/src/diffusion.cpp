#include "shapinf/diffusion.hpp"

#include <cmath>

#include "shapinf/parallel.hpp"

namespace shapinf {

CascadeSimulator::CascadeSimulator(const DirectedGraph& g, const SeedSet& seeds)
    : g_(&g), seeds_(&seeds), active_(g.node_count(), 0), removed_(g.node_count(), 0) {
  if (seeds.node_count() != g.node_count()) throw std::invalid_argument("seed set built for a different graph");
}

void CascadeSimulator::next_epoch() {
  if (++epoch_ == 0) {
    std::fill(active_.begin(), active_.end(), 0);
    std::fill(removed_.begin(), removed_.end(), 0);
    epoch_ = 1;
  }
}

template <bool Record>
std::size_t CascadeSimulator::simulate(const Coalition& coalition, TerminationPolicy policy, Rng& rng,
                                       CascadeResult* out) {
  if (coalition.seed_count() != seeds_->size()) throw std::invalid_argument("coalition built for a different seed set");
  next_epoch();
  frontier_.clear();
  for (std::size_t i = 0; i < seeds_->size(); ++i) {
    const NodeId t = (*seeds_)[i];
    if (coalition.contains_position(i)) {
      active_[t] = epoch_;
      frontier_.push_back(t);
    } else {
      removed_[t] = epoch_;
    }
  }

  std::size_t activated = 0;
  std::size_t step = 0;
  const std::size_t bound = policy.step_bound();
  while (!frontier_.empty() && step < bound) {
    next_.clear();
    for (NodeId u : frontier_) {
      for (const Arc& a : g_->out_arcs(u)) {
        const NodeId v = a.node;
        if (active_[v] == epoch_ || removed_[v] == epoch_) continue;
        if (bernoulli(rng, a.prob)) {
          active_[v] = epoch_;
          next_.push_back(v);
        }
      }
    }
    if (next_.empty()) break;
    ++step;
    activated += next_.size();
    if constexpr (Record) out->activated.insert(out->activated.end(), next_.begin(), next_.end());
    frontier_.swap(next_);
  }
  if constexpr (Record) out->steps_taken = step;
  return activated;
}

std::size_t CascadeSimulator::run(const Coalition& coalition, TerminationPolicy policy, Rng& rng) {
  return simulate<false>(coalition, policy, rng, nullptr);
}

CascadeResult CascadeSimulator::run_detailed(const Coalition& coalition, TerminationPolicy policy, Rng& rng) {
  CascadeResult r;
  simulate<true>(coalition, policy, rng, &r);
  return r;
}

CascadeResult simulate_cascade(const DirectedGraph& g, const SeedSet& seeds, const Coalition& coalition,
                               TerminationPolicy policy, Rng& rng) {
  CascadeSimulator sim(g, seeds);
  return sim.run_detailed(coalition, policy, rng);
}

ValueEstimate estimate_value(const DirectedGraph& g, const SeedSet& seeds, const Coalition& coalition,
                             TerminationPolicy policy, std::size_t n_samples, const StreamKey& key,
                             unsigned workers) {
  if (n_samples == 0) throw std::invalid_argument("estimate_value needs at least one sample");
  if (coalition.empty()) return {};

  struct Partial {
    double sum = 0.0;
    double sum_sq = 0.0;
  };
  std::vector<Partial> partial(chunk_count(n_samples, kCascadeChunk));
  for_each_chunk(n_samples, kCascadeChunk, workers, [&](ChunkRange r) {
    CascadeSimulator sim(g, seeds);
    Rng rng = key.child(r.chunk).make_rng();
    Partial p;
    for (std::size_t i = r.begin; i < r.end; ++i) {
      const auto x = static_cast<double>(sim.run(coalition, policy, rng));
      p.sum += x;
      p.sum_sq += x * x;
    }
    partial[r.chunk] = p;
  });

  Partial total;
  for (const Partial& p : partial) {
    total.sum += p.sum;
    total.sum_sq += p.sum_sq;
  }
  const auto n = static_cast<double>(n_samples);
  ValueEstimate est;
  est.samples = n_samples;
  est.mean = total.sum / n;
  if (n_samples > 1) {
    const double var = std::max(0.0, (total.sum_sq - n * est.mean * est.mean) / (n - 1));
    est.std_error = std::sqrt(var / n);
  }
  return est;
}

double exact_value_single_step(const DirectedGraph& g, const SeedSet& seeds, const Coalition& coalition) {
  if (coalition.seed_count() != seeds.size()) throw std::invalid_argument("coalition built for a different seed set");
  double total = 0.0;
  for (NodeId u = 0; u < g.node_count(); ++u) {
    if (seeds.contains(u)) continue;
    double fail = 1.0;
    bool touched = false;
    for (const Arc& a : g.in_arcs(u)) {
      const auto pos = seeds.position(a.node);
      if (pos == SeedSet::kNotSeed || !coalition.contains_position(static_cast<std::size_t>(pos))) continue;
      fail *= 1.0 - a.prob;
      touched = true;
    }
    if (touched) total += 1.0 - fail;
  }
  return total;
}

}  // namespace shapinf
