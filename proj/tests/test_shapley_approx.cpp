#include "doctest.h"
#include "shapinf/shapley_approx.hpp"
#include "shapinf/shapley_exact.hpp"
#include "testing_support.hpp"

using namespace shapinf;
using shapinf::testing::two_seed;
using shapinf::testing::two_seed_seeds;
using shapinf::testing::within_sigma;

namespace {

ApproxOptions opts_for(std::uint64_t seed, unsigned workers = 1) {
  ApproxOptions o;
  o.key = StreamKey(seed);
  o.workers = workers;
  return o;
}

void check_report_within(const ShapleyReport& r, const std::vector<double>& truth, double sigmas = 3.0) {
  REQUIRE(r.values.size() == truth.size());
  REQUIRE(r.std_errors.size() == truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) {
    INFO("seed position " << i << ": estimate " << r.values[i] << " truth " << truth[i] << " se " << r.std_errors[i]);
    CHECK(within_sigma(r.values[i], truth[i], r.std_errors[i], sigmas));
  }
}

}  // namespace

TEST_CASE("accumulator merge equals accumulating the union") {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  EstimatorAccumulator all(4), left(4), right(4);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> credit(4);
    for (double& c : credit) c = u(gen);
    std::vector<std::size_t> hits;
    for (std::size_t p = 0; p < 4; ++p)
      if (gen() & 1u) hits.push_back(p);
    auto& side = i % 3 == 0 ? left : right;
    if (i % 2) {
      all.add_dense(credit);
      side.add_dense(credit);
    } else {
      all.add_split(hits);
      side.add_split(hits);
    }
  }
  EstimatorAccumulator merged(4);
  merged.merge(right);
  merged.merge(left);
  CHECK(merged.sample_count() == all.sample_count());
  for (std::size_t p = 0; p < 4; ++p) {
    CHECK(merged.mean(p) == doctest::Approx(all.mean(p)).epsilon(1e-12));
    CHECK(merged.std_error(p) == doctest::Approx(all.std_error(p)).epsilon(1e-12));
  }
  CHECK(merged.total_mean() == doctest::Approx(all.total_mean()).epsilon(1e-12));
}

TEST_CASE("guarantee sample sizes") {
  // 8 * 10^2 / 0.5^2 = 3200; ln(4 * 2 / 0.1) = ln 80.
  const auto s = permute_mc_guarantee_size(10, 2, 0.5, 0.1);
  CHECK(s.permutations == static_cast<std::uint64_t>(std::ceil(3200.0 * std::log(80.0))));
  CHECK(s.cascades == static_cast<std::uint64_t>(std::ceil(3200.0 * std::log(4.0 * static_cast<double>(s.permutations) * 2 / 0.1))));
  CHECK(live_edge_guarantee_size(10, 2, 0.5, 0.1) == static_cast<std::uint64_t>(std::ceil(200.0 * std::log(40.0))));
  const double logs = 2.0 * std::log(100.0) + std::log(5.0) + std::log(4.0);
  CHECK(rr_theta(100, 5, 0.1, 2.0, 3.0) ==
        static_cast<std::uint64_t>(std::ceil(100.0 * (2.0 + 0.2 / 3.0) / (0.01 * 3.0) * logs)));
  const double round_logs = std::log(64.0) + std::log(3.0) + std::log(6.0) + std::log(2.0);
  CHECK(rr_round_theta(64, 3, 0.5, 1.0, 2) ==
        static_cast<std::uint64_t>(std::ceil(64.0 * (2.0 + 1.0 / 3.0) / (0.25 * 16.0) * round_logs)));
  CHECK_THROWS(permute_mc_guarantee_size(10, 2, 0.0, 0.1));
  CHECK_THROWS(live_edge_guarantee_size(10, 2, 0.1, 1.0));
}

TEST_CASE("guarantee budgets above the ceiling are refused") {
  const auto g = two_seed();
  const auto seeds = two_seed_seeds(g);
  ApproxOptions o = opts_for(1);
  o.cost_ceiling = 1000;
  CHECK_THROWS_AS(approx_permute_mc(g, seeds, TerminationPolicy::single_step(), GuaranteeBudget{0.1, 0.1}, o),
                  BudgetExceeded);
  CHECK_THROWS_AS(approx_live_edge(g, seeds, TerminationPolicy::single_step(), GuaranteeBudget{0.01, 0.1}, o),
                  BudgetExceeded);
  CHECK_THROWS_AS(approx_rr_set(g, seeds, TerminationPolicy::complete(), RRGuaranteeBudget{0.01, 1, 1}, o),
                  BudgetExceeded);
  CHECK_THROWS_AS(approx_live_edge(g, seeds, TerminationPolicy::single_step(), ExplicitBudget{0, 0}, o),
                  std::invalid_argument);
  CHECK_THROWS_AS(approx_rr_set(g, seeds, TerminationPolicy::single_step(), GuaranteeBudget{0.1, 0.1}, o),
                  std::invalid_argument);
}

TEST_CASE("permutation sampling") {
  const auto g = two_seed();
  const auto seeds = two_seed_seeds(g);
  const auto r = approx_permute_mc(g, seeds, TerminationPolicy::single_step(), ExplicitBudget{2000, 500}, opts_for(2));
  CHECK(std::abs(r.values[0] - 0.75) < 0.05);
  CHECK(std::abs(r.values[1] - 0.75) < 0.05);
  CHECK(within_sigma(r.values[0] - r.values[1], 0.0, std::hypot(r.std_errors[0], r.std_errors[1])));

  const auto one = parse_seed_list(g, "t1");
  const auto single = approx_permute_mc(g, one, TerminationPolicy::complete(), ExplicitBudget{100, 1000}, opts_for(3));
  const auto direct = estimate_value(g, one, Coalition::all(one), TerminationPolicy::complete(), 100000, StreamKey(4));
  CHECK(within_sigma(single.values[0], direct.mean, std::hypot(single.std_errors[0], direct.std_error)));
}

TEST_CASE("live-edge sampling") {
  const auto g = two_seed();
  const auto seeds = two_seed_seeds(g);
  const auto r = approx_live_edge(g, seeds, TerminationPolicy::single_step(), ExplicitBudget{100000, 0}, opts_for(5));
  CHECK(std::abs(r.values[0] - 0.75) < 0.01);
  CHECK(std::abs(r.values[1] - 0.75) < 0.01);

  const auto exact = shapley_bruteforce(g, seeds, TerminationPolicy::complete(), ValueMode::exact(), StreamKey(0));
  check_report_within(approx_live_edge(g, seeds, TerminationPolicy::complete(), ExplicitBudget{100000, 0}, opts_for(6)),
                      exact.values);

  // Unit probabilities make every sample identical.
  const auto ones = parse_edge_list("s1 x 1\ns2 x 1\nx y 1\ns2 z 1\n");
  const auto s12 = parse_seed_list(ones, "s1\ns2");
  const auto d = approx_live_edge(ones, s12, TerminationPolicy::complete(), ExplicitBudget{37, 0}, opts_for(7));
  CHECK(d.values[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(d.values[1] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(d.std_errors[0] == 0.0);
  CHECK(d.total_std_error == 0.0);
}

TEST_CASE("RR sampler on tiny graphs") {
  const auto g = parse_edge_list("t r 1\nq w 1\n");
  const auto seeds = parse_seed_list(g, "t");
  auto rng = StreamKey(1).make_rng();
  CHECK(sample_rr_set(g, seeds, *g.find("r"), std::nullopt, rng).seed_hits == std::vector<std::size_t>{0});
  CHECK(sample_rr_set(g, seeds, *g.find("q"), std::nullopt, rng).seed_hits.empty());

  // Seeds are collected but not expanded, and depth is counted in reverse hops.
  const auto chain = parse_edge_list("a t 1\nt x 1\nx y 1\ny z 1\n");
  const auto ct = parse_seed_list(chain, "t\na");
  const auto cp = remove_seed_in_edges(chain, ct);
  CHECK(sample_rr_set(cp, ct, *chain.find("z"), std::nullopt, rng).seed_hits == std::vector<std::size_t>{0});
  CHECK(sample_rr_set(cp, ct, *chain.find("z"), 2, rng).seed_hits.empty());
  CHECK(sample_rr_set(cp, ct, *chain.find("z"), 3, rng).seed_hits == std::vector<std::size_t>{0});
}

TEST_CASE("RR-set estimator") {
  const auto g = two_seed();
  const auto seeds = two_seed_seeds(g);
  const auto exact = shapley_bruteforce(g, seeds, TerminationPolicy::complete(), ValueMode::exact(), StreamKey(0));
  check_report_within(approx_rr_set(g, seeds, TerminationPolicy::complete(), ExplicitBudget{1000000, 0}, opts_for(8)),
                      exact.values);

  // Each non-seed has a unit edge from a seed, so every RR set is hit.
  const auto cover = parse_edge_list("s1 a 1\ns1 b 1\ns2 b 1\ns2 c 1\na c 0.5\n");
  const auto cs = parse_seed_list(cover, "s1\ns2");
  const auto r = approx_rr_set(cover, cs, TerminationPolicy::complete(), ExplicitBudget{20000, 0}, opts_for(9));
  CHECK(r.total() == doctest::Approx(3.0).epsilon(1e-12));

  // Roots that no seed reaches only dilute the sample.
  const auto lonely = parse_edge_list("s a 1\nb c 1\n");
  const auto ls = parse_seed_list(lonely, "s");
  const auto lr = approx_rr_set(lonely, ls, TerminationPolicy::complete(), ExplicitBudget{30000, 0}, opts_for(10));
  CHECK(within_sigma(lr.values[0], 1.0, lr.std_errors[0]));
}

TEST_CASE("RR identity: n' times hit probability estimates U(S)") {
  const auto g = assign_weighted_cascade(generate_erdos_renyi(80, 3, 14));
  std::vector<NodeId> members{1, 7, 15, 22, 40, 63};
  const SeedSet seeds(g, members);
  for (std::uint64_t mask : {0b000001ULL, 0b010110ULL, 0b111111ULL}) {
    const auto c = Coalition::from_mask(seeds, mask);
    const auto rr = rr_coalition_value(g, seeds, c, TerminationPolicy::complete(), 200000, opts_for(mask));
    const auto mc = estimate_value(g, seeds, c, TerminationPolicy::complete(), 50000, StreamKey(mask + 100));
    CHECK(within_sigma(rr.mean, mc.mean, std::hypot(rr.std_error, mc.std_error)));
  }
}

TEST_CASE("threshold search") {
  // s1 alone covers 24 of the 32 non-seeds with probability 1.
  std::string text;
  for (int i = 0; i < 24; ++i) text += "s1 a" + std::to_string(i) + " 1\n";
  for (int i = 0; i < 8; ++i) text += "s2 b" + std::to_string(i) + " 1\n";
  const auto g = parse_edge_list(text);
  const auto seeds = parse_seed_list(g, "s1\ns2");
  const auto gp = remove_seed_in_edges(g, seeds);
  const auto th = estimate_threshold(gp, seeds, 0.2, 1.0, 1, TerminationPolicy::complete(), opts_for(11));
  CHECK(th.triggered);
  CHECK(th.rounds == 1);
  CHECK(th.lb >= 32.0 / 4.0);
  CHECK(th.lb <= 24.0);

  const auto empty = DirectedGraph::from_edges(10, {});
  const SeedSet es(empty, {0, 1});
  const auto none = estimate_threshold(empty, es, 0.3, 1.0, 1, TerminationPolicy::complete(), opts_for(12));
  CHECK_FALSE(none.triggered);
  CHECK(none.lb == 1.0);
  CHECK(none.rounds == 2);  // floor(log2 8) - 1

  CHECK_THROWS(estimate_threshold(gp, seeds, 0.2, 1.0, 3, TerminationPolicy::complete(), opts_for(1)));
  const auto small = DirectedGraph::from_edges(4, {});
  CHECK_THROWS(estimate_threshold(small, SeedSet(small, {0}), 0.2, 1.0, 1, TerminationPolicy::complete(), opts_for(1)));
}

TEST_CASE("unbiasedness against the exact multi-step oracle") {
  std::mt19937_64 gen(15);
  for (int trial = 0; trial < 4; ++trial) {
    const auto inst = testing::random_instance(gen, {.min_nodes = 5, .max_nodes = 9, .max_seeds = 3, .max_edges = 16, .density = 0.4});
    const SeedSet seeds(inst.g, inst.seeds);
    for (auto policy : {TerminationPolicy::single_step(), TerminationPolicy::k_steps(2), TerminationPolicy::complete()}) {
      const auto oracle = testing::oracle_permutation_shapley(seeds.size(), [&](std::uint64_t m) {
        return testing::oracle_enumerated_value(inst.g, inst.seeds, m, policy.step_bound());
      });
      check_report_within(approx_live_edge(inst.g, seeds, policy, ExplicitBudget{40000, 0}, opts_for(trial)), oracle,
                          4.0);
      check_report_within(approx_rr_set(inst.g, seeds, policy, ExplicitBudget{200000, 0}, opts_for(trial)), oracle,
                          4.0);
      check_report_within(approx_permute_mc(inst.g, seeds, policy, ExplicitBudget{400, 100}, opts_for(trial)), oracle,
                          4.0);
    }
  }
}

TEST_CASE("live-edge and RR-set estimators agree") {
  const auto g = assign_weighted_cascade(generate_erdos_renyi(100, 4, 16));
  std::vector<NodeId> members;
  for (NodeId v = 0; v < 100; v += 10) members.push_back(v);
  const SeedSet seeds(g, members);
  const auto le = approx_live_edge(g, seeds, TerminationPolicy::complete(), ExplicitBudget{20000, 0}, opts_for(17));
  const auto rr = approx_rr_set(g, seeds, TerminationPolicy::complete(), ExplicitBudget{500000, 0}, opts_for(18));
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    INFO("seed " << i);
    CHECK(within_sigma(le.values[i], rr.values[i], std::hypot(le.std_errors[i], rr.std_errors[i]), 4.0));
  }
}

TEST_CASE("estimators do not depend on the worker count") {
  const auto g = assign_weighted_cascade(generate_erdos_renyi(400, 5, 19));
  const SeedSet seeds(g, {3, 50, 99, 200, 333});
  const auto pol = TerminationPolicy::complete();
  CHECK(approx_permute_mc(g, seeds, pol, ExplicitBudget{7, 20}, opts_for(1, 1)).values ==
        approx_permute_mc(g, seeds, pol, ExplicitBudget{7, 20}, opts_for(1, 3)).values);
  CHECK(approx_live_edge(g, seeds, pol, ExplicitBudget{100, 0}, opts_for(1, 1)).values ==
        approx_live_edge(g, seeds, pol, ExplicitBudget{100, 0}, opts_for(1, 4)).values);
  CHECK(approx_rr_set(g, seeds, pol, ExplicitBudget{50000, 0}, opts_for(1, 1)).values ==
        approx_rr_set(g, seeds, pol, ExplicitBudget{50000, 0}, opts_for(1, 2)).values);
  const auto a = approx_rr_set(g, seeds, pol, RRGuaranteeBudget{0.5, 1, 1}, opts_for(2, 1));
  const auto b = approx_rr_set(g, seeds, pol, RRGuaranteeBudget{0.5, 1, 1}, opts_for(2, 3));
  CHECK(a.values == b.values);
  CHECK(a.params == b.params);
}
