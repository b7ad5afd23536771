#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "shapinf/bench.hpp"
#include "testing_support.hpp"

using namespace shapinf;
using shapinf::testing::two_seed;
using shapinf::testing::two_seed_seeds;

namespace {

ShapleyReport make_report(const std::vector<NodeId>& seeds, const std::vector<double>& values, std::string source = "") {
  ShapleyReport r;
  r.seeds = seeds;
  r.values = values;
  if (!source.empty()) r.params["source"] = source;
  return r;
}

}  // namespace

TEST_CASE("top out-degree selection") {
  std::string star;
  for (int i = 1; i < 8; ++i) star += "c n" + std::to_string(i) + "\n";
  const auto g = parse_edge_list(star + "n1 n2\n", 1.0);
  CHECK(top_out_degree(g, 1) == std::vector<NodeId>{*g.find("c")});

  // Nodes 3 and 7 tie for the last slot.
  std::vector<Edge> edges;
  for (NodeId d = 1; d <= 4; ++d) edges.push_back({0, d, 1.0});
  for (NodeId d : {0u, 1u}) {
    edges.push_back({3, d, 1.0});
    edges.push_back({7, d, 1.0});
  }
  const auto t = DirectedGraph::from_edges(9, edges);
  CHECK(top_out_degree(t, 2) == std::vector<NodeId>{0, 3});
  CHECK_THROWS(top_out_degree(t, 0));
  CHECK_THROWS(top_out_degree(t, 10));

  // Relabeling nodes permutes the selection accordingly (up to the id tiebreak).
  std::mt19937_64 gen(1);
  for (int trial = 0; trial < 20; ++trial) {
    const auto inst = testing::random_instance(gen, {.max_nodes = 30, .max_edges = 200, .density = 0.3});
    const auto& h = inst.g;
    std::vector<NodeId> perm(h.node_count());
    std::iota(perm.begin(), perm.end(), NodeId{0});
    std::shuffle(perm.begin(), perm.end(), gen);
    std::vector<Edge> moved;
    for (const Edge& e : h.edges()) moved.push_back({perm[e.src], perm[e.dst], e.prob});
    const auto hp = DirectedGraph::from_edges(h.node_count(), moved);
    const std::size_t k = 1 + gen() % h.node_count();
    const auto a = top_out_degree(h, k);
    const auto b = top_out_degree(hp, k);
    std::vector<std::size_t> da, db;
    for (NodeId v : a) da.push_back(h.out_degree(v));
    for (NodeId v : b) db.push_back(hp.out_degree(v));
    CHECK(da == db);
    CHECK(top_out_degree(h, k) == a);
  }
}

TEST_CASE("greedy influence maximization") {
  // Stars of size 5 and 3, unit probabilities.
  std::string text;
  for (int i = 0; i < 5; ++i) text += "big b" + std::to_string(i) + "\n";
  for (int i = 0; i < 3; ++i) text += "small s" + std::to_string(i) + "\n";
  const auto g = parse_edge_list(text, 1.0);
  const auto res = greedy_im(g, 2, 20000, StreamKey(2));
  CHECK(res.picks == std::vector<NodeId>{*g.find("big"), *g.find("small")});
  CHECK(res.coverage[0] >= res.coverage[1]);

  const auto er = assign_weighted_cascade(generate_erdos_renyi(300, 4, 3));
  const auto many = greedy_im(er, 25, 20000, StreamKey(4));
  CHECK(many.picks.size() == 25);
  for (std::size_t i = 1; i < many.coverage.size(); ++i) CHECK(many.coverage[i] <= many.coverage[i - 1]);
  CHECK(greedy_im(er, 25, 20000, StreamKey(4), 1).picks == greedy_im(er, 25, 20000, StreamKey(4), 3).picks);
}

TEST_CASE("seed strategies") {
  const auto g = two_seed();
  CHECK(select_seeds(g, TopOutDegree{2}, StreamKey(1)).size() == 2);
  CHECK(select_seeds(g, GreedyIM{3, 1000}, StreamKey(1)).size() == 3);
  const auto path = std::filesystem::temp_directory_path() / "shapinf_seeds.txt";
  {
    std::ofstream out(path);
    out << "b\n# comment\nt2\n";
  }
  const auto s = select_seeds(g, ExplicitFile{path}, StreamKey(1));
  CHECK(s[0] == *g.find("b"));
  CHECK(s[1] == *g.find("t2"));
  std::filesystem::remove(path);
}

TEST_CASE("PageRank") {
  const auto cycle = parse_edge_list("a b\nb a\n", 1.0);
  const auto pr = pagerank(cycle);
  CHECK(pr[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(pr[1] == doctest::Approx(0.5).epsilon(1e-12));

  // An isolated node only receives teleport and dangling mass.
  const auto g = DirectedGraph::from_edges(3, {{0, 1, 1.0}, {1, 0, 1.0}});
  const auto p = pagerank(g);
  CHECK(p[0] + p[1] + p[2] == doctest::Approx(1.0).epsilon(1e-12));
  const double iso = p[2];
  CHECK(iso == doctest::Approx((1 - 0.85) / 3 + 0.85 * iso / 3).epsilon(1e-9));

  // Scores follow nodes under relabeling.
  const auto er = generate_erdos_renyi(80, 3, 6);
  std::vector<NodeId> perm(80);
  std::iota(perm.begin(), perm.end(), NodeId{0});
  std::mt19937_64 gen(7);
  std::shuffle(perm.begin(), perm.end(), gen);
  std::vector<Edge> moved;
  for (const Edge& e : er.edges()) moved.push_back({perm[e.src], perm[e.dst], e.prob});
  const auto a = pagerank(er);
  const auto b = pagerank(DirectedGraph::from_edges(80, moved));
  for (NodeId v = 0; v < 80; ++v) CHECK(a[v] == doctest::Approx(b[perm[v]]).epsilon(1e-10));
}

TEST_CASE("competition ranks") {
  const double scores[] = {0.5, 2.0, 0.5, 3.0};
  CHECK(descending_ranks(scores) == std::vector<std::size_t>{3, 2, 3, 1});
}

TEST_CASE("average relative error") {
  const auto same = make_report({0, 1}, {1.0, 2.0}, "exact");
  CHECK(average_relative_error(same, same).avg_relative_error == 0.0);

  const auto est = make_report({0, 1}, {1.1, 1.8});
  const auto err = average_relative_error(est, same);
  CHECK(err.avg_relative_error == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(err.ground_truth_source == "exact");
  CHECK(err.per_seed_errors.at(1) == doctest::Approx(0.1).epsilon(1e-12));

  const auto zero = make_report({0, 1}, {0.0, 2.0});
  const auto ez = average_relative_error(est, zero);
  CHECK(ez.excluded_zero_truth == 1);
  CHECK(ez.avg_relative_error == doctest::Approx(0.1).epsilon(1e-12));

  // Order of seeds in the two reports does not matter.
  const auto swapped = make_report({1, 0}, {1.8, 1.1});
  CHECK(average_relative_error(swapped, same).avg_relative_error == doctest::Approx(0.1).epsilon(1e-12));
  CHECK_THROWS(average_relative_error(make_report({0}, {1.0}), same));
}

TEST_CASE("ground truth routing") {
  const auto g = two_seed();
  const auto seeds = two_seed_seeds(g);
  ApproxOptions o;
  o.key = StreamKey(1);
  const auto single = make_ground_truth(g, seeds, TerminationPolicy::single_step(), o);
  CHECK(std::get<std::string>(single.params.at("source")) == "exact");
  CHECK(single.values[0] == doctest::Approx(0.75).epsilon(1e-12));

  std::mt19937_64 gen(8);
  const auto inst = testing::random_instance(gen, {.min_nodes = 10, .max_nodes = 10, .max_seeds = 2, .max_edges = 18});
  const SeedSet s(inst.g, inst.seeds);
  const auto complete = make_ground_truth(inst.g, s, TerminationPolicy::complete(), o);
  CHECK(complete.algorithm == "bruteforce");
  CHECK(std::get<std::string>(complete.params.at("source")) == "exact");

  const auto big = assign_weighted_cascade(generate_erdos_renyi(200, 4, 9));
  const SeedSet bs(big, top_out_degree(big, 10));
  ApproxOptions loose = o;
  const auto approx = make_ground_truth(big, bs, TerminationPolicy::complete(), loose);
  CHECK(approx.algorithm == "rr-set");
  CHECK(std::get<std::string>(approx.params.at("source")) == "approx-ground-truth");
  CHECK(std::get<double>(approx.params.at("epsilon")) == 0.01);
}

TEST_CASE("ground truth cache") {
  const auto g = assign_weighted_cascade(generate_erdos_renyi(50, 3, 10));
  const SeedSet seeds(g, {9, 2, 30});
  ApproxOptions o;
  o.key = StreamKey(3);
  const auto dir = std::filesystem::temp_directory_path() / "shapinf_cache_test";
  std::filesystem::remove_all(dir);
  const auto first = cached_ground_truth(g, seeds, TerminationPolicy::single_step(), o, dir);
  const auto name = ground_truth_cache_name(g, seeds, TerminationPolicy::single_step(), 3);
  CHECK(std::filesystem::exists(dir / name));
  const auto second = cached_ground_truth(g, seeds, TerminationPolicy::single_step(), o, dir);
  CHECK(second.seeds == first.seeds);
  CHECK(second.values == first.values);
  CHECK(name != ground_truth_cache_name(g, seeds, TerminationPolicy::complete(), 3));
  CHECK(name != ground_truth_cache_name(g, seeds, TerminationPolicy::single_step(), 4));
  std::filesystem::remove_all(dir);
}
