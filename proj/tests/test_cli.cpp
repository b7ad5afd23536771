#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "cli.hpp"
#include "doctest.h"
#include "json.hpp"
#include "shapinf/graph.hpp"
#include "shapinf/report_io.hpp"

using namespace shapinf;
using nlohmann::json;

namespace {

const std::string kData = SHAPINF_TEST_DATA;
const std::string kExample = kData + "/two_seed.txt";
const std::string kExampleSeeds = kData + "/two_seed_seeds.txt";

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "shapinf");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path temp_path(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "shapinf_cli_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("attribute on the two-seed example matches the golden report") {
  const auto r = run({"attribute", "--graph", kExample, "--seeds", kExampleSeeds, "--algo", "exact-single-step"});
  REQUIRE(r.code == 0);
  CHECK(r.out == read_text_file(kData + "/two_seed_exact.json"));
  const auto j = json::parse(r.out);
  CHECK(j["schema"] == "shapinf.report/1");
  CHECK(j["seeds"][0]["label"] == "t1");
  CHECK(j["seeds"][0]["value"].get<double>() == 0.75);
  CHECK(j["seeds"][1]["value"].get<double>() == 0.75);
  CHECK(j["total"].get<double>() == 1.5);
  CHECK_FALSE(j.contains("elapsed_seconds"));
}

TEST_CASE("attribute output formats") {
  const auto csv = run({"attribute", "--graph", kExample, "--seeds", kExampleSeeds, "--format", "csv"});
  CHECK(csv.out == "seed,value,std_error\nt1,0.75,\nt2,0.75,\n");
  const auto table = run({"attribute", "--graph", kExample, "--seeds", kExampleSeeds, "--format", "table"});
  CHECK(table.out.find("t1") != std::string::npos);
  const auto timed = run({"attribute", "--graph", kExample, "--seeds", kExampleSeeds, "--timing"});
  CHECK(json::parse(timed.out).contains("elapsed_seconds"));
  CHECK(run({"attribute", "--graph", kExample, "--seeds", kExampleSeeds, "--format", "xml"}).code == 2);
}

TEST_CASE("exit codes") {
  CHECK(run({"attribute", "--graph", kExample, "--seeds", kExampleSeeds, "--algo", "exact-single-step", "--policy", "complete"})
            .code == 2);
  CHECK(run({"attribute", "--graph", kExample, "--seeds", kExampleSeeds, "--policy", "k:0"}).code == 2);
  CHECK(run({"attribute", "--graph", kExample, "--seeds", kExampleSeeds, "--algo", "magic"}).code == 2);
  CHECK(run({"attribute", "--graph", kExample, "--seeds", kExampleSeeds, "--samples", "0", "--algo", "live-edge"}).code == 2);
  CHECK(run({"attribute", "--graph", kExample, "--seeds", kExampleSeeds, "--prob", "uniform:2"}).code == 2);
  CHECK(run({"attribute", "--graph", kExample}).code == 2);
  CHECK(run({"attribute", "--graph", kExample, "--seeds", kExampleSeeds, "--bogus"}).code == 2);
  CHECK(run({"nosuchcommand"}).code == 2);
  CHECK(run({}).code == 2);
  CHECK(run({"attribute", "--graph", kData + "/missing.txt", "--seeds", kExampleSeeds}).code == 1);
  CHECK(run({"attribute", "--graph", kExample, "--seeds", kData + "/missing.txt"}).code == 1);
  const auto bad = temp_path("bad_graph.txt");
  write_text_file(bad, "a b 0.5\nb b 0.5\n");
  const auto r = run({"attribute", "--graph", bad.string(), "--seeds", kExampleSeeds});
  CHECK(r.code == 1);
  CHECK(r.err.find("line 2") != std::string::npos);
  CHECK(run({"attribute", "--graph", kExample, "--seeds", kExampleSeeds, "--algo", "permute-mc", "--epsilon", "0.01",
             "--policy", "complete"})
            .code == 2);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("repeated runs are byte-identical across worker counts") {
  for (const char* algo : {"permute-mc", "live-edge", "rr-set", "bruteforce"}) {
    const std::vector<std::string> base{"attribute", "--graph", kExample,    "--seeds",     kExampleSeeds, "--algo",
                                        algo,        "--policy", "k:2", "--rng-seed", "42",      "--samples",
                                        "3000",      "--mc-samples", "50"};
    auto one = base, four = base;
    one.insert(one.end(), {"--workers", "1"});
    four.insert(four.end(), {"--workers", "4"});
    const auto a = run(one), b = run(one), c = run(four);
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out == c.out);
  }
  const auto other_seed = run({"attribute", "--graph", kExample, "--seeds", kExampleSeeds, "--algo", "rr-set", "--policy",
                               "complete", "--rng-seed", "43", "--samples", "3000"});
  const auto seed_42 = run({"attribute", "--graph", kExample, "--seeds", kExampleSeeds, "--algo", "rr-set", "--policy",
                            "complete", "--rng-seed", "42", "--samples", "3000"});
  CHECK(other_seed.out != seed_42.out);
}

TEST_CASE("worker count from the environment") {
  ::setenv("SHAPINF_WORKERS", "3", 1);
  const auto env = run({"attribute", "--graph", kExample, "--seeds", kExampleSeeds, "--algo", "live-edge", "--samples", "500"});
  ::unsetenv("SHAPINF_WORKERS");
  const auto flag = run({"attribute", "--graph", kExample, "--seeds", kExampleSeeds, "--algo", "live-edge", "--samples", "500",
                         "--workers", "1"});
  CHECK(env.code == 0);
  CHECK(env.out == flag.out);
}

TEST_CASE("generate") {
  const auto small = run({"generate", "--nodes", "2", "--avg-degree", "2"});
  REQUIRE(small.code == 0);
  CHECK(line_count(small.out) == 2);

  const auto path = temp_path("er1000.txt");
  REQUIRE(run({"generate", "-n", "1000", "-d", "10", "--prob", "wc", "--rng-seed", "1", "--out", path.string()}).code ==
          0);
  const auto text = read_text_file(path);
  CHECK(line_count(text) == 10000);
  const auto g = load_edge_list(path);
  CHECK(g.edge_count() == 10000);
  CHECK(g == parse_edge_list(format_edge_list(g)));
  CHECK(run({"generate", "-n", "1000", "-d", "10", "--prob", "wc", "--rng-seed", "1"}).out == text);
  CHECK(run({"generate", "-n", "1000", "-d", "10", "--prob", "wc", "--rng-seed", "2"}).out != text);
  CHECK(run({"generate", "-n", "3", "-d", "0"}).code == 2);
  CHECK(run({"generate", "-n", "1", "-d", "1"}).code == 2);

  // Generated graphs feed straight back into attribute.
  const auto seeds = temp_path("er_seeds.txt");
  REQUIRE(run({"seeds", "--graph", path.string(), "--seed-strategy", "topdeg", "--topk", "5", "--out", seeds.string()})
              .code == 0);
  CHECK(line_count(read_text_file(seeds)) == 5);
  CHECK(run({"attribute", "--graph", path.string(), "--seeds", seeds.string()}).code == 0);
}

TEST_CASE("probability modes") {
  const auto wc = run({"attribute", "--graph", kExample, "--seeds", kExampleSeeds, "--prob", "wc", "--format", "csv"});
  const auto uni =
      run({"attribute", "--graph", kExample, "--seeds", kExampleSeeds, "--prob", "uniform:0.5", "--format", "csv"});
  CHECK(uni.out == "seed,value,std_error\nt1,0.75,\nt2,0.75,\n");
  CHECK(wc.code == 0);
  CHECK(wc.out != uni.out);
}

TEST_CASE("compare") {
  const auto truth = temp_path("fig_truth.json");
  REQUIRE(run({"attribute", "--graph", kExample, "--seeds", kExampleSeeds, "--out", truth.string()}).code == 0);

  const auto self = run({"compare", "--graph", kExample, "--seeds", kExampleSeeds, "--algo", "exact-single-step", "--truth",
                         truth.string(), "--repeats", "2"});
  REQUIRE(self.code == 0);
  const auto js = json::parse(self.out);
  CHECK(js["mean_avg_relative_error"].get<double>() == 0.0);
  CHECK(js["ground_truth_source"] == "exact-single-step");

  const auto one = json::parse(run({"compare", "--graph", kExample, "--seeds", kExampleSeeds, "--algo", "live-edge",
                                    "--samples", "200", "--repeats", "1"})
                                   .out);
  const auto five = json::parse(run({"compare", "--graph", kExample, "--seeds", kExampleSeeds, "--algo", "live-edge",
                                     "--samples", "200", "--repeats", "5"})
                                    .out);
  CHECK(one["repeats"].size() == 1);
  CHECK(five["repeats"].size() == 5);
  std::vector<std::string> k1, k5;
  for (const auto& [k, v] : one.items()) k1.push_back(k);
  for (const auto& [k, v] : five.items()) k5.push_back(k);
  CHECK(k1 == k5);
  CHECK(one["repeats"][0] == five["repeats"][0]);

  CHECK(run({"compare", "--graph", kExample, "--seeds", kExampleSeeds, "--truth", (kData + "/nope.json")}).code == 1);
  const auto table = run({"compare", "--graph", kExample, "--seeds", kExampleSeeds, "--algo", "rr-set", "--samples", "1000",
                          "--format", "table", "--repeats", "2"});
  CHECK(table.out.find("repeat 2") != std::string::npos);
}

TEST_CASE("compare against a live-edge estimate on a 100-node graph") {
  const auto g = temp_path("g100.txt");
  REQUIRE(run({"generate", "-n", "100", "-d", "3", "--rng-seed", "5", "--out", g.string()}).code == 0);
  const auto r = run({"compare", "--graph", g.string(), "--seed-strategy", "topdeg", "--topk", "5", "--algo",
                      "live-edge", "--samples", "5000", "--repeats", "1"});
  REQUIRE(r.code == 0);
  CHECK(json::parse(r.out)["mean_avg_relative_error"].get<double>() < 0.05);
}

TEST_CASE("case study") {
  // Hubs h1 and h2 share their targets; h3 alone reaches a long chain.
  std::string text;
  for (int i = 0; i < 6; ++i) {
    text += "h1 x" + std::to_string(i) + " 1\n";
    text += "h2 x" + std::to_string(i) + " 1\n";
  }
  text += "h3 y0 1\nh3 y1 1\n";
  for (int i = 1; i < 10; ++i) text += "y" + std::to_string(i) + " y" + std::to_string(i + 1) + " 1\n";
  const auto g = temp_path("hubs.txt");
  write_text_file(g, text);
  const auto r = run({"case-study", "--graph", g.string(), "--topk", "3", "--policy", "complete", "--algo",
                      "live-edge", "--samples", "10"});
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  for (const auto& row : j["seeds"]) {
    if (row["label"] == "h3") {
      CHECK(row["shapley_rank"].get<int>() < row["degree_rank"].get<int>());
      CHECK(row["shapley_rank"].get<int>() == 1);
    }
  }

  const auto k1 = json::parse(run({"case-study", "--graph", kExample, "--topk", "1"}).out);
  CHECK(k1["seeds"].size() == 1);
  CHECK(k1["seeds"][0]["degree_rank"] == 1);
  CHECK(k1["seeds"][0]["pagerank_rank"] == 1);
  CHECK(k1["seeds"][0]["shapley_rank"] == 1);

  // t1, t2, a and b all have out-degree 2.
  const auto ties = run({"case-study", "--graph", kExample, "--topk", "2", "--format", "table"});
  CHECK(ties.out.find("note: out-degree ties") != std::string::npos);
}

TEST_CASE("seeds command") {
  const auto r = run({"seeds", "--graph", kExample, "--seed-strategy", "topdeg", "--topk", "2"});
  CHECK(r.out == "t1\na\n");
  const auto greedy = run({"seeds", "--graph", kExample, "--seed-strategy", "greedy", "--topk", "2", "--greedy-rr", "500"});
  CHECK(line_count(greedy.out) == 2);
  CHECK(run({"seeds", "--graph", kExample, "--seed-strategy", "topdeg", "--topk", "99"}).code == 2);
  CHECK(run({"seeds", "--graph", kExample, "--seed-strategy", "file"}).code == 2);
}
