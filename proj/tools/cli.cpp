#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "shapinf/bench.hpp"
#include "shapinf/parallel.hpp"
#include "shapinf/report_io.hpp"
#include "shapinf/shapley_approx.hpp"
#include "shapinf/shapley_exact.hpp"

namespace shapinf::cli {

namespace {

using nlohmann::json;

// Bad flag values or incompatible combinations (exit 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string graph;
  std::string prob = "file";
  std::string seeds_path;
  std::string seed_strategy;
  std::size_t topk = 0;
  std::size_t greedy_rr = 100000;
  std::string policy = "single";
  std::string algo = "auto";
  std::size_t samples = 0;
  std::size_t mc_samples = 0;
  double epsilon = 0.0;
  double delta = 0.05;
  double ell = 1.0;
  std::size_t rr_k = 1;
  std::uint64_t rng_seed = 1;
  unsigned workers = 0;
  std::string out;
  std::string format = "json";
  bool timing = false;
  double cost_ceiling = kDefaultCostCeiling;

  // generate
  std::size_t nodes = 0;
  double avg_degree = 0.0;

  // compare
  std::string truth;
  std::string cache_dir;
  std::size_t repeats = 5;

  [[nodiscard]] unsigned worker_count() const { return workers == 0 ? default_workers() : workers; }
  // Zero means "not given"; the flags themselves only accept positive values.
  [[nodiscard]] bool has_samples() const { return samples > 0; }
  [[nodiscard]] bool has_epsilon() const { return epsilon > 0.0; }
};

double parse_double(std::string_view s, const std::string& what) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw ConfigError("invalid " + what + " '" + std::string(s) + "'");
  return v;
}

DirectedGraph apply_prob_mode(const DirectedGraph& g, const std::string& mode) {
  if (mode == "file") return g;
  if (mode == "wc") return assign_weighted_cascade(g);
  if (mode.starts_with("uniform:")) {
    const double p = parse_double(std::string_view(mode).substr(8), "uniform probability");
    if (!(p > 0.0 && p <= 1.0)) throw ConfigError("uniform probability must be in (0, 1]");
    return assign_uniform(g, p);
  }
  throw ConfigError("unknown --prob '" + mode + "' (expected file, wc, uniform:<p>)");
}

DirectedGraph load_graph(const Options& o) {
  if (o.graph.empty()) throw ConfigError("--graph is required");
  if (o.prob != "file" && o.prob != "wc" && !o.prob.starts_with("uniform:"))
    throw ConfigError("unknown --prob '" + o.prob + "' (expected file, wc, uniform:<p>)");
  // Probabilities are replaced for wc/uniform, so the column may be absent.
  const auto base = o.prob == "file" ? load_edge_list(o.graph) : load_edge_list(o.graph, 1.0);
  return apply_prob_mode(base, o.prob);
}

TerminationPolicy parse_policy(const Options& o) {
  try {
    return TerminationPolicy::parse(o.policy);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

SeedSet load_seeds(const Options& o, const DirectedGraph& g) {
  std::string strategy = o.seed_strategy;
  if (strategy.empty()) strategy = o.seeds_path.empty() ? "" : "file";
  if (strategy == "file") {
    if (o.seeds_path.empty()) throw ConfigError("--seed-strategy file needs --seeds <path>");
    return load_seed_file(g, o.seeds_path);
  }
  if (strategy == "topdeg" || strategy == "greedy") {
    if (o.topk < 1 || o.topk > g.node_count())
      throw ConfigError("--topk must be in [1, " + std::to_string(g.node_count()) + "]");
    if (strategy == "topdeg") return SeedSet(g, top_out_degree(g, o.topk));
    if (o.greedy_rr == 0) throw ConfigError("--greedy-rr must be >= 1");
    return SeedSet(g, greedy_im(g, o.topk, o.greedy_rr, StreamKey(o.rng_seed).child("seeds"), o.worker_count()).picks);
  }
  if (strategy.empty()) throw ConfigError("no seeds given (use --seeds <file> or --seed-strategy topdeg|greedy)");
  throw ConfigError("unknown --seed-strategy '" + strategy + "' (expected topdeg, greedy, file)");
}

std::string resolve_algo(const Options& o, TerminationPolicy policy) {
  if (o.algo != "auto") return o.algo;
  return policy.kind() == TerminationPolicy::Kind::SingleStep ? "exact-single-step" : "live-edge";
}

ShapleyReport run_algorithm(const Options& o, const std::string& algo, const DirectedGraph& g, const SeedSet& seeds,
                            TerminationPolicy policy, const StreamKey& key) {
  ApproxOptions opts;
  opts.key = key;
  opts.workers = o.worker_count();
  opts.cost_ceiling = o.cost_ceiling;

  if (algo == "exact-single-step") {
    if (policy.kind() != TerminationPolicy::Kind::SingleStep)
      throw ConfigError("exact-single-step only supports --policy single (got " + policy.to_string() + ")");
    return exact_single_step(g, seeds, opts.workers);
  }
  if (algo == "bruteforce") {
    const ValueMode mode = o.has_samples() ? ValueMode::monte_carlo(o.samples) : ValueMode::exact();
    return shapley_bruteforce(g, seeds, policy, mode, key, opts.workers);
  }
  if (algo == "permute-mc") {
    SampleBudget b = o.has_epsilon() ? SampleBudget(GuaranteeBudget{o.epsilon, o.delta})
                                     : SampleBudget(ExplicitBudget{o.has_samples() ? o.samples : 500,
                                                                   o.mc_samples > 0 ? o.mc_samples : 500});
    return approx_permute_mc(g, seeds, policy, b, opts);
  }
  if (algo == "live-edge") {
    SampleBudget b = o.has_epsilon() ? SampleBudget(GuaranteeBudget{o.epsilon, o.delta})
                                     : SampleBudget(ExplicitBudget{o.has_samples() ? o.samples : 5000, 0});
    return approx_live_edge(g, seeds, policy, b, opts);
  }
  if (algo == "rr-set") {
    SampleBudget b = o.has_epsilon() ? SampleBudget(RRGuaranteeBudget{o.epsilon, o.ell, o.rr_k})
                                     : SampleBudget(ExplicitBudget{o.has_samples() ? o.samples : 500000, 0});
    return approx_rr_set(g, seeds, policy, b, opts);
  }
  throw ConfigError("unknown --algo '" + algo + "' (expected exact-single-step, bruteforce, permute-mc, live-edge, rr-set)");
}

void emit(const Options& o, std::ostream& out, const std::string& text) {
  if (o.out.empty()) {
    out << text;
    return;
  }
  write_text_file(o.out, text);
}

ReportFormat output_format(const Options& o) {
  try {
    return parse_report_format(o.format);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

std::string pad(const std::string& s, std::size_t w) { return s + std::string(w > s.size() ? w - s.size() : 0, ' '); }

// --- commands ----------------------------------------------------------------

void cmd_attribute(const Options& o, std::ostream& out) {
  const ReportFormat format = output_format(o);
  const TerminationPolicy policy = parse_policy(o);
  const DirectedGraph g = load_graph(o);
  const SeedSet seeds = load_seeds(o, g);
  const std::string algo = resolve_algo(o, policy);
  const ShapleyReport report = run_algorithm(o, algo, g, seeds, policy, StreamKey(o.rng_seed));
  emit(o, out, render_report(report, g, format, {.include_timing = o.timing}));
}

void cmd_generate(const Options& o, std::ostream& out) {
  if (o.nodes < 2) throw ConfigError("--nodes must be >= 2");
  if (!(o.avg_degree > 0.0)) throw ConfigError("--avg-degree must be > 0");
  DirectedGraph g;
  try {
    g = generate_erdos_renyi(o.nodes, o.avg_degree, o.rng_seed);
  } catch (const GraphError& e) {
    throw ConfigError(e.what());
  }
  if (o.prob == "wc" || o.prob.starts_with("uniform:") || o.prob == "file")
    g = apply_prob_mode(g, o.prob);
  else
    throw ConfigError("unknown --prob '" + o.prob + "' (expected wc, uniform:<p>, file)");
  emit(o, out, format_edge_list(g));
}

ShapleyReport load_truth(const Options& o, const DirectedGraph& g, const SeedSet& seeds, TerminationPolicy policy) {
  if (!o.truth.empty()) {
    if (!std::filesystem::exists(o.truth)) throw std::system_error(ENOENT, std::generic_category(), "ground truth " + o.truth);
    ShapleyReport truth = report_from_json(read_text_file(o.truth), g);
    std::vector<NodeId> a = truth.seeds;
    std::vector<NodeId> b(seeds.members().begin(), seeds.members().end());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a != b) throw ConfigError("ground truth covers a different seed set");
    return truth;
  }
  ApproxOptions opts;
  opts.key = StreamKey(o.rng_seed).child("ground-truth");
  opts.workers = o.worker_count();
  opts.cost_ceiling = o.cost_ceiling;
  if (!o.cache_dir.empty()) return cached_ground_truth(g, seeds, policy, opts, o.cache_dir);
  return make_ground_truth(g, seeds, policy, opts);
}

void cmd_compare(const Options& o, std::ostream& out) {
  const ReportFormat format = output_format(o);
  if (o.repeats < 1) throw ConfigError("--repeats must be >= 1");
  const TerminationPolicy policy = parse_policy(o);
  const DirectedGraph g = load_graph(o);
  const SeedSet seeds = load_seeds(o, g);
  const std::string algo = resolve_algo(o, policy);
  const ShapleyReport truth = load_truth(o, g, seeds, policy);

  std::vector<ErrorSummary> runs;
  std::vector<double> est_sum(seeds.size(), 0.0);
  std::vector<double> err_sum(seeds.size(), 0.0);
  ShapleyReport first;
  for (std::size_t r = 0; r < o.repeats; ++r) {
    const ShapleyReport est = run_algorithm(o, algo, g, seeds, policy, StreamKey(o.rng_seed).child("repeat").child(r));
    if (r == 0) first = est;
    runs.push_back(average_relative_error(est, truth));
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      est_sum[i] += est.value_of(seeds[i]);
      const auto it = runs.back().per_seed_errors.find(seeds[i]);
      if (it != runs.back().per_seed_errors.end()) err_sum[i] += it->second;
    }
  }
  double mean_err = 0.0;
  for (const auto& s : runs) mean_err += s.avg_relative_error;
  mean_err /= static_cast<double>(runs.size());
  const double reps = static_cast<double>(o.repeats);

  std::vector<std::size_t> order(seeds.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return g.label(seeds[a]) < g.label(seeds[b]); });

  if (format == ReportFormat::Json) {
    json j;
    j["schema"] = "shapinf.compare/1";
    j["algorithm"] = first.algorithm;
    json params = json::object();
    for (const auto& [k, v] : first.params) std::visit([&](const auto& x) { params[k] = x; }, v);
    params.erase("rng_seed");
    j["params"] = params;
    j["rng_seed"] = o.rng_seed;
    j["ground_truth_source"] = runs.front().ground_truth_source;
    json reps_json = json::array();
    for (const auto& s : runs)
      reps_json.push_back({{"avg_relative_error", s.avg_relative_error}, {"excluded_zero_truth", s.excluded_zero_truth}});
    j["repeats"] = reps_json;
    j["mean_avg_relative_error"] = mean_err;
    json per = json::array();
    for (std::size_t i : order) {
      json row = {{"label", g.label(seeds[i])}, {"truth", truth.value_of(seeds[i])}, {"mean_estimate", est_sum[i] / reps}};
      if (truth.value_of(seeds[i]) != 0.0) row["mean_relative_error"] = err_sum[i] / reps;
      per.push_back(std::move(row));
    }
    j["seeds"] = per;
    emit(o, out, j.dump(2) + "\n");
  } else if (format == ReportFormat::Csv) {
    std::string text = "seed,truth,mean_estimate,mean_relative_error\n";
    for (std::size_t i : order) {
      const double tv = truth.value_of(seeds[i]);
      text += g.label(seeds[i]) + "," + format_double(tv) + "," + format_double(est_sum[i] / reps) + "," +
              (tv != 0.0 ? format_double(err_sum[i] / reps) : std::string()) + "\n";
    }
    emit(o, out, text);
  } else {
    std::ostringstream s;
    s << "algorithm: " << first.algorithm << "\n";
    s << "ground truth: " << runs.front().ground_truth_source << "\n";
    for (std::size_t r = 0; r < runs.size(); ++r)
      s << "repeat " << r + 1 << ": avg relative error " << format_double(runs[r].avg_relative_error)
        << (runs[r].excluded_zero_truth ? " (" + std::to_string(runs[r].excluded_zero_truth) + " zero-truth seeds excluded)" : "")
        << "\n";
    s << "mean avg relative error: " << format_double(mean_err) << "\n";
    emit(o, out, s.str());
  }
}

void cmd_case_study(const Options& o, std::ostream& out) {
  const ReportFormat format = output_format(o);
  const TerminationPolicy policy = parse_policy(o);
  const DirectedGraph g = load_graph(o);
  if (o.topk < 1 || o.topk > g.node_count())
    throw ConfigError("--topk must be in [1, " + std::to_string(g.node_count()) + "]");
  const auto picked = top_out_degree(g, o.topk);
  const SeedSet seeds(g, picked);
  const std::string algo = resolve_algo(o, policy);
  const ShapleyReport report = run_algorithm(o, algo, g, seeds, policy, StreamKey(o.rng_seed));
  const auto pr = pagerank(g);

  const std::size_t k = seeds.size();
  std::vector<double> deg(k), prs(k), shap(k);
  for (std::size_t i = 0; i < k; ++i) {
    deg[i] = static_cast<double>(g.out_degree(seeds[i]));
    prs[i] = pr[seeds[i]];
    shap[i] = report.values[i];
  }
  const auto deg_rank = descending_ranks(deg);
  const auto pr_rank = descending_ranks(prs);
  const auto shap_rank = descending_ranks(shap);

  // Degree ties among the seeds or across the top-k boundary are resolved by id.
  bool tie = false;
  for (std::size_t i = 0; i < k && !tie; ++i)
    for (std::size_t j = i + 1; j < k; ++j)
      if (deg[i] == deg[j]) tie = true;
  const std::size_t kth = g.out_degree(seeds[k - 1]);
  for (NodeId v = 0; v < g.node_count() && !tie; ++v)
    if (!seeds.contains(v) && g.out_degree(v) == kth) tie = true;
  const std::string note = "out-degree ties broken by ascending node id";

  std::vector<std::size_t> order(k);
  for (std::size_t i = 0; i < k; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return shap_rank[a] != shap_rank[b] ? shap_rank[a] < shap_rank[b] : g.label(seeds[a]) < g.label(seeds[b]);
  });

  if (format == ReportFormat::Json) {
    json j;
    j["schema"] = "shapinf.case-study/1";
    j["algorithm"] = report.algorithm;
    j["policy"] = policy.to_string();
    j["rng_seed"] = o.rng_seed;
    json rows = json::array();
    for (std::size_t i : order)
      rows.push_back({{"label", g.label(seeds[i])},
                      {"out_degree", g.out_degree(seeds[i])},
                      {"degree_rank", deg_rank[i]},
                      {"pagerank", prs[i]},
                      {"pagerank_rank", pr_rank[i]},
                      {"shapley", shap[i]},
                      {"shapley_rank", shap_rank[i]}});
    j["seeds"] = rows;
    if (tie) j["note"] = note;
    emit(o, out, j.dump(2) + "\n");
    return;
  }
  std::size_t w = 4;
  for (std::size_t i = 0; i < k; ++i) w = std::max(w, g.label(seeds[i]).size());
  std::ostringstream s;
  const bool csv = format == ReportFormat::Csv;
  if (csv)
    s << "seed,out_degree,degree_rank,pagerank,pagerank_rank,shapley,shapley_rank\n";
  else
    s << pad("seed", w) << "  out_deg  deg_rank  pagerank                 pr_rank  shapley                  shap_rank\n";
  for (std::size_t i : order) {
    const std::string label = g.label(seeds[i]);
    if (csv) {
      s << label << ',' << g.out_degree(seeds[i]) << ',' << deg_rank[i] << ',' << format_double(prs[i]) << ','
        << pr_rank[i] << ',' << format_double(shap[i]) << ',' << shap_rank[i] << "\n";
    } else {
      s << pad(label, w) << "  " << pad(std::to_string(g.out_degree(seeds[i])), 7) << "  "
        << pad(std::to_string(deg_rank[i]), 8) << "  " << pad(format_double(prs[i]), 23) << "  "
        << pad(std::to_string(pr_rank[i]), 7) << "  " << pad(format_double(shap[i]), 23) << "  " << shap_rank[i]
        << "\n";
    }
  }
  if (tie && !csv) s << "note: " << note << "\n";
  emit(o, out, s.str());
}

void cmd_seeds(const Options& o, std::ostream& out) {
  const DirectedGraph g = load_graph(o);
  const SeedSet seeds = load_seeds(o, g);
  std::string text;
  for (NodeId t : seeds.members()) text += g.label(t) + "\n";
  emit(o, out, text);
}

// --- option wiring ----------------------------------------------------------------

void add_output(CLI::App* app, Options& o) {
  app->add_option("--out", o.out, "Write output to this file instead of stdout");
  app->add_option("--workers", o.workers, "Worker threads (default: $SHAPINF_WORKERS or hardware concurrency)");
  app->add_option("--rng-seed", o.rng_seed, "Master seed for every random stream");
}

void add_graph(CLI::App* app, Options& o) {
  app->add_option("--graph", o.graph, "Edge-list file (src dst [prob])")->required();
  app->add_option("--prob", o.prob, "Edge probabilities: file, wc, uniform:<p>");
}

void add_seeds(CLI::App* app, Options& o) {
  app->add_option("--seeds", o.seeds_path, "Seed file, one node label per line");
  app->add_option("--seed-strategy", o.seed_strategy, "topdeg, greedy or file");
  app->add_option("--topk", o.topk, "Seed count for topdeg/greedy");
  app->add_option("--greedy-rr", o.greedy_rr, "RR sets drawn by the greedy selector");
}

void add_run(CLI::App* app, Options& o) {
  app->add_option("--policy", o.policy, "single, k:<K> or complete");
  app->add_option("--algo", o.algo, "auto, exact-single-step, bruteforce, permute-mc, live-edge, rr-set");
  app->add_option("--samples", o.samples,
                  "Permutations (permute-mc), live-edge graphs, RR sets, or cascades per coalition (bruteforce)")
      ->check(CLI::PositiveNumber);
  app->add_option("--mc-samples", o.mc_samples, "Cascades per value estimate (permute-mc)")->check(CLI::PositiveNumber);
  app->add_option("--epsilon", o.epsilon, "Switch to guarantee mode with this epsilon")->check(CLI::PositiveNumber);
  app->add_option("--delta", o.delta, "Failure probability for permute-mc/live-edge guarantee mode");
  app->add_option("--ell", o.ell, "rr-set guarantee exponent");
  app->add_option("--rr-k", o.rr_k, "rr-set guarantee pivot k");
  app->add_option("--cost-ceiling", o.cost_ceiling, "Refuse guarantee budgets above this many samples");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Shapley influence attribution under the independent cascade model", "shapinf"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "shapinf 1.0");
  Options o;

  auto* attribute = app.add_subcommand("attribute", "Compute per-seed Shapley values");
  add_graph(attribute, o);
  add_seeds(attribute, o);
  add_run(attribute, o);
  add_output(attribute, o);
  attribute->add_option("--format", o.format, "json, csv or table");
  attribute->add_flag("--timing", o.timing, "Include wall time in JSON output");

  auto* generate = app.add_subcommand("generate", "Write an Erdos-Renyi G(n, m) edge list");
  generate->add_option("--nodes,-n", o.nodes, "Node count")->required();
  generate->add_option("--avg-degree,-d", o.avg_degree, "Average out-degree; m = round(n * d)")->required();
  generate->add_option("--prob", o.prob, "wc, uniform:<p> or file (all 1)")->default_str("wc");
  add_output(generate, o);

  auto* compare = app.add_subcommand("compare", "Average relative error of an estimator against ground truth");
  add_graph(compare, o);
  add_seeds(compare, o);
  add_run(compare, o);
  add_output(compare, o);
  compare->add_option("--format", o.format, "json, csv or table");
  compare->add_option("--truth", o.truth, "Ground-truth report (JSON); computed when absent");
  compare->add_option("--cache-dir", o.cache_dir, "Directory caching computed ground truths");
  compare->add_option("--repeats", o.repeats, "Estimator repetitions");

  auto* case_study = app.add_subcommand("case-study", "Compare out-degree, PageRank and Shapley rankings");
  add_graph(case_study, o);
  add_run(case_study, o);
  add_output(case_study, o);
  case_study->add_option("--topk", o.topk, "Number of top out-degree seeds")->required();
  case_study->add_option("--format", o.format, "json, csv or table");

  auto* seeds = app.add_subcommand("seeds", "Select seeds and print them as a seed file");
  add_graph(seeds, o);
  add_seeds(seeds, o);
  add_output(seeds, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::CallForVersion& e) {
    out << "shapinf 1.0\n";
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  }
  if (generate->parsed() && o.prob == "file" && generate->get_option("--prob")->count() == 0) o.prob = "wc";

  try {
    if (attribute->parsed()) cmd_attribute(o, out);
    else if (generate->parsed()) cmd_generate(o, out);
    else if (compare->parsed()) cmd_compare(o, out);
    else if (case_study->parsed()) cmd_case_study(o, out);
    else if (seeds->parsed()) cmd_seeds(o, out);
    return kOk;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const BudgetExceeded& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kIoError;
  }
}

}  // namespace shapinf::cli
