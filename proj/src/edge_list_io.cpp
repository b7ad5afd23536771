#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include "shapinf/graph.hpp"

namespace shapinf {

namespace {

constexpr bool is_blank(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f'; }

std::vector<std::string_view> tokenize(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_blank(line[i])) ++i;
    if (i == line.size()) break;
    std::size_t j = i;
    while (j < line.size() && !is_blank(line[j])) ++j;
    out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

bool is_comment_or_blank(std::string_view line) {
  for (char c : line) {
    if (is_blank(c)) continue;
    return c == '#';
  }
  return true;
}

template <class Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    ++line_no;
    const auto line = text.substr(pos, nl - pos);
    if (!is_comment_or_blank(line)) fn(line_no, line);
    pos = nl + 1;
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::system_error(errno, std::generic_category(), "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw std::system_error(errno, std::generic_category(), "cannot read " + path.string());
  return std::move(buf).str();
}

double parse_prob(std::string_view tok, std::size_t line_no) {
  double p = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), p);
  if (ec != std::errc{} || ptr != tok.data() + tok.size())
    throw GraphFormatError(line_no, "invalid probability '" + std::string(tok) + "'");
  if (!(p > 0.0 && p <= 1.0)) throw GraphFormatError(line_no, "probability " + std::string(tok) + " outside (0, 1]");
  return p;
}

}  // namespace

DirectedGraph parse_edge_list(std::string_view text, std::optional<double> default_prob) {
  if (default_prob && !(*default_prob > 0.0 && *default_prob <= 1.0))
    throw GraphError("default probability outside (0, 1]");

  std::unordered_map<std::string, NodeId> ids;
  std::vector<std::string> labels;
  std::vector<Edge> edges;
  std::vector<std::size_t> edge_line;
  auto intern = [&](std::string_view tok) {
    auto [it, fresh] = ids.try_emplace(std::string(tok), static_cast<NodeId>(labels.size()));
    if (fresh) labels.emplace_back(tok);
    return it->second;
  };

  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    const auto tok = tokenize(line);
    if (tok.size() < 2 || tok.size() > 3) throw GraphFormatError(line_no, "expected 'src dst [prob]'");
    double p = 0.0;
    if (tok.size() == 3) {
      p = parse_prob(tok[2], line_no);
    } else if (default_prob) {
      p = *default_prob;
    } else {
      throw GraphFormatError(line_no, "missing probability column and no default given");
    }
    const NodeId src = intern(tok[0]);
    const NodeId dst = intern(tok[1]);
    if (src == dst) throw GraphFormatError(line_no, "self-loop on '" + std::string(tok[0]) + "'");
    edges.push_back(Edge{src, dst, p});
    edge_line.push_back(line_no);
  });

  // Report duplicates with the line of the second occurrence.
  std::vector<std::size_t> order(edges.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const Edge& x = edges[a];
    const Edge& y = edges[b];
    if (x.src != y.src) return x.src < y.src;
    if (x.dst != y.dst) return x.dst < y.dst;
    return a < b;
  });
  for (std::size_t i = 1; i < order.size(); ++i) {
    const Edge& x = edges[order[i - 1]];
    const Edge& y = edges[order[i]];
    if (x.src == y.src && x.dst == y.dst)
      throw GraphFormatError(edge_line[order[i]],
                             "duplicate edge '" + labels[y.src] + "' -> '" + labels[y.dst] + "'");
  }

  const std::size_t n = labels.size();
  return DirectedGraph::from_edges(n, std::move(edges), std::move(labels));
}

DirectedGraph load_edge_list(const std::filesystem::path& path, std::optional<double> default_prob) {
  return parse_edge_list(read_file(path), default_prob);
}

std::string format_edge_list(const DirectedGraph& g) {
  std::string out;
  out.reserve(g.edge_count() * 32);
  char buf[64];
  for (const Edge& e : g.edges()) {
    out += g.label(e.src);
    out += ' ';
    out += g.label(e.dst);
    const int len = std::snprintf(buf, sizeof buf, " %.17g\n", e.prob);
    out.append(buf, static_cast<std::size_t>(len));
  }
  return out;
}

void write_edge_list(const DirectedGraph& g, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::system_error(errno, std::generic_category(), "cannot create " + path.string());
  out << format_edge_list(g);
  if (!out.flush()) throw std::system_error(errno, std::generic_category(), "cannot write " + path.string());
}

SeedSet parse_seed_list(const DirectedGraph& g, std::string_view text) {
  std::vector<NodeId> members;
  std::vector<char> seen(g.node_count(), 0);
  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    const auto tok = tokenize(line);
    if (tok.size() != 1) throw GraphFormatError(line_no, "expected exactly one node label");
    const auto v = g.find(tok[0]);
    if (!v) throw GraphFormatError(line_no, "unknown node '" + std::string(tok[0]) + "'");
    if (seen[*v]) throw GraphFormatError(line_no, "duplicate seed '" + std::string(tok[0]) + "'");
    seen[*v] = 1;
    members.push_back(*v);
  });
  if (members.empty()) throw GraphFormatError(0, "seed list is empty");
  return SeedSet(g, std::move(members));
}

SeedSet load_seed_file(const DirectedGraph& g, const std::filesystem::path& path) {
  return parse_seed_list(g, read_file(path));
}

}  // namespace shapinf
