#include "shapinf/report_io.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <system_error>

#include "json.hpp"

namespace shapinf {

using nlohmann::json;

double ShapleyReport::total() const {
  double s = 0.0;
  for (double v : values) s += v;
  return s;
}

double ShapleyReport::value_of(NodeId t) const {
  for (std::size_t i = 0; i < seeds.size(); ++i)
    if (seeds[i] == t) return values.at(i);
  throw std::out_of_range("node " + std::to_string(t) + " is not a seed of this report");
}

ReportFormat parse_report_format(std::string_view text) {
  if (text == "json") return ReportFormat::Json;
  if (text == "csv") return ReportFormat::Csv;
  if (text == "table") return ReportFormat::Table;
  throw std::invalid_argument("unknown output format '" + std::string(text) + "' (expected json, csv, table)");
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

// Indices of report.seeds ordered by label bytes.
std::vector<std::size_t> label_order(const ShapleyReport& report, const DirectedGraph& g,
                                     std::vector<std::string>& labels) {
  labels.clear();
  for (NodeId t : report.seeds) labels.push_back(g.label(t));
  std::vector<std::size_t> idx(report.seeds.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return labels[a] < labels[b]; });
  return idx;
}

void check_shape(const ShapleyReport& r) {
  if (r.values.size() != r.seeds.size()) throw std::invalid_argument("report has mismatched seeds and values");
  if (!r.std_errors.empty() && r.std_errors.size() != r.seeds.size())
    throw std::invalid_argument("report has mismatched seeds and std_errors");
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string report_to_json(const ShapleyReport& report, const DirectedGraph& g, const RenderOptions& opts) {
  check_shape(report);
  json j;
  j["schema"] = kReportSchema;
  j["algorithm"] = report.algorithm;
  json params = json::object();
  for (const auto& [key, value] : report.params) std::visit([&](const auto& v) { params[key] = v; }, value);
  j["params"] = params;
  j["graph"] = {{"nodes", g.node_count()}, {"edges", g.edge_count()}, {"hash", hex64(g.content_hash())}};

  std::vector<std::string> labels;
  json seeds = json::array();
  for (std::size_t i : label_order(report, g, labels)) {
    json row = {{"label", labels[i]}, {"value", report.values[i]}};
    if (report.has_std_errors()) row["std_error"] = report.std_errors[i];
    seeds.push_back(std::move(row));
  }
  j["seeds"] = std::move(seeds);
  j["total"] = report.total();
  if (report.has_std_errors()) j["total_std_error"] = report.total_std_error;
  if (opts.include_timing) j["elapsed_seconds"] = report.elapsed_seconds;
  return j.dump(2) + "\n";
}

std::string report_to_csv(const ShapleyReport& report, const DirectedGraph& g) {
  check_shape(report);
  std::string out = "seed,value,std_error\n";
  std::vector<std::string> labels;
  for (std::size_t i : label_order(report, g, labels)) {
    out += csv_field(labels[i]);
    out += ',';
    out += format_double(report.values[i]);
    out += ',';
    if (report.has_std_errors()) out += format_double(report.std_errors[i]);
    out += '\n';
  }
  return out;
}

std::string report_to_table(const ShapleyReport& report, const DirectedGraph& g) {
  check_shape(report);
  std::vector<std::string> labels;
  const auto order = label_order(report, g, labels);
  std::size_t w = 4;
  for (const auto& l : labels) w = std::max(w, l.size());

  std::ostringstream out;
  out << "algorithm: " << report.algorithm << "\n";
  for (const auto& [key, value] : report.params) {
    out << key << ": ";
    std::visit(
        [&](const auto& v) {
          if constexpr (std::is_same_v<std::decay_t<decltype(v)>, double>)
            out << format_double(v);
          else
            out << v;
        },
        value);
    out << "\n";
  }
  auto pad = [](const std::string& s, std::size_t width) { return s + std::string(width - std::min(width, s.size()), ' '); };
  out << pad("seed", w) << "  " << pad("value", 24) << (report.has_std_errors() ? "  std_error" : "") << "\n";
  for (std::size_t i : order) {
    out << pad(labels[i], w) << "  " << pad(format_double(report.values[i]), 24);
    if (report.has_std_errors()) out << "  " << format_double(report.std_errors[i]);
    out << "\n";
  }
  out << pad("total", w) << "  " << format_double(report.total()) << "\n";
  return out.str();
}

std::string render_report(const ShapleyReport& report, const DirectedGraph& g, ReportFormat format,
                          const RenderOptions& opts) {
  switch (format) {
    case ReportFormat::Json:
      return report_to_json(report, g, opts);
    case ReportFormat::Csv:
      return report_to_csv(report, g);
    case ReportFormat::Table:
      return report_to_table(report, g);
  }
  return {};
}

ShapleyReport report_from_json(std::string_view text, const DirectedGraph& g) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("report is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("schema").get<std::string>() != kReportSchema)
      throw std::runtime_error("unsupported report schema '" + j.at("schema").get<std::string>() + "'");
    ShapleyReport r;
    r.algorithm = j.at("algorithm").get<std::string>();
    for (const auto& [key, v] : j.at("params").items()) {
      if (v.is_number_unsigned())
        r.params[key] = v.get<std::uint64_t>();
      else if (v.is_number())
        r.params[key] = v.get<double>();
      else if (v.is_string())
        r.params[key] = v.get<std::string>();
      else
        throw std::runtime_error("unsupported value for parameter '" + key + "'");
    }
    bool with_se = false;
    for (const auto& row : j.at("seeds")) {
      const auto label = row.at("label").get<std::string>();
      const auto v = g.find(label);
      if (!v) throw std::runtime_error("report seed '" + label + "' is not a node of the graph");
      r.seeds.push_back(*v);
      r.values.push_back(row.at("value").get<double>());
      if (row.contains("std_error")) {
        with_se = true;
        r.std_errors.push_back(row.at("std_error").get<double>());
      }
    }
    if (with_se && r.std_errors.size() != r.seeds.size())
      throw std::runtime_error("std_error present for some seeds only");
    if (j.contains("total_std_error")) r.total_std_error = j.at("total_std_error").get<double>();
    if (j.contains("elapsed_seconds")) r.elapsed_seconds = j.at("elapsed_seconds").get<double>();
    return r;
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("malformed report: ") + e.what());
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::system_error(errno, std::generic_category(), "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::system_error(errno, std::generic_category(), "cannot create " + tmp.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out.flush()) throw std::system_error(errno, std::generic_category(), "cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace shapinf
