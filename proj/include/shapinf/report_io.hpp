#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "shapinf/graph.hpp"
#include "shapinf/report.hpp"

namespace shapinf {

inline constexpr const char* kReportSchema = "shapinf.report/1";

enum class ReportFormat { Json, Csv, Table };

ReportFormat parse_report_format(std::string_view text);

struct RenderOptions {
  bool include_timing = false;
};

/// JSON text of a report (schema kReportSchema, see docs/formats.md). Seeds are
/// listed in byte order of their labels; keys are sorted; 2-space indent.
std::string report_to_json(const ShapleyReport& report, const DirectedGraph& g, const RenderOptions& opts = {});

/// CSV with header `seed,value,std_error`, rows in label order, %.17g numbers.
std::string report_to_csv(const ShapleyReport& report, const DirectedGraph& g);

/// Aligned text table for terminals.
std::string report_to_table(const ShapleyReport& report, const DirectedGraph& g);

std::string render_report(const ShapleyReport& report, const DirectedGraph& g, ReportFormat format,
                          const RenderOptions& opts = {});

/// Parses a report written by report_to_json; seed labels are resolved in `g`.
ShapleyReport report_from_json(std::string_view text, const DirectedGraph& g);

std::string read_text_file(const std::filesystem::path& path);
/// Writes through a temporary file and rename.
void write_text_file(const std::filesystem::path& path, std::string_view text);

/// Fixed-width lowercase hex of a 64-bit hash.
std::string hex64(std::uint64_t v);

/// %.17g formatting.
std::string format_double(double v);

}  // namespace shapinf
