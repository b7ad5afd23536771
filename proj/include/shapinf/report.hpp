#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "shapinf/graph.hpp"

namespace shapinf {

using ParamValue = std::variant<std::uint64_t, double, std::string>;

/// Per-seed attribution plus enough metadata to reproduce the run.
struct ShapleyReport {
  std::vector<NodeId> seeds;        // seed order of the SeedSet
  std::vector<double> values;       // values[i] belongs to seeds[i]
  std::vector<double> std_errors;   // empty for exact algorithms
  double total_std_error = 0.0;     // standard error of the sum of values
  std::string algorithm;
  std::map<std::string, ParamValue> params;
  double elapsed_seconds = 0.0;

  [[nodiscard]] double total() const;
  [[nodiscard]] bool has_std_errors() const noexcept { return !std_errors.empty(); }
  /// Value of seed node t; throws std::out_of_range when t is not a seed.
  [[nodiscard]] double value_of(NodeId t) const;
};

}  // namespace shapinf
