#pragma once

#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cacq/metrics.hpp"

namespace cacq {

/// One-dimensional experiment grid over a numeric config entry, evaluated
/// for one or more admission policies side by side.
struct SweepSpec {
  std::string parameter_path;  // dotted key into the config document
  double from = 0.0;
  double to = 0.0;
  int steps = 0;
  std::vector<std::string> policies;  // empty: use the config's policy
};

struct SweepRow {
  double sweep_value = 0.0;
  std::string policy;
  PerformanceReport report;
  bool converged = false;
};

struct SweepResult {
  std::vector<SweepRow> rows;  // ordered by (grid index, policy index)
  bool all_converged = true;
};

/// Evaluates the grid with a worker pool of `threads` (values < 1 mean one).
/// Non-convergent points are reported in-place with their last residual.
SweepResult run_sweep(const nlohmann::json& base_config, const SweepSpec& spec, int threads);

/// Fixed-format CSV (12 significant digits), byte-stable for equal inputs.
void write_sweep_csv(const SweepResult& result, std::ostream& out);

/// One SVG line chart per metric column under `directory`.
void write_sweep_svg_charts(const SweepResult& result, const SweepSpec& spec,
                            const std::string& directory);

/// printf-style "%.12g" rendering used for all CSV numbers.
std::string format_g12(double value);

}  // namespace cacq
