#pragma once

#include <string>
#include <vector>

#include "cacq/metrics.hpp"
#include "cacq/simulate.hpp"

namespace cacq {

struct ComparisonRow {
  std::string metric;
  double analytic = 0.0;
  double simulated = 0.0;
  double std_err = 0.0;
  double z = 0.0;  // (analytic - simulated) / std_err
};

/// Pair every report metric with its simulated estimate and z-score.
std::vector<ComparisonRow> compare_metrics(const PerformanceReport& report,
                                           const SimResult& sim);

bool all_within(const std::vector<ComparisonRow>& rows, double z_limit = 3.0);

}  // namespace cacq
