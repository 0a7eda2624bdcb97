#include "cacq/compare.hpp"

#include <cmath>
#include <limits>

namespace cacq {

namespace {

ComparisonRow make_row(const std::string& name, double analytic, const MetricEstimate& est) {
  ComparisonRow row{name, analytic, est.mean, est.std_err, 0.0};
  const double diff = analytic - est.mean;
  if (est.std_err > 0.0) {
    row.z = diff / est.std_err;
  } else {
    row.z = diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return row;
}

}  // namespace

std::vector<ComparisonRow> compare_metrics(const PerformanceReport& report, const SimResult& sim) {
  return {
      make_row("p_block", report.p_block, sim.p_block),
      make_row("n_connections", report.n_connections, sim.n_connections),
      make_row("n_queue", report.n_queue, sim.n_queue),
      make_row("n_drop", report.n_drop, sim.n_drop),
      make_row("p_drop", report.p_drop, sim.p_drop),
      make_row("lambda_bar", report.lambda_bar, sim.lambda_bar),
      make_row("throughput", report.throughput, sim.throughput),
      make_row("delay", report.delay, sim.delay),
  };
}

bool all_within(const std::vector<ComparisonRow>& rows, double z_limit) {
  for (const auto& row : rows)
    if (!(std::abs(row.z) <= z_limit)) return false;
  return true;
}

}  // namespace cacq
