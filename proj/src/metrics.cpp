#include "cacq/metrics.hpp"

#include <tuple>

namespace cacq {

double blocking_probability(const TransitionModel& model, const Eigen::VectorXd& pi) {
  const StateSpace& space = model.space();
  const CacPolicy& policy = model.config().policy;
  double blocked = 0.0;
  for (int i = 0; i < space.size(); ++i) {
    const auto st = space.state(i);
    blocked += pi[i] * (1.0 - policy.acceptance_probability(st.x, st.c));
  }
  return blocked;
}

double average_connections(const Eigen::VectorXd& pi, const StateSpace& space) {
  const Eigen::VectorXd conn = marginal(pi, space, Axis::kConnections);
  double mean = 0.0;
  for (int c = 1; c < conn.size(); ++c) mean += c * conn[c];
  return mean;
}

double average_queue_length(const Eigen::VectorXd& pi, const StateSpace& space) {
  const Eigen::VectorXd queue = marginal(pi, space, Axis::kQueue);
  double mean = 0.0;
  for (int x = 1; x < queue.size(); ++x) mean += x * queue[x];
  return mean;
}

DropStats dropping(const TransitionModel& model, const Eigen::VectorXd& pi) {
  const StateSpace& space = model.space();
  const int x_max = space.queue_capacity();
  DropStats stats;
  for (int i = 0; i < space.size(); ++i) {
    const double weight = pi[i];
    if (weight == 0.0) continue;
    const auto st = space.state(i);
    const QueueKernel& kernel = model.queue_kernel(st.c, st.phase);
    const int room = x_max - st.x;
    double expected_overflow = 0.0;
    for (int j = kernel.shift + room + 1; j < kernel.net_change.cols(); ++j)
      expected_overflow += kernel.net_change(st.x, j) * (j - kernel.shift - room);
    stats.n_drop += weight * expected_overflow;
  }
  const Eigen::VectorXd phase_law = stationary_phase_distribution(model.config().mmpp);
  const double rate_per_connection = mean_arrival_rate(phase_law, model.config().mmpp.arrival_rates);
  stats.lambda_bar = rate_per_connection * average_connections(pi, space);
  stats.p_drop = stats.lambda_bar > 0.0 ? stats.n_drop / stats.lambda_bar : 0.0;
  return stats;
}

std::pair<double, double> throughput_and_delay(double n_queue, double p_drop, double lambda_bar) {
  const double throughput = lambda_bar * (1.0 - p_drop);
  const double delay = throughput > 0.0 ? n_queue / throughput : 0.0;
  return {throughput, delay};
}

PerformanceReport compute_report(const TransitionModel& model, const SteadyState& steady) {
  const StateSpace& space = model.space();
  PerformanceReport report;
  report.p_block = blocking_probability(model, steady.pi);
  report.n_connections = average_connections(steady.pi, space);
  report.n_queue = average_queue_length(steady.pi, space);
  const DropStats drops = dropping(model, steady.pi);
  report.n_drop = drops.n_drop;
  report.p_drop = drops.p_drop;
  report.lambda_bar = drops.lambda_bar;
  std::tie(report.throughput, report.delay) =
      throughput_and_delay(report.n_queue, report.p_drop, report.lambda_bar);

  const Eigen::VectorXd& rates = model.config().mmpp.arrival_rates;
  for (int i = 0; i < space.size(); ++i) {
    const auto st = space.state(i);
    report.diagnostics.exact_arrival_rate += steady.pi[i] * st.c * rates[st.phase];
  }
  const Eigen::VectorXd queue_law = marginal(steady.pi, space, Axis::kQueue);
  report.diagnostics.exact_service_rate =
      queue_law.dot(model.expected_service_given_queue());
  report.diagnostics.residual = steady.residual;
  return report;
}

}  // namespace cacq
