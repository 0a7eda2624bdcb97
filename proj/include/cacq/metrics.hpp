#pragma once

#include <Eigen/Dense>

#include "cacq/chain.hpp"

namespace cacq {

struct Diagnostics {
  /// Phase-correlated packet arrival rate sum over states of c * rate(s).
  double exact_arrival_rate = 0.0;
  /// Stationary mean of min(service, backlog), packets per frame.
  double exact_service_rate = 0.0;
  double residual = 0.0;
};

/// Connection- and packet-level performance of one solved configuration.
struct PerformanceReport {
  double p_block = 0.0;       // connection blocking probability
  double n_connections = 0.0; // mean ongoing connections
  double n_queue = 0.0;       // mean queue length, packets
  double n_drop = 0.0;        // mean dropped packets per frame
  double p_drop = 0.0;        // packet dropping probability
  double lambda_bar = 0.0;    // mean packet arrivals per frame
  double throughput = 0.0;    // packets transmitted per frame
  double delay = 0.0;         // mean packet delay, frames
  Diagnostics diagnostics;
};

/// Stationary probability that an arriving connection is rejected
/// (policy rejection or truncation).
double blocking_probability(const TransitionModel& model, const Eigen::VectorXd& pi);

double average_connections(const Eigen::VectorXd& pi, const StateSpace& space);

double average_queue_length(const Eigen::VectorXd& pi, const StateSpace& space);

struct DropStats {
  double n_drop = 0.0;
  double p_drop = 0.0;
  double lambda_bar = 0.0;
};

/// Mean overflow drops per frame from the uncapped net-change law, the
/// arrival-rate product lambda_mmpp * n_connections, and their ratio.
DropStats dropping(const TransitionModel& model, const Eigen::VectorXd& pi);

/// throughput = lambda_bar * (1 - p_drop); delay = n_queue / throughput
/// (both 0 for an empty system).
std::pair<double, double> throughput_and_delay(double n_queue, double p_drop, double lambda_bar);

PerformanceReport compute_report(const TransitionModel& model, const SteadyState& steady);

}  // namespace cacq
