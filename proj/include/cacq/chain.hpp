#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cacq/channel.hpp"
#include "cacq/mmpp.hpp"
#include "cacq/pmf.hpp"
#include "cacq/policy.hpp"

namespace cacq {

struct SolverOptions {
  enum class Method { kAuto, kDirect, kAggregated, kPower };
  double tolerance = 1e-10;
  int max_sweeps = 200000;
  Method method = Method::kAuto;
  int dense_direct_limit = 2048;
  std::size_t memory_budget_mb = 2048;
};

SolverOptions::Method solver_method_from_string(const std::string& name);
const char* to_string(SolverOptions::Method method);

/// Full description of one subscriber-station uplink queue: traffic, channel,
/// admission rule, queue geometry, connection-level rates and frame length.
struct SystemConfig {
  MmppParams mmpp;
  ChannelParams channel;
  CacPolicy policy = CacPolicy::unrestricted(0);
  int queue_capacity = 1;             // X, packets
  int max_batch = 1;                  // aggregate packet arrivals folded here
  double conn_arrival_per_min = 0.0;  // connection arrival rate
  double conn_mean_duration_min = 1.0;
  double frame_duration_ms = 1.0;
  SolverOptions solver;

  double frame_minutes() const { return frame_duration_ms / 60000.0; }
  /// Mean connection arrivals per frame.
  double conn_arrival_mean() const { return conn_arrival_per_min * frame_minutes(); }
  /// Per-connection probability of departing within one frame.
  double conn_depart_prob() const {
    return -std::expm1(-frame_minutes() / conn_mean_duration_min);
  }
};

void validate(const SystemConfig& config);

/// Enumeration of states (phase, queue length, connections) with the layout
/// index = (c * (X + 1) + x) * S + phase; phase is 0-based and fastest.
class StateSpace {
 public:
  StateSpace(int phase_count, int queue_capacity, int connection_bound);

  int phases() const { return phases_; }
  int queue_capacity() const { return queue_capacity_; }
  int connection_bound() const { return connection_bound_; }
  int size() const { return size_; }

  int index(int phase, int x, int c) const {
    return (c * (queue_capacity_ + 1) + x) * phases_ + phase;
  }

  struct State {
    int phase, x, c;
  };
  State state(int index) const {
    const int phase = index % phases_;
    const int rest = index / phases_;
    return {phase, rest % (queue_capacity_ + 1), rest / (queue_capacity_ + 1)};
  }

 private:
  int phases_, queue_capacity_, connection_bound_;
  int size_;
};

/// One-frame queue update for a fixed (connections, phase) pair.
/// Within a frame the start-of-frame backlog is served first, then the
/// arrival batch is appended and overflow beyond the capacity is dropped.
struct QueueKernel {
  /// Row x = distribution of the next queue length, (X+1) x (X+1).
  Eigen::MatrixXd next;
  /// Row x, column j = probability that the uncapped net change
  /// a - min(R, x) equals j - shift; (X+1) x (shift + batch_max + 1).
  Eigen::MatrixXd net_change;
  int shift = 0;  // maximum service, so net change >= -shift
};

QueueKernel queue_transition_kernel(const Pmf& batch, const Pmf& service, int queue_capacity);

/// Distribution of the next-frame connection count from state (c, x):
/// Poisson(arrival_mean) arrivals, each accepted with the policy's
/// acceptance probability at the running count, minus binomial departures.
/// Support is {0..policy bound}.
Pmf connection_transition_pmf(const CacPolicy& policy, int connections, int queue_len,
                              double arrival_mean, double depart_prob);

class MemoryBudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The assembled per-frame transition operator in factored form:
/// P[(s,x,c) -> (s',x',c')] = phase_step(s,s') * queue_kernel(c,s)[x,x']
///                            * connection_kernel(c)[x, c'].
/// Rows are materialized on demand; the operator also applies matrix-free.
class TransitionModel {
 public:
  static TransitionModel assemble(const SystemConfig& config);

  const SystemConfig& config() const { return config_; }
  const StateSpace& space() const { return space_; }
  const Eigen::MatrixXd& phase_step() const { return phase_step_; }
  const Pmf& service() const { return service_; }
  const QueueKernel& queue_kernel(int c, int phase) const {
    return queue_kernels_[c * space_.phases() + phase];
  }
  /// Rows = queue length, columns = next connection count.
  const Eigen::MatrixXd& connection_kernel(int c) const { return conn_kernels_[c]; }

  /// Sparse row of the operator; targets are emitted in increasing order.
  void row(int source, std::vector<std::pair<int, double>>& out) const;

  /// pi -> pi P, matrix-free.
  Eigen::VectorXd apply(const Eigen::VectorXd& pi) const;
  /// L1 norm of pi P - pi.
  double residual_l1(const Eigen::VectorXd& pi) const;

  Eigen::MatrixXd dense() const;
  std::size_t sparse_bytes_estimate() const;
  /// Explicit row-major storage; throws MemoryBudgetError (advising the
  /// matrix-free interface) if the estimate exceeds the budget.
  Eigen::SparseMatrix<double, Eigen::RowMajor> to_sparse(std::size_t budget_bytes) const;

  /// E[min(R, x)] for each start-of-frame queue length x.
  const Eigen::VectorXd& expected_service_given_queue() const { return expected_service_; }
  /// Mean of the folded arrival batch for (c, phase).
  double batch_mean(int c, int phase) const { return batch_means_(c, phase); }

 private:
  TransitionModel(SystemConfig config, StateSpace space)
      : config_(std::move(config)), space_(space) {}

  SystemConfig config_;
  StateSpace space_;
  Eigen::MatrixXd phase_step_;
  Pmf service_;
  std::vector<QueueKernel> queue_kernels_;    // index c * S + phase
  std::vector<Eigen::MatrixXd> conn_kernels_; // index c
  Eigen::VectorXd expected_service_;
  Eigen::MatrixXd batch_means_;               // (bound+1) x S
};

struct SteadyState {
  Eigen::VectorXd pi;
  double residual = 0.0;
  int sweeps_used = 0;
  bool converged = false;
  std::string method;
};

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(SteadyState state, const std::string& message)
      : std::runtime_error(message), last_state(std::move(state)) {}
  SteadyState last_state;
};

/// Stationary distribution of the assembled chain with L1 residual at or
/// below the configured tolerance. Throws ConvergenceError (carrying the
/// last iterate) when max_sweeps is exhausted.
SteadyState solve(const TransitionModel& model);
SteadyState solve(const TransitionModel& model, const SolverOptions& options);

/// Stationary vector of an explicit row-stochastic matrix (direct solve).
Eigen::VectorXd dense_stationary(const Eigen::MatrixXd& p);

enum class Axis { kPhase, kQueue, kConnections };

Eigen::VectorXd marginal(const Eigen::VectorXd& pi, const StateSpace& space, Axis axis);

}  // namespace cacq
