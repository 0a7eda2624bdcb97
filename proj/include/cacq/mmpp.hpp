#pragma once

#include <Eigen/Dense>

#include "cacq/pmf.hpp"

namespace cacq {

/// Markov-modulated Poisson packet arrival process. Each phase of an
/// irreducible continuous-time chain selects a per-connection Poisson
/// packet rate.
struct MmppParams {
  /// Phase transition rate matrix, 1/minute. Off-diagonal entries are
  /// nonnegative, rows sum to zero.
  Eigen::MatrixXd generator;
  /// Per-phase packet arrival rate, packets per frame per connection.
  Eigen::VectorXd arrival_rates;

  int phase_count() const { return static_cast<int>(arrival_rates.size()); }
};

/// Throws std::invalid_argument if the parameters violate an invariant
/// (shape mismatch, negative rates, nonzero row sums, reducible phase chain).
void validate(const MmppParams& params);

/// True iff the directed graph of positive off-diagonal rates is a single
/// communicating class.
bool is_irreducible(const Eigen::MatrixXd& generator);

/// Stationary distribution of the phase chain: pi * generator = 0, sum(pi) = 1.
Eigen::VectorXd stationary_phase_distribution(const MmppParams& params);

/// Dot product pi . rates: the long-run packet rate per connection.
double mean_arrival_rate(const Eigen::VectorXd& pi, const Eigen::VectorXd& rates);

/// One-frame phase transition probabilities exp(generator * frame_minutes),
/// computed by uniformization (truncation tail < 1e-14) with scaling and
/// squaring; rows sum to 1 within 1e-12.
Eigen::MatrixXd phase_step_matrix(const MmppParams& params, double frame_minutes);

/// Aggregate packet arrivals in one frame from `connections` identical
/// connections in the given phase (0-based): Poisson with mean
/// connections * rate, folded into the max_batch bin.
Pmf batch_arrival_pmf(const MmppParams& params, int connections, int phase, int max_batch);

}  // namespace cacq
