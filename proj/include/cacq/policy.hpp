#pragma once

#include <Eigen/Dense>

namespace cacq {

enum class PolicyKind { kThreshold, kQueueAware, kUnrestricted };

/// Connection admission rule. Answers one question: with what probability is
/// an arriving connection accepted when the queue holds x packets and c
/// connections are ongoing?
///
///   Threshold     — accept while fewer than c_max connections are ongoing.
///   QueueAware    — accept with probability alpha(x) while below c_trunc;
///                   alpha is a step function dropping to 0 at b_th, or an
///                   arbitrary per-queue-length acceptance curve.
///   Unrestricted  — accept while below the truncation bound c_trunc.
class CacPolicy {
 public:
  static CacPolicy threshold(int c_max);
  static CacPolicy queue_aware(int b_th, int c_trunc);
  static CacPolicy queue_aware(Eigen::VectorXd alpha, int c_trunc);
  static CacPolicy unrestricted(int c_trunc);

  PolicyKind kind() const { return kind_; }
  /// Hard upper bound on ongoing connections (c_max or c_trunc).
  int connection_bound() const { return bound_; }

  /// Queue-dependent acceptance factor in [0,1] (1 for non-queue-aware kinds).
  double alpha(int queue_len) const;

  /// Probability that one arriving connection is accepted in state (x, c).
  double acceptance_probability(int queue_len, int connections) const;

  /// Step position for step-function queue-aware policies, -1 otherwise.
  int b_th() const { return b_th_; }
  bool has_alpha_curve() const { return alpha_.size() > 0; }
  const Eigen::VectorXd& alpha_curve() const { return alpha_; }

 private:
  CacPolicy(PolicyKind kind, int bound) : kind_(kind), bound_(bound) {}

  PolicyKind kind_;
  int bound_;
  int b_th_ = -1;
  Eigen::VectorXd alpha_;
};

const char* to_string(PolicyKind kind);

}  // namespace cacq
