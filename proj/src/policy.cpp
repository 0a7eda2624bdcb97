#include "cacq/policy.hpp"

#include <stdexcept>

namespace cacq {

CacPolicy CacPolicy::threshold(int c_max) {
  if (c_max < 0) throw std::invalid_argument("policy: c_max must be >= 0");
  return CacPolicy(PolicyKind::kThreshold, c_max);
}

CacPolicy CacPolicy::queue_aware(int b_th, int c_trunc) {
  if (b_th < 0) throw std::invalid_argument("policy: b_th must be >= 0");
  if (c_trunc < 0) throw std::invalid_argument("policy: c_trunc must be >= 0");
  CacPolicy p(PolicyKind::kQueueAware, c_trunc);
  p.b_th_ = b_th;
  return p;
}

CacPolicy CacPolicy::queue_aware(Eigen::VectorXd alpha, int c_trunc) {
  if (c_trunc < 0) throw std::invalid_argument("policy: c_trunc must be >= 0");
  if ((alpha.array() < 0.0).any() || (alpha.array() > 1.0).any())
    throw std::invalid_argument("policy: alpha entries must lie in [0,1]");
  CacPolicy p(PolicyKind::kQueueAware, c_trunc);
  p.alpha_ = std::move(alpha);
  return p;
}

CacPolicy CacPolicy::unrestricted(int c_trunc) {
  if (c_trunc < 0) throw std::invalid_argument("policy: c_trunc must be >= 0");
  return CacPolicy(PolicyKind::kUnrestricted, c_trunc);
}

double CacPolicy::alpha(int queue_len) const {
  if (queue_len < 0) throw std::out_of_range("policy: negative queue length");
  if (kind_ != PolicyKind::kQueueAware) return 1.0;
  if (alpha_.size() > 0) {
    if (queue_len >= alpha_.size()) throw std::out_of_range("policy: queue length beyond alpha curve");
    return alpha_[queue_len];
  }
  return queue_len < b_th_ ? 1.0 : 0.0;
}

double CacPolicy::acceptance_probability(int queue_len, int connections) const {
  if (connections < 0 || connections > bound_)
    throw std::out_of_range("policy: connection count out of range");
  if (connections == bound_) return 0.0;
  return alpha(queue_len);
}

const char* to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::kThreshold: return "threshold";
    case PolicyKind::kQueueAware: return "queue_aware";
    case PolicyKind::kUnrestricted: return "unrestricted";
  }
  return "unknown";
}

}  // namespace cacq
