#include "cacq/pmf.hpp"

#include <cmath>
#include <stdexcept>

namespace cacq {

Pmf::Pmf(Eigen::VectorXd probabilities) : p_(std::move(probabilities)) {
  if (p_.size() == 0) throw std::invalid_argument("pmf: empty support");
  if ((p_.array() < -1e-15).any()) throw std::invalid_argument("pmf: negative entry");
  p_ = p_.cwiseMax(0.0);
  if (std::abs(p_.sum() - 1.0) > 1e-9) throw std::invalid_argument("pmf: entries do not sum to 1");
}

Pmf Pmf::point_mass(int value) {
  if (value < 0) throw std::invalid_argument("pmf: negative point mass");
  Eigen::VectorXd p = Eigen::VectorXd::Zero(value + 1);
  p[value] = 1.0;
  return Pmf(std::move(p));
}

double Pmf::mean() const {
  double m = 0.0;
  for (int n = 1; n <= support_max(); ++n) m += n * p_[n];
  return m;
}

Pmf convolve(const Pmf& a, const Pmf& b) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(a.support_max() + b.support_max() + 1);
  for (int i = 0; i <= a.support_max(); ++i) {
    const double pa = a(i);
    if (pa == 0.0) continue;
    for (int j = 0; j <= b.support_max(); ++j) out[i + j] += pa * b(j);
  }
  return Pmf(std::move(out));
}

Pmf convolve_power(const Pmf& a, int n) {
  if (n < 0) throw std::invalid_argument("convolve_power: negative count");
  Pmf acc = Pmf::point_mass(0);
  for (int k = 0; k < n; ++k) acc = convolve(acc, a);
  return acc;
}

Pmf poisson_pmf(double mean, int truncation) {
  if (mean < 0.0) throw std::invalid_argument("poisson_pmf: negative mean");
  if (truncation < 0) throw std::invalid_argument("poisson_pmf: negative truncation");
  Eigen::VectorXd p = Eigen::VectorXd::Zero(truncation + 1);
  double term = std::exp(-mean);
  double cum = 0.0;
  for (int n = 0; n < truncation; ++n) {
    p[n] = term;
    cum += term;
    term *= mean / (n + 1);
  }
  p[truncation] = std::max(0.0, 1.0 - cum);  // fold the upper tail
  return Pmf(std::move(p));
}

Pmf poisson_pmf_tail_folded(double mean, double tail_tol) {
  if (mean < 0.0) throw std::invalid_argument("poisson_pmf: negative mean");
  if (mean == 0.0) return Pmf::point_mass(0);
  double term = std::exp(-mean);
  double cum = term;
  int n = 0;
  // smallest n with P(N > n) < tail_tol; bounded in case of underflow
  const int hard_cap = static_cast<int>(mean + 40.0 * std::sqrt(mean + 1.0) + 64.0);
  while (1.0 - cum >= tail_tol && n < hard_cap) {
    ++n;
    term *= mean / n;
    cum += term;
  }
  return poisson_pmf(mean, n);
}

Pmf binomial_pmf(int n, double p) {
  if (n < 0) throw std::invalid_argument("binomial_pmf: negative n");
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("binomial_pmf: p outside [0,1]");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n + 1);
  if (p == 0.0) {
    out[0] = 1.0;
  } else if (p == 1.0) {
    out[n] = 1.0;
  } else if (p <= 0.5) {
    // forward recurrence from (1-p)^n, stable for p <= 1/2
    double term = std::pow(1.0 - p, n);
    const double r = p / (1.0 - p);
    for (int k = 0; k <= n; ++k) {
      out[k] = term;
      term *= r * (n - k) / (k + 1);
    }
  } else {
    double term = std::pow(p, n);
    const double r = (1.0 - p) / p;
    for (int k = n; k >= 0; --k) {
      out[k] = term;
      term *= r * k / (n - k + 1);
    }
  }
  out /= out.sum();  // renormalize accumulated rounding
  return Pmf(std::move(out));
}

}  // namespace cacq
