#pragma once

#include <Eigen/Dense>

namespace cacq {

/// Probability mass function on {0, 1, ..., support_max()}.
/// Entries are nonnegative and sum to 1 within 1e-12.
class Pmf {
 public:
  Pmf() : p_(Eigen::VectorXd::Ones(1)) {}
  explicit Pmf(Eigen::VectorXd probabilities);

  static Pmf point_mass(int value);

  int support_max() const { return static_cast<int>(p_.size()) - 1; }
  double operator()(int n) const { return (n >= 0 && n <= support_max()) ? p_[n] : 0.0; }
  const Eigen::VectorXd& probabilities() const { return p_; }

  double mean() const;
  double total() const { return p_.sum(); }

 private:
  Eigen::VectorXd p_;
};

/// Convolution of two pmfs (distribution of the sum of independent draws).
Pmf convolve(const Pmf& a, const Pmf& b);

/// n-fold convolution of a pmf with itself.
Pmf convolve_power(const Pmf& a, int n);

/// Poisson(mean) restricted to {0..truncation}; the upper tail mass is folded
/// into the truncation bin so the result sums to exactly 1.
Pmf poisson_pmf(double mean, int truncation);

/// Poisson(mean) folded at the smallest point whose upper tail is < tail_tol.
Pmf poisson_pmf_tail_folded(double mean, double tail_tol = 1e-12);

/// Binomial(n, p) on {0..n}.
Pmf binomial_pmf(int n, double p);

}  // namespace cacq
