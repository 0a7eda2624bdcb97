#include "cacq/mmpp.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace cacq {

namespace {

// reachability of every node from node 0 along edges with positive rate
bool all_reachable(const Eigen::MatrixXd& g, bool transpose) {
  const int n = static_cast<int>(g.rows());
  std::vector<char> seen(n, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int count = 1;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (int v = 0; v < n; ++v) {
      if (v == u || seen[v]) continue;
      const double rate = transpose ? g(v, u) : g(u, v);
      if (rate > 0.0) {
        seen[v] = 1;
        ++count;
        stack.push_back(v);
      }
    }
  }
  return count == n;
}

}  // namespace

bool is_irreducible(const Eigen::MatrixXd& generator) {
  return all_reachable(generator, false) && all_reachable(generator, true);
}

void validate(const MmppParams& params) {
  const int s = params.phase_count();
  if (s < 1) throw std::invalid_argument("mmpp: at least one phase required");
  if (params.generator.rows() != s || params.generator.cols() != s)
    throw std::invalid_argument("mmpp: generator shape does not match arrival_rates");
  for (int i = 0; i < s; ++i) {
    double row_sum = 0.0;
    for (int j = 0; j < s; ++j) {
      if (i != j && params.generator(i, j) < 0.0)
        throw std::invalid_argument("mmpp: negative off-diagonal generator entry");
      row_sum += params.generator(i, j);
    }
    if (std::abs(row_sum) > 1e-9 * (1.0 + params.generator.row(i).cwiseAbs().maxCoeff()))
      throw std::invalid_argument("mmpp: generator row does not sum to zero");
  }
  if ((params.arrival_rates.array() < 0.0).any())
    throw std::invalid_argument("mmpp: negative arrival rate");
  if (!is_irreducible(params.generator))
    throw std::invalid_argument("mmpp: phase chain not irreducible");
}

Eigen::VectorXd stationary_phase_distribution(const MmppParams& params) {
  validate(params);
  const int s = params.phase_count();
  if (s == 1) return Eigen::VectorXd::Ones(1);
  // pi Q = 0 with sum(pi) = 1: replace the last balance equation by the
  // normalization row.
  Eigen::MatrixXd a = params.generator.transpose();
  a.row(s - 1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(s);
  b[s - 1] = 1.0;
  Eigen::VectorXd pi = a.fullPivLu().solve(b);
  if (!(a * pi - b).isZero(1e-9)) throw std::runtime_error("mmpp: stationary solve failed");
  return pi;
}

double mean_arrival_rate(const Eigen::VectorXd& pi, const Eigen::VectorXd& rates) {
  if (pi.size() != rates.size())
    throw std::invalid_argument("mean_arrival_rate: length mismatch");
  return pi.dot(rates);
}

Eigen::MatrixXd phase_step_matrix(const MmppParams& params, double frame_minutes) {
  validate(params);
  if (frame_minutes <= 0.0) throw std::invalid_argument("phase_step_matrix: frame_minutes <= 0");
  const int s = params.phase_count();
  const double unif_rate = params.generator.diagonal().cwiseAbs().maxCoeff();
  if (unif_rate == 0.0) return Eigen::MatrixXd::Identity(s, s);

  // scale so the uniformized jump count stays small, then square back
  double t = frame_minutes;
  int squarings = 0;
  while (unif_rate * t > 1.0) {
    t *= 0.5;
    ++squarings;
  }
  const double q = unif_rate * t;
  const Eigen::MatrixXd u =
      Eigen::MatrixXd::Identity(s, s) + params.generator * (t / q);  // uniformized kernel

  Eigen::MatrixXd result = Eigen::MatrixXd::Zero(s, s);
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(s, s);
  double weight = std::exp(-q);
  double cum = 0.0;
  for (int k = 0; cum < 1.0 - 1e-14 && k < 200; ++k) {
    result += weight * term;
    cum += weight;
    term = term * u;
    weight *= q / (k + 1);
  }
  for (int k = 0; k < squarings; ++k) result = result * result;
  return result;
}

Pmf batch_arrival_pmf(const MmppParams& params, int connections, int phase, int max_batch) {
  if (connections < 0) throw std::invalid_argument("batch_arrival_pmf: negative connections");
  if (phase < 0 || phase >= params.phase_count())
    throw std::invalid_argument("batch_arrival_pmf: phase out of range");
  if (max_batch < 0) throw std::invalid_argument("batch_arrival_pmf: negative max_batch");
  const double mean = connections * params.arrival_rates[phase];
  if (mean == 0.0) return Pmf::point_mass(0);
  return poisson_pmf(mean, max_batch);
}

}  // namespace cacq
