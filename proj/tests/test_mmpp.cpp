#include "cacq/mmpp.hpp"

#include <cmath>
#include <doctest.h>
#include <random>

using cacq::MmppParams;

namespace {

MmppParams two_phase(double a, double b, double l1, double l2) {
  MmppParams p;
  p.generator = Eigen::MatrixXd(2, 2);
  p.generator << -a, a, b, -b;
  p.arrival_rates = Eigen::VectorXd(2);
  p.arrival_rates << l1, l2;
  return p;
}

MmppParams random_params(std::mt19937& rng, int phases) {
  std::uniform_real_distribution<double> rate(0.1, 2.0);
  MmppParams p;
  p.generator = Eigen::MatrixXd::Zero(phases, phases);
  p.arrival_rates = Eigen::VectorXd::Zero(phases);
  for (int i = 0; i < phases; ++i) {
    for (int j = 0; j < phases; ++j)
      if (i != j) p.generator(i, j) = rate(rng);
    p.generator(i, i) = -p.generator.row(i).sum();
    p.arrival_rates[i] = rate(rng);
  }
  return p;
}

}  // namespace

TEST_CASE("stationary phase distribution closed forms") {
  const Eigen::VectorXd pi = stationary_phase_distribution(two_phase(1.0, 3.0, 0, 0));
  CHECK(pi[0] == doctest::Approx(0.75).epsilon(1e-13));
  CHECK(pi[1] == doctest::Approx(0.25).epsilon(1e-13));

  MmppParams single;
  single.generator = Eigen::MatrixXd::Zero(1, 1);
  single.arrival_rates = Eigen::VectorXd::Zero(1);
  CHECK(stationary_phase_distribution(single)[0] == 1.0);

  MmppParams sym;
  sym.generator = Eigen::MatrixXd::Constant(4, 4, 0.7);
  sym.generator.diagonal().setConstant(-2.1);
  sym.arrival_rates = Eigen::VectorXd::Ones(4);
  const Eigen::VectorXd uniform = stationary_phase_distribution(sym);
  for (int i = 0; i < 4; ++i) CHECK(uniform[i] == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("stationary distribution solves the balance equations") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const MmppParams p = random_params(rng, 2 + trial % 4);
    const Eigen::VectorXd pi = stationary_phase_distribution(p);
    CHECK((pi.transpose() * p.generator).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(pi.sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(pi.minCoeff() > 0.0);
  }
}

TEST_CASE("reducible generator is rejected") {
  MmppParams p;
  p.generator = Eigen::MatrixXd::Zero(2, 2);  // two isolated phases
  p.arrival_rates = Eigen::VectorXd::Ones(2);
  CHECK_THROWS_WITH_AS(stationary_phase_distribution(p),
                       "mmpp: phase chain not irreducible", std::invalid_argument);
}

TEST_CASE("mean arrival rate") {
  Eigen::VectorXd pi(2), rates(2);
  pi << 0.75, 0.25;
  rates << 4, 8;
  CHECK(cacq::mean_arrival_rate(pi, rates) == doctest::Approx(5.0).epsilon(1e-14));

  Eigen::VectorXd uniform = Eigen::VectorXd::Constant(4, 0.25);
  Eigen::VectorXd table(4);
  table << 5, 3, 15, 1;
  CHECK(cacq::mean_arrival_rate(uniform, table) == doctest::Approx(6.0).epsilon(1e-14));

  Eigen::VectorXd one(1), zero(1);
  one << 1.0;
  zero << 0.0;
  CHECK(cacq::mean_arrival_rate(one, zero) == 0.0);
  CHECK_THROWS_AS(cacq::mean_arrival_rate(pi, table), std::invalid_argument);
}

TEST_CASE("phase step matrix closed forms") {
  MmppParams still;
  still.generator = Eigen::MatrixXd::Zero(1, 1);
  still.arrival_rates = Eigen::VectorXd::Zero(1);
  CHECK(phase_step_matrix(still, 2.0)(0, 0) == 1.0);

  // symmetric 2-state chain: exp has entries (1 +- e^{-2at})/2
  const MmppParams p = two_phase(1.0, 1.0, 0, 0);
  const Eigen::MatrixXd h = phase_step_matrix(p, 1.0);
  const double off = 0.5 - 0.5 * std::exp(-2.0);
  CHECK(h(0, 1) == doctest::Approx(off).epsilon(1e-12));
  CHECK(h(1, 0) == doctest::Approx(off).epsilon(1e-12));
  CHECK(h(0, 0) == doctest::Approx(1.0 - off).epsilon(1e-12));
}

TEST_CASE("phase step rows are stochastic and form a semigroup") {
  std::mt19937 rng(21);
  std::uniform_real_distribution<double> span(0.05, 3.0);
  for (int trial = 0; trial < 15; ++trial) {
    const MmppParams p = random_params(rng, 2 + trial % 3);
    const double t1 = span(rng), t2 = span(rng);
    const Eigen::MatrixXd a = phase_step_matrix(p, t1);
    const Eigen::MatrixXd b = phase_step_matrix(p, t2);
    const Eigen::MatrixXd ab = phase_step_matrix(p, t1 + t2);
    for (int i = 0; i < a.rows(); ++i) CHECK(std::abs(a.row(i).sum() - 1.0) < 1e-12);
    CHECK(((a * b) - ab).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("batch arrivals") {
  MmppParams p = two_phase(1.0, 1.0, 1.0, 5.0);

  CHECK(batch_arrival_pmf(p, 0, 0, 10)(0) == 1.0);

  const double e2 = std::exp(-2.0);
  const cacq::Pmf batch = batch_arrival_pmf(p, 2, 0, 3);  // mean 2, folded at 3
  CHECK(batch(0) == doctest::Approx(0.13534).epsilon(1e-4));
  CHECK(batch(1) == doctest::Approx(0.27067).epsilon(1e-4));
  CHECK(batch(2) == doctest::Approx(2 * e2).epsilon(1e-13));
  CHECK(batch(3) == doctest::Approx(1 - 5 * e2).epsilon(1e-13));

  // far-from-the-fold entries match the untruncated series
  const cacq::Pmf wide = batch_arrival_pmf(p, 1, 1, 50);
  double term = std::exp(-5.0);
  for (int n = 0; n <= 30; ++n) {
    CHECK(std::abs(wide(n) - term) < 1e-12);
    term *= 5.0 / (n + 1);
  }
}

TEST_CASE("single-phase batches degenerate to plain poisson") {
  MmppParams p;
  p.generator = Eigen::MatrixXd::Zero(1, 1);
  p.arrival_rates = Eigen::VectorXd::Constant(1, 1.3);
  for (int c = 0; c <= 4; ++c) {
    const cacq::Pmf batch = batch_arrival_pmf(p, c, 0, 12);
    const cacq::Pmf plain = cacq::poisson_pmf(1.3 * c, 12);
    for (int n = 0; n <= 12; ++n) CHECK(batch(n) == doctest::Approx(plain(n)).epsilon(1e-14));
  }
}
