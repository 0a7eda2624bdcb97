// Acceptance suite: each test case evaluates one release criterion and
// prints a single PASS/FAIL line.

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <doctest.h>
#include <random>
#include <vector>

#include "cacq/compare.hpp"
#include "cacq/config.hpp"
#include "cacq/metrics.hpp"
#include "cacq/simulate.hpp"
#include "cacq/sweep.hpp"
#include "oracles.hpp"

using namespace cacq;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const std::string kConfigDir = CACQ_CONFIG_DIR;
const std::string kCli = CACQ_CLI_PATH;

void criterion(int id, const char* name, bool ok) {
  std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", id, name);
  std::fflush(stdout);
  CHECK_MESSAGE(ok, "criterion ", id, " (", name, ")");
}

SystemConfig random_config(std::mt19937& rng) {
  std::uniform_int_distribution<int> phases(1, 4), capacity(1, 30), bound(0, 5), subch(1, 3);
  std::uniform_real_distribution<double> rate(0.05, 2.0), snr(-3.0, 15.0);
  SystemConfig config;
  const int s = phases(rng);
  config.mmpp.generator = Eigen::MatrixXd::Zero(s, s);
  config.mmpp.arrival_rates = Eigen::VectorXd::Zero(s);
  for (int i = 0; i < s; ++i) {
    for (int j = 0; j < s; ++j)
      if (i != j) config.mmpp.generator(i, j) = rate(rng);
    config.mmpp.generator(i, i) = -config.mmpp.generator.row(i).sum();
    config.mmpp.arrival_rates[i] = rate(rng);
  }
  config.channel.subchannel_count = subch(rng);
  config.channel.avg_snr_db = snr(rng);
  config.channel.nakagami_m = 0.5 + rate(rng);
  config.channel.rate_table = {{-kInf, 0}, {0.0, 1}, {9.0, 2}};
  config.queue_capacity = capacity(rng);
  config.max_batch = 1 + capacity(rng) / 2;
  const int b = bound(rng);
  switch (rng() % 3) {
    case 0: config.policy = CacPolicy::threshold(b); break;
    case 1:
      config.policy = CacPolicy::queue_aware(
          std::uniform_int_distribution<int>(0, config.queue_capacity + 1)(rng), b);
      break;
    default: config.policy = CacPolicy::unrestricted(b); break;
  }
  config.conn_arrival_per_min = rate(rng);
  config.conn_mean_duration_min = 0.5 + rate(rng);
  config.frame_duration_ms = 1000.0 * rate(rng);
  return config;
}

SystemConfig erlang_config(int c_max) {
  SystemConfig config;
  config.mmpp.generator = Eigen::MatrixXd::Zero(1, 1);
  config.mmpp.arrival_rates = Eigen::VectorXd::Constant(1, 0.2);
  config.channel.subchannel_count = 1;
  config.channel.avg_snr_db = 8.0;
  config.channel.rate_table = {{-kInf, 0}, {0.0, 1}};
  config.policy = CacPolicy::threshold(c_max);
  config.queue_capacity = 8;
  config.max_batch = 8;
  config.conn_arrival_per_min = 0.8;
  config.conn_mean_duration_min = 20.0;  // offered load 16 connections
  config.frame_duration_ms = 46.875;     // connection events ~1e-3 per frame
  return config;
}

double flow_imbalance(const TransitionModel& model, const SteadyState& steady,
                      const PerformanceReport& report) {
  double inflow = 0.0;
  for (int i = 0; i < model.space().size(); ++i) {
    const auto st = model.space().state(i);
    inflow += steady.pi[i] * model.batch_mean(st.c, st.phase);
  }
  return std::abs(inflow - report.n_drop - report.diagnostics.exact_service_rate);
}

bool nonincreasing(const std::vector<double>& v, double slack = 1e-12) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[i - 1] + slack) return false;
  return true;
}

bool nondecreasing(const std::vector<double>& v, double slack = 1e-12) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] < v[i - 1] - slack) return false;
  return true;
}

std::vector<double> column(const SweepResult& result, const std::string& policy,
                           double PerformanceReport::* field) {
  std::vector<double> out;
  for (const auto& row : result.rows)
    if (row.policy == policy) out.push_back(row.report.*field);
  return out;
}

}  // namespace

TEST_CASE("criterion 1: stochasticity") {
  std::mt19937 rng(20250810);
  bool ok = true;
  std::vector<std::pair<int, double>> entries;
  for (int trial = 0; trial < 50 && ok; ++trial) {
    const SystemConfig config = random_config(rng);
    const TransitionModel model = TransitionModel::assemble(config);
    const StateSpace& space = model.space();
    // factor distributions
    for (int s = 0; s < space.phases(); ++s)
      ok &= std::abs(model.phase_step().row(s).sum() - 1.0) < 1e-12;
    ok &= std::abs(model.service().total() - 1.0) < 1e-12;
    for (int c = 0; c <= space.connection_bound(); ++c) {
      for (int s = 0; s < space.phases(); ++s) {
        const QueueKernel& kernel = model.queue_kernel(c, s);
        for (int x = 0; x <= space.queue_capacity(); ++x) {
          ok &= std::abs(kernel.next.row(x).sum() - 1.0) < 1e-12;
          ok &= std::abs(kernel.net_change.row(x).sum() - 1.0) < 1e-12;
          ok &= kernel.next.row(x).minCoeff() >= 0.0;
        }
      }
      for (int x = 0; x <= space.queue_capacity(); ++x)
        ok &= std::abs(model.connection_kernel(c).row(x).sum() - 1.0) < 1e-12;
    }
    // assembled rows
    for (int i = 0; i < space.size(); ++i) {
      model.row(i, entries);
      double sum = 0.0;
      for (const auto& [j, v] : entries) {
        sum += v;
        ok &= v >= 0.0;
      }
      ok &= std::abs(sum - 1.0) < 1e-12;
    }
  }
  criterion(1, "row and factor distributions are stochastic to 1e-12", ok);
}

TEST_CASE("criterion 2: solver contract") {
  bool ok = true;

  Eigen::MatrixXd swap(2, 2), biased(2, 2);
  swap << 0, 1, 1, 0;
  biased << 0.9, 0.1, 0.2, 0.8;
  const Eigen::VectorXd pi_swap = dense_stationary(swap);
  const Eigen::VectorXd pi_biased = dense_stationary(biased);
  ok &= std::abs(pi_swap[0] - 0.5) < 1e-12 && std::abs(pi_swap[1] - 0.5) < 1e-12;
  ok &= std::abs(pi_biased[0] - 2.0 / 3.0) < 1e-12 && std::abs(pi_biased[1] - 1.0 / 3.0) < 1e-12;

  const SystemConfig toy = load_config(kConfigDir + "/toy.json");
  const TransitionModel model = TransitionModel::assemble(toy);
  for (auto method : {SolverOptions::Method::kDirect, SolverOptions::Method::kAggregated,
                      SolverOptions::Method::kPower}) {
    SolverOptions options = toy.solver;
    options.method = method;
    options.tolerance = 1e-10;
    const SteadyState steady = solve(model, options);
    ok &= steady.converged && steady.residual <= 1e-10;
    ok &= model.residual_l1(steady.pi) <= 1e-10;
  }
  std::mt19937 rng(77);
  for (int trial = 0; trial < 10; ++trial) {
    const SystemConfig config = random_config(rng);
    const TransitionModel m = TransitionModel::assemble(config);
    const SteadyState steady = solve(m);
    ok &= steady.residual <= 1e-10;
  }
  criterion(2, "stationary residual at tolerance; 2-state closed forms to 1e-12", ok);
}

TEST_CASE("criterion 3: erlang oracle at 16 erlangs") {
  bool ok = true;
  for (int c_max : {10, 16, 25}) {
    const SystemConfig config = erlang_config(c_max);
    const TransitionModel model = TransitionModel::assemble(config);
    const SteadyState steady = solve(model);
    const Eigen::VectorXd conn = marginal(steady.pi, model.space(), Axis::kConnections);
    const double tv = oracle::tv_distance(conn, oracle::truncated_poisson(16.0, c_max));
    const double p_block = blocking_probability(model, steady.pi);
    const double reference = oracle::erlang_b(c_max, 16.0);
    const double rel = std::abs(p_block - reference) / reference;
    ok &= tv < 1e-4;
    ok &= rel < 1e-3;
    std::printf("  c_max=%d tv=%.3e erlang_b rel=%.3e\n", c_max, tv, rel);
  }
  criterion(3, "connection marginal ~ truncated Poisson(16); blocking ~ Erlang-B", ok);
}

TEST_CASE("criterion 4: policy equivalence") {
  std::mt19937 rng(4242);
  bool ok = true;
  for (int trial = 0; trial < 10; ++trial) {
    SystemConfig config = random_config(rng);
    config.queue_capacity = std::min(config.queue_capacity, 12);
    const int c = 1 + static_cast<int>(rng() % 5);
    SystemConfig as_threshold = config, as_queue_aware = config;
    as_threshold.policy = CacPolicy::threshold(c);
    as_queue_aware.policy = CacPolicy::queue_aware(config.queue_capacity + 1, c);
    const TransitionModel mt = TransitionModel::assemble(as_threshold);
    const TransitionModel mq = TransitionModel::assemble(as_queue_aware);
    ok &= (mt.dense() - mq.dense()).cwiseAbs().maxCoeff() <= 1e-14;
    const PerformanceReport rt = compute_report(mt, solve(mt));
    const PerformanceReport rq = compute_report(mq, solve(mq));
    for (auto field : {&PerformanceReport::p_block, &PerformanceReport::n_connections,
                       &PerformanceReport::n_queue, &PerformanceReport::n_drop,
                       &PerformanceReport::p_drop, &PerformanceReport::lambda_bar,
                       &PerformanceReport::throughput, &PerformanceReport::delay})
      ok &= std::abs(rt.*field - rq.*field) <= 1e-10;
  }
  criterion(4, "open-gate queue-aware policy reproduces threshold metrics", ok);
}

TEST_CASE("criterion 5: poisson degeneration") {
  SystemConfig config;
  config.mmpp.generator = Eigen::MatrixXd::Zero(1, 1);
  config.mmpp.arrival_rates = Eigen::VectorXd::Constant(1, 0.8);
  config.channel.subchannel_count = 2;
  config.channel.avg_snr_db = 6.0;
  config.channel.rate_table = {{-kInf, 0}, {0.0, 1}, {9.0, 2}};
  config.policy = CacPolicy::threshold(3);
  config.queue_capacity = 10;
  config.max_batch = 9;
  config.conn_arrival_per_min = 0.6;
  config.conn_mean_duration_min = 2.0;
  config.frame_duration_ms = 500.0;

  const TransitionModel model = TransitionModel::assemble(config);
  const PerformanceReport lib = compute_report(model, solve(model));

  // independent poisson-batch model over (x, c), assembled by exhaustive
  // enumeration of service, batch, connection arrivals and departures
  const int x_max = config.queue_capacity, c_max = 3, a_max = config.max_batch;
  const double lambda = 0.8;
  const double arrival_mean = config.conn_arrival_mean();
  const double depart_prob = config.conn_depart_prob();
  const Pmf service = service_pmf(config.channel);

  const auto poisson_fold = [](double mean, int cap) {
    std::vector<double> p(cap + 1, 0.0);
    double cum = 0.0, term = std::exp(-mean);
    for (int n = 0; n < cap; ++n) {
      p[n] = term;
      cum += term;
      term *= mean / (n + 1);
    }
    p[cap] = 1.0 - cum;
    return p;
  };
  const auto poisson_fold_tol = [&](double mean, double tol) {
    int cap = 0;
    double cum = std::exp(-mean), term = cum;
    while (1.0 - cum >= tol) {
      ++cap;
      term *= mean / cap;
      cum += term;
    }
    return poisson_fold(mean, cap);
  };
  const auto binom = [](int n, double p) {
    std::vector<double> out(n + 1);
    for (int k = 0; k <= n; ++k)
      out[k] = std::exp(std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1)) *
               std::pow(p, k) * std::pow(1.0 - p, n - k);
    return out;
  };

  const int states = (x_max + 1) * (c_max + 1);
  const auto idx = [&](int x, int c) { return c * (x_max + 1) + x; };
  Eigen::MatrixXd p_ind = Eigen::MatrixXd::Zero(states, states);
  const std::vector<double> arrivals = poisson_fold_tol(arrival_mean, 1e-12);
  for (int c = 0; c <= c_max; ++c) {
    const std::vector<double> batch = poisson_fold(c * lambda, a_max);
    const std::vector<double> departures = binom(c, depart_prob);
    for (int x = 0; x <= x_max; ++x) {
      for (int r = 0; r <= service.support_max(); ++r) {
        for (int a = 0; a <= a_max; ++a) {
          const int x_next = std::min(x_max, x - std::min(r, x) + a);
          const double p_queue = service(r) * batch[a];
          if (p_queue == 0.0) continue;
          for (std::size_t n = 0; n < arrivals.size(); ++n) {
            const int accepted = std::min<int>(static_cast<int>(n), c_max - c);
            for (int d = 0; d <= c; ++d)
              p_ind(idx(x, c), idx(x_next, c + accepted - d)) +=
                  p_queue * arrivals[n] * departures[d];
          }
        }
      }
    }
  }
  const Eigen::VectorXd pi = dense_stationary(p_ind);
  double p_block = 0.0, n_conn = 0.0, n_queue = 0.0, n_drop = 0.0;
  for (int c = 0; c <= c_max; ++c) {
    const std::vector<double> batch = poisson_fold(c * lambda, a_max);
    for (int x = 0; x <= x_max; ++x) {
      const double w = pi[idx(x, c)];
      if (c == c_max) p_block += w;
      n_conn += w * c;
      n_queue += w * x;
      for (int r = 0; r <= service.support_max(); ++r)
        for (int a = 0; a <= a_max; ++a)
          n_drop += w * service(r) * batch[a] * std::max(0, x - std::min(r, x) + a - x_max);
    }
  }
  const double lambda_bar = lambda * n_conn;
  const double p_drop = lambda_bar > 0 ? n_drop / lambda_bar : 0.0;
  const double throughput = lambda_bar * (1.0 - p_drop);
  const double delay = throughput > 0 ? n_queue / throughput : 0.0;

  bool ok = true;
  ok &= std::abs(lib.p_block - p_block) < 1e-10;
  ok &= std::abs(lib.n_connections - n_conn) < 1e-10;
  ok &= std::abs(lib.n_queue - n_queue) < 1e-10;
  ok &= std::abs(lib.n_drop - n_drop) < 1e-10;
  ok &= std::abs(lib.p_drop - p_drop) < 1e-10;
  ok &= std::abs(lib.lambda_bar - lambda_bar) < 1e-10;
  ok &= std::abs(lib.throughput - throughput) < 1e-10;
  ok &= std::abs(lib.delay - delay) < 1e-10;
  criterion(5, "single-phase metrics equal an independent poisson-batch model", ok);
}

TEST_CASE("criterion 6: simulator agreement on the toy system") {
  const SystemConfig config = load_config(kConfigDir + "/toy.json");
  const TransitionModel model = TransitionModel::assemble(config);
  const PerformanceReport report = compute_report(model, solve(model));
  SimOptions options;
  options.frames = 1000000;
  options.seed = 20250810;
  const SimResult sim = run_simulation(config, options);
  const auto rows = compare_metrics(report, sim);
  bool ok = true;
  for (const auto& row : rows) {
    std::printf("  %-14s analytic %.6g sim %.6g +- %.2g  z=%.2f\n", row.metric.c_str(),
                row.analytic, row.simulated, row.std_err, row.z);
    ok &= std::abs(row.z) <= 3.0;
  }
  const int exit_code = std::system(
      (kCli + " compare -c " + kConfigDir + "/toy.json --frames 1000000 --seed 20250810 > /dev/null")
          .c_str());
  ok &= WEXITSTATUS(exit_code) == 0;
  criterion(6, "all metrics within 3 standard errors of a 1e6-frame simulation", ok);
}

TEST_CASE("criterion 7: flow balance") {
  bool ok = true;
  const auto check_config = [&](const SystemConfig& config) {
    const TransitionModel model = TransitionModel::assemble(config);
    const SteadyState steady = solve(model);
    const PerformanceReport report = compute_report(model, steady);
    ok &= flow_imbalance(model, steady, report) < 1e-8;
    ok &= std::abs(report.lambda_bar - (report.throughput + report.n_drop)) < 1e-12;
  };
  check_config(load_config(kConfigDir + "/toy.json"));
  for (int c_max : {10, 16, 25}) check_config(erlang_config(c_max));
  std::mt19937 rng(123);
  for (int trial = 0; trial < 6; ++trial) check_config(random_config(rng));
  criterion(7, "stationary inflow minus drops equals service; lambda_bar = phi + n_drop", ok);
}

TEST_CASE("criterion 8: figure trends") {
  const nlohmann::json base = load_json_file(kConfigDir + "/toy.json");
  const std::vector<std::string> policies = {"threshold", "queue_aware", "unrestricted"};
  bool ok = true;

  SweepSpec load_spec;
  load_spec.parameter_path = "connections.arrival_rate_per_min";
  load_spec.from = 0.1;
  load_spec.to = 1.5;
  load_spec.steps = 8;
  load_spec.policies = policies;
  const SweepResult by_load = run_sweep(base, load_spec, 2);
  ok &= by_load.all_converged;
  for (const auto& policy : policies) {
    ok &= nondecreasing(column(by_load, policy, &PerformanceReport::p_block));
    ok &= nondecreasing(column(by_load, policy, &PerformanceReport::n_connections));
  }
  const auto unrestricted_nc = column(by_load, "unrestricted", &PerformanceReport::n_connections);
  for (const auto& policy : {std::string("threshold"), std::string("queue_aware")}) {
    const auto nc = column(by_load, policy, &PerformanceReport::n_connections);
    for (std::size_t i = 0; i < nc.size(); ++i) ok &= nc[i] <= unrestricted_nc[i] + 1e-12;
  }

  SweepSpec snr_spec;
  snr_spec.parameter_path = "channel.avg_snr_db";
  snr_spec.from = -2.0;
  snr_spec.to = 14.0;
  snr_spec.steps = 9;
  snr_spec.policies = policies;
  const SweepResult by_snr = run_sweep(base, snr_spec, 2);
  ok &= by_snr.all_converged;
  for (const auto& policy : policies) {
    ok &= nonincreasing(column(by_snr, policy, &PerformanceReport::p_drop));
    ok &= nonincreasing(column(by_snr, policy, &PerformanceReport::delay));
  }
  const auto threshold_block = column(by_snr, "threshold", &PerformanceReport::p_block);
  const auto [tb_min, tb_max] = std::minmax_element(threshold_block.begin(), threshold_block.end());
  ok &= (*tb_max - *tb_min) <= 1e-10;
  ok &= nonincreasing(column(by_snr, "queue_aware", &PerformanceReport::p_block));
  criterion(8, "load and SNR sweeps reproduce the reported qualitative trends", ok);
}

TEST_CASE("criterion 9: little's law cross-check") {
  const SystemConfig config = load_config(kConfigDir + "/toy.json");
  SimOptions options;
  options.frames = 1000000;
  options.seed = 31415;
  const SimResult sim = run_simulation(config, options);
  const double little = sim.n_queue.mean / sim.throughput.mean;
  const double rel = std::abs(sim.delay.mean - little) / little;
  std::printf("  simulated delay %.6g vs queue/throughput %.6g (rel %.3e)\n", sim.delay.mean,
              little, rel);
  criterion(9, "simulated delay within 5% of queue/throughput from the same run", rel < 0.05);
}
