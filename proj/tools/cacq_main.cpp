#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "cacq/compare.hpp"
#include "cacq/config.hpp"
#include "cacq/metrics.hpp"
#include "cacq/simulate.hpp"
#include "cacq/sweep.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitNoConvergence = 2;
constexpr int kExitMismatch = 3;

int thread_budget() {
  if (const char* env = std::getenv("CAC_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void print_report(const cacq::PerformanceReport& report) {
  const auto line = [](const char* name, double value) {
    std::printf("%-14s = %.12g\n", name, value);
  };
  line("p_block", report.p_block);
  line("n_connections", report.n_connections);
  line("n_queue", report.n_queue);
  line("n_drop", report.n_drop);
  line("p_drop", report.p_drop);
  line("lambda_bar", report.lambda_bar);
  line("throughput", report.throughput);
  line("delay", report.delay);
  line("exact_arrivals", report.diagnostics.exact_arrival_rate);
  line("exact_service", report.diagnostics.exact_service_rate);
}

void write_report_csv(const cacq::PerformanceReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file " + path);
  out << "p_block,n_connections,n_queue,n_drop,p_drop,lambda_bar,throughput,delay,residual\n";
  using cacq::format_g12;
  out << format_g12(report.p_block) << ',' << format_g12(report.n_connections) << ','
      << format_g12(report.n_queue) << ',' << format_g12(report.n_drop) << ','
      << format_g12(report.p_drop) << ',' << format_g12(report.lambda_bar) << ','
      << format_g12(report.throughput) << ',' << format_g12(report.delay) << ','
      << format_g12(report.diagnostics.residual) << '\n';
}

int run_solve(const std::string& config_path, const std::string& csv_path,
              const std::string& dump_path) {
  const nlohmann::json doc = cacq::load_json_file(config_path);
  const cacq::SystemConfig config = cacq::config_from_json(doc);
  if (!dump_path.empty()) {
    std::ofstream out(dump_path);
    out << cacq::config_to_json(config).dump(2) << '\n';
  }
  const auto t0 = std::chrono::steady_clock::now();
  const cacq::TransitionModel model = cacq::TransitionModel::assemble(config);
  cacq::SteadyState steady;
  bool converged = true;
  try {
    steady = cacq::solve(model);
  } catch (const cacq::ConvergenceError& e) {
    steady = e.last_state;
    converged = false;
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const cacq::PerformanceReport report = cacq::compute_report(model, steady);
  print_report(report);
  std::printf("%-14s = %.12g\n", "residual", steady.residual);
  std::printf("%-14s = %s/%d sweeps\n", "solver", steady.method.c_str(), steady.sweeps_used);
  std::printf("%-14s = %.3f s\n", "wall_time", seconds);
  if (!csv_path.empty()) write_report_csv(report, csv_path);
  if (!converged) {
    std::fprintf(stderr, "solver did not converge: last residual %.3e\n", steady.residual);
    return kExitNoConvergence;
  }
  return kExitOk;
}

int run_sweep_cmd(const std::string& config_path, const cacq::SweepSpec& spec,
                  const std::string& output_path, const std::string& svg_dir) {
  const nlohmann::json doc = cacq::load_json_file(config_path);
  cacq::config_from_json(doc);  // validate the base document before spawning workers
  const cacq::SweepResult result = cacq::run_sweep(doc, spec, thread_budget());
  std::ofstream out(output_path);
  if (!out) throw std::runtime_error("cannot open output file " + output_path);
  cacq::write_sweep_csv(result, out);
  if (!svg_dir.empty()) cacq::write_sweep_svg_charts(result, spec, svg_dir);
  if (!result.all_converged) {
    for (const auto& row : result.rows)
      if (!row.converged)
        std::fprintf(stderr, "warning: %s=%.6g policy=%s did not converge (residual %.3e)\n",
                     spec.parameter_path.c_str(), row.sweep_value, row.policy.c_str(),
                     row.report.diagnostics.residual);
    return kExitNoConvergence;
  }
  return kExitOk;
}

int run_simulate(const std::string& config_path, std::int64_t frames, std::uint64_t seed,
                 const std::string& trace_path) {
  const cacq::SystemConfig config = cacq::load_config(config_path);
  cacq::SimOptions options;
  options.frames = frames;
  options.seed = seed;
  options.trace_path = trace_path;
  const cacq::SimResult sim = cacq::run_simulation(config, options);
  const auto line = [](const char* name, const cacq::MetricEstimate& est) {
    std::printf("%-14s = %.12g (se %.3g)\n", name, est.mean, est.std_err);
  };
  line("p_block", sim.p_block);
  line("n_connections", sim.n_connections);
  line("n_queue", sim.n_queue);
  line("n_drop", sim.n_drop);
  line("p_drop", sim.p_drop);
  line("lambda_bar", sim.lambda_bar);
  line("throughput", sim.throughput);
  line("delay", sim.delay);
  std::printf("%-14s = %lld\n", "frames", static_cast<long long>(sim.frames_run));
  std::printf("%-14s = %llu\n", "seed", static_cast<unsigned long long>(sim.seed));
  return kExitOk;
}

int run_compare(const std::string& config_path, std::int64_t frames, std::uint64_t seed,
                double perturb) {
  const cacq::SystemConfig config = cacq::load_config(config_path);
  const cacq::TransitionModel model = cacq::TransitionModel::assemble(config);
  const cacq::SteadyState steady = cacq::solve(model);
  cacq::PerformanceReport report = cacq::compute_report(model, steady);
  if (perturb != 0.0) {  // fault-injection hook used by the test suite
    const double f = 1.0 + perturb;
    report.p_block *= f;
    report.n_connections *= f;
    report.n_queue *= f;
    report.n_drop *= f;
    report.p_drop *= f;
    report.lambda_bar *= f;
    report.throughput *= f;
    report.delay *= f;
  }
  cacq::SimOptions options;
  options.frames = frames;
  options.seed = seed;
  const cacq::SimResult sim = cacq::run_simulation(config, options);
  const auto rows = cacq::compare_metrics(report, sim);
  std::printf("%-14s %16s %16s %12s %8s\n", "metric", "analytic", "simulated", "std_err", "|z|");
  for (const auto& row : rows)
    std::printf("%-14s %16.8g %16.8g %12.4g %8.3f\n", row.metric.c_str(), row.analytic,
                row.simulated, row.std_err, std::abs(row.z));
  if (!cacq::all_within(rows)) {
    std::fprintf(stderr, "analytical and simulated metrics disagree beyond 3 standard errors\n");
    return kExitMismatch;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Uplink-queue admission-control performance model"};
  app.require_subcommand(1);

  std::string config_path, output_path, svg_dir, trace_path, dump_path, csv_path;
  std::int64_t frames = 1000000;
  std::uint64_t seed = 1;
  double perturb = 0.0;
  cacq::SweepSpec spec;
  std::string policies_csv;

  auto* solve_cmd = app.add_subcommand("solve", "solve one configuration");
  solve_cmd->add_option("-c,--config", config_path, "configuration file")->required();
  solve_cmd->add_option("-o,--output", csv_path, "write a single-row CSV");
  solve_cmd->add_option("--dump-config", dump_path, "write the effective configuration");

  auto* sweep_cmd = app.add_subcommand("sweep", "evaluate a parameter grid");
  sweep_cmd->add_option("-c,--config", config_path, "configuration file")->required();
  sweep_cmd->add_option("--param", spec.parameter_path, "dotted config key")->required();
  sweep_cmd->add_option("--from", spec.from, "grid start")->required();
  sweep_cmd->add_option("--to", spec.to, "grid end")->required();
  sweep_cmd->add_option("--steps", spec.steps, "grid points")->required();
  sweep_cmd->add_option("--policies", policies_csv, "comma-separated policy kinds");
  sweep_cmd->add_option("-o,--output", output_path, "CSV output")->required();
  sweep_cmd->add_option("--svg", svg_dir, "also write SVG charts to this directory");

  auto* sim_cmd = app.add_subcommand("simulate", "stochastic frame-by-frame run");
  sim_cmd->add_option("-c,--config", config_path, "configuration file")->required();
  sim_cmd->add_option("--frames", frames, "frames to run (>= 10000)")->required();
  sim_cmd->add_option("--seed", seed, "random seed")->required();
  sim_cmd->add_option("--trace", trace_path, "per-frame CSV trace");

  auto* compare_cmd = app.add_subcommand("compare", "analytical vs simulated metrics");
  compare_cmd->add_option("-c,--config", config_path, "configuration file")->required();
  compare_cmd->add_option("--frames", frames, "frames to run (>= 10000)")->required();
  compare_cmd->add_option("--seed", seed, "random seed")->required();
  compare_cmd->add_option("--perturb", perturb, "")->group("");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(solve_cmd)) return run_solve(config_path, csv_path, dump_path);
    if (app.got_subcommand(sweep_cmd)) {
      if (!policies_csv.empty()) {
        std::size_t start = 0;
        while (start <= policies_csv.size()) {
          const std::size_t comma = policies_csv.find(',', start);
          spec.policies.push_back(policies_csv.substr(start, comma - start));
          if (comma == std::string::npos) break;
          start = comma + 1;
        }
      }
      return run_sweep_cmd(config_path, spec, output_path, svg_dir);
    }
    if (app.got_subcommand(sim_cmd) || app.got_subcommand(compare_cmd)) {
      if (frames < 10000) {
        std::fprintf(stderr, "frames must be >= 10000\n");
        return kExitConfig;
      }
      return app.got_subcommand(sim_cmd) ? run_simulate(config_path, frames, seed, trace_path)
                                         : run_compare(config_path, frames, seed, perturb);
    }
  } catch (const cacq::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const cacq::ConvergenceError& e) {
    std::fprintf(stderr, "no convergence: residual %.3e\n", e.last_state.residual);
    return kExitNoConvergence;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  }
  return kExitOk;
}
