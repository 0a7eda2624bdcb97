#include "cacq/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <stdexcept>
#include <thread>

#include "cacq/config.hpp"
#include "cacq/svg.hpp"

namespace cacq {

std::string format_g12(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", value);
  return buf;
}

SweepResult run_sweep(const nlohmann::json& base_config, const SweepSpec& spec, int threads) {
  if (spec.steps < 2) throw std::invalid_argument("sweep: steps must be >= 2");
  if (!(spec.from < spec.to)) throw std::invalid_argument("sweep: from must be < to");
  if (spec.parameter_path.empty()) throw std::invalid_argument("sweep: parameter path required");

  std::vector<std::string> policies = spec.policies;
  if (policies.empty()) policies.push_back("");

  struct Task {
    double value;
    std::string policy;
  };
  std::vector<Task> tasks;
  for (int i = 0; i < spec.steps; ++i) {
    const double value = spec.from + (spec.to - spec.from) * i / (spec.steps - 1);
    for (const auto& policy : policies) tasks.push_back({value, policy});
  }

  SweepResult result;
  result.rows.resize(tasks.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> any_nonconverged{false};

  auto worker = [&]() {
    for (std::size_t i = next.fetch_add(1); i < tasks.size(); i = next.fetch_add(1)) {
      nlohmann::json doc = base_config;
      set_by_path(doc, spec.parameter_path, tasks[i].value);
      if (!tasks[i].policy.empty()) doc["policy"]["kind"] = tasks[i].policy;
      const SystemConfig config = config_from_json(doc);
      const TransitionModel model = TransitionModel::assemble(config);
      SweepRow row;
      row.sweep_value = tasks[i].value;
      row.policy = tasks[i].policy.empty() ? to_string(config.policy.kind()) : tasks[i].policy;
      try {
        const SteadyState steady = solve(model);
        row.report = compute_report(model, steady);
        row.converged = true;
      } catch (const ConvergenceError& e) {
        row.report = compute_report(model, e.last_state);
        row.converged = false;
        any_nonconverged = true;
      }
      result.rows[i] = std::move(row);
    }
  };

  const int worker_count = std::max(1, std::min<int>(threads, static_cast<int>(tasks.size())));
  if (worker_count == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(worker_count);
    for (int t = 0; t < worker_count; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  result.all_converged = !any_nonconverged.load();
  return result;
}

void write_sweep_csv(const SweepResult& result, std::ostream& out) {
  out << "sweep_value,policy,p_block,n_connections,n_queue,p_drop,throughput,delay,residual\n";
  for (const auto& row : result.rows) {
    const PerformanceReport& r = row.report;
    out << format_g12(row.sweep_value) << ',' << row.policy << ',' << format_g12(r.p_block)
        << ',' << format_g12(r.n_connections) << ',' << format_g12(r.n_queue) << ','
        << format_g12(r.p_drop) << ',' << format_g12(r.throughput) << ','
        << format_g12(r.delay) << ',' << format_g12(r.diagnostics.residual) << '\n';
  }
}

void write_sweep_svg_charts(const SweepResult& result, const SweepSpec& spec,
                            const std::string& directory) {
  struct Column {
    const char* name;
    double PerformanceReport::* field;
  };
  static constexpr Column kColumns[] = {
      {"p_block", &PerformanceReport::p_block},
      {"n_connections", &PerformanceReport::n_connections},
      {"n_queue", &PerformanceReport::n_queue},
      {"p_drop", &PerformanceReport::p_drop},
      {"throughput", &PerformanceReport::throughput},
      {"delay", &PerformanceReport::delay},
  };
  for (const auto& column : kColumns) {
    std::vector<SvgSeries> series;
    for (const auto& row : result.rows) {
      auto it = std::find_if(series.begin(), series.end(),
                             [&](const SvgSeries& s) { return s.name == row.policy; });
      if (it == series.end()) {
        series.push_back({row.policy, {}});
        it = series.end() - 1;
      }
      it->points.emplace_back(row.sweep_value, row.report.*column.field);
    }
    write_line_chart(directory + "/" + column.name + ".svg", column.name, spec.parameter_path,
                     column.name, series);
  }
}

}  // namespace cacq
