#pragma once

#include <cstdint>
#include <string>

#include "cacq/chain.hpp"

namespace cacq {

struct MetricEstimate {
  double mean = 0.0;
  double std_err = 0.0;
};

struct SimOptions {
  std::int64_t frames = 0;
  std::uint64_t seed = 0;
  /// Fraction of frames discarded before statistics are collected.
  double warmup_fraction = 0.1;
  /// Batch-means batches for the standard errors (>= 20).
  int batch_count = 20;
  /// When set, a per-frame CSV trace (frame, s, x, c, arrivals, served,
  /// dropped) is written here.
  std::string trace_path;
};

/// Point estimates with batch-means standard errors, same metric set as
/// PerformanceReport, plus exact whole-run tallies.
struct SimResult {
  MetricEstimate p_block, n_connections, n_queue, n_drop, p_drop, lambda_bar, throughput, delay;
  std::int64_t frames_run = 0;
  std::uint64_t seed = 0;
  // whole-run packet accounting (warmup included)
  std::int64_t packets_arrived = 0;
  std::int64_t packets_served = 0;
  std::int64_t packets_dropped = 0;
  std::int64_t connections_offered = 0;
  std::int64_t connections_blocked = 0;
  int final_backlog = 0;
};

/// Frame-stepped stochastic run of the identical system dynamics
/// (serve-then-arrive, start-of-frame admission state). Deterministic for a
/// given seed.
SimResult run_simulation(const SystemConfig& config, const SimOptions& options);

}  // namespace cacq
