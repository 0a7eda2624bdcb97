#include "cacq/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <stdexcept>
#include <vector>

#include "cacq/channel.hpp"
#include "cacq/mmpp.hpp"

namespace cacq {

namespace {

// inverse-CDF table; sampling uses only the uniform bits of the engine so a
// run is reproducible for a given seed
class Sampler {
 public:
  Sampler() = default;
  explicit Sampler(const Pmf& pmf) {
    cum_.resize(pmf.support_max() + 1);
    double acc = 0.0;
    for (int n = 0; n <= pmf.support_max(); ++n) {
      acc += pmf(n);
      cum_[n] = acc;
    }
    cum_.back() = 1.0;
  }

  int draw(double u) const {
    const auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
    return static_cast<int>(std::min<std::ptrdiff_t>(it - cum_.begin(), cum_.size() - 1));
  }

 private:
  std::vector<double> cum_;
};

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

struct BatchTally {
  std::int64_t frames = 0;
  std::int64_t arrived = 0, served = 0, dropped = 0;
  std::int64_t offered = 0, blocked = 0;
  double queue_sum = 0.0, conn_sum = 0.0;
  double delay_sum = 0.0;
  std::int64_t delay_count = 0;
};

MetricEstimate estimate(const std::vector<double>& values) {
  const int n = static_cast<int>(values.size());
  MetricEstimate est;
  for (double v : values) est.mean += v;
  est.mean /= n;
  if (n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - est.mean) * (v - est.mean);
    est.std_err = std::sqrt(ss / (n - 1) / n);
  }
  return est;
}

}  // namespace

SimResult run_simulation(const SystemConfig& config, const SimOptions& options) {
  validate(config);
  if (options.frames < 100) throw std::invalid_argument("simulate: frames must be >= 100");
  if (options.batch_count < 20) throw std::invalid_argument("simulate: batch_count must be >= 20");
  if (options.warmup_fraction < 0.0 || options.warmup_fraction >= 1.0)
    throw std::invalid_argument("simulate: warmup_fraction must lie in [0, 1)");

  const int phases = config.mmpp.phase_count();
  const int x_max = config.queue_capacity;
  const int bound = config.policy.connection_bound();

  const Eigen::MatrixXd phase_step = phase_step_matrix(config.mmpp, config.frame_minutes());
  std::vector<Sampler> phase_samplers(phases);
  for (int s = 0; s < phases; ++s) {
    Eigen::VectorXd row = phase_step.row(s);
    phase_samplers[s] = Sampler(Pmf(row / row.sum()));
  }
  const Sampler service_sampler{service_pmf(config.channel)};
  std::vector<Sampler> batch_samplers(std::size_t(bound + 1) * phases);
  for (int c = 0; c <= bound; ++c)
    for (int s = 0; s < phases; ++s)
      batch_samplers[std::size_t(c) * phases + s] =
          Sampler(batch_arrival_pmf(config.mmpp, c, s, config.max_batch));
  const Sampler conn_arrival_sampler{poisson_pmf_tail_folded(config.conn_arrival_mean(), 1e-12)};
  const double depart_prob = config.conn_depart_prob();
  std::vector<Sampler> departure_samplers(bound + 1);
  for (int c = 0; c <= bound; ++c) departure_samplers[c] = Sampler(binomial_pmf(c, depart_prob));

  std::FILE* trace = nullptr;
  if (!options.trace_path.empty()) {
    trace = std::fopen(options.trace_path.c_str(), "w");
    if (!trace) throw std::runtime_error("simulate: cannot open trace file " + options.trace_path);
    std::fputs("frame,s,x,c,arrivals,served,dropped\n", trace);
  }

  std::mt19937_64 rng(options.seed);
  const std::int64_t warmup =
      static_cast<std::int64_t>(static_cast<double>(options.frames) * options.warmup_fraction);
  const std::int64_t measured = options.frames - warmup;
  if (measured < options.batch_count)
    throw std::invalid_argument("simulate: too few frames for the requested batch count");
  const std::int64_t batch_len = measured / options.batch_count;

  std::vector<std::int64_t> fifo(x_max + 1);  // arrival frame per queued packet, ring buffer
  std::size_t head = 0, count = 0;
  auto fifo_push = [&](std::int64_t frame) {
    fifo[(head + count) % fifo.size()] = frame;
    ++count;
  };
  auto fifo_pop = [&]() {
    const std::int64_t v = fifo[head];
    head = (head + 1) % fifo.size();
    --count;
    return v;
  };

  SimResult result;
  result.seed = options.seed;
  result.frames_run = options.frames;

  std::vector<BatchTally> batches(options.batch_count);
  int s = 0, x = 0, c = 0;

  for (std::int64_t frame = 0; frame < options.frames; ++frame) {
    const int x_start = x;
    const int c_start = c;

    const int arrivals = batch_samplers[std::size_t(c) * phases + s].draw(uniform01(rng));
    const int service = service_sampler.draw(uniform01(rng));

    const int served = std::min(service, x);
    double delay_sum = 0.0;
    for (int k = 0; k < served; ++k) delay_sum += static_cast<double>(frame - fifo_pop());
    x -= served;
    const int admitted_packets = std::min(arrivals, x_max - x);
    const int dropped = arrivals - admitted_packets;
    for (int k = 0; k < admitted_packets; ++k) fifo_push(frame);
    x += admitted_packets;

    const int conn_offered = conn_arrival_sampler.draw(uniform01(rng));
    int accepted = 0;
    for (int k = 0; k < conn_offered; ++k) {
      const double u = uniform01(rng);
      if (c_start + accepted < bound && u < config.policy.alpha(x_start)) ++accepted;
    }
    const int departed = departure_samplers[c_start].draw(uniform01(rng));
    c = std::clamp(c_start + accepted - departed, 0, bound);

    s = phase_samplers[s].draw(uniform01(rng));

    result.packets_arrived += arrivals;
    result.packets_served += served;
    result.packets_dropped += dropped;
    result.connections_offered += conn_offered;
    result.connections_blocked += conn_offered - accepted;

    if (frame >= warmup) {
      const std::int64_t batch_idx = (frame - warmup) / batch_len;
      if (batch_idx < options.batch_count) {
        BatchTally& tally = batches[batch_idx];
        ++tally.frames;
        tally.arrived += arrivals;
        tally.served += served;
        tally.dropped += dropped;
        tally.offered += conn_offered;
        tally.blocked += conn_offered - accepted;
        tally.queue_sum += x;
        tally.conn_sum += c;
        tally.delay_sum += delay_sum;
        tally.delay_count += served;
      }
    }
    if (trace)
      std::fprintf(trace, "%lld,%d,%d,%d,%d,%d,%d\n", static_cast<long long>(frame), s, x, c,
                   arrivals, served, dropped);
  }
  if (trace) std::fclose(trace);
  result.final_backlog = x;

  const int nb = options.batch_count;
  std::vector<double> v(nb);
  auto collect = [&](auto per_batch) {
    for (int b = 0; b < nb; ++b) v[b] = per_batch(batches[b]);
    return estimate(v);
  };
  result.p_block = collect([](const BatchTally& t) {
    return t.offered > 0 ? static_cast<double>(t.blocked) / t.offered : 0.0;
  });
  result.n_connections = collect([](const BatchTally& t) { return t.conn_sum / t.frames; });
  result.n_queue = collect([](const BatchTally& t) { return t.queue_sum / t.frames; });
  result.n_drop = collect([](const BatchTally& t) {
    return static_cast<double>(t.dropped) / t.frames;
  });
  result.p_drop = collect([](const BatchTally& t) {
    return t.arrived > 0 ? static_cast<double>(t.dropped) / t.arrived : 0.0;
  });
  result.lambda_bar = collect([](const BatchTally& t) {
    return static_cast<double>(t.arrived) / t.frames;
  });
  result.throughput = collect([](const BatchTally& t) {
    return static_cast<double>(t.served) / t.frames;
  });
  result.delay = collect([](const BatchTally& t) {
    return t.delay_count > 0 ? t.delay_sum / t.delay_count : 0.0;
  });
  return result;
}

}  // namespace cacq
