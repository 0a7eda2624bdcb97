#include "cacq/channel.hpp"

#include <cmath>
#include <stdexcept>

#include "cacq/numeric.hpp"

namespace cacq {

namespace {

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

// CDF of the per-subchannel SNR: Gamma with shape m and mean snr_linear.
double snr_cdf(double gamma_linear, double mean_linear, double m) {
  if (gamma_linear <= 0.0) return 0.0;
  if (std::isinf(gamma_linear)) return 1.0;
  return gamma_p(m, m * gamma_linear / mean_linear);
}

}  // namespace

void validate(const ChannelParams& params) {
  if (params.subchannel_count < 1)
    throw std::invalid_argument("channel: subchannel_count must be >= 1");
  if (params.nakagami_m < 0.5) throw std::invalid_argument("channel: nakagami_m must be >= 0.5");
  if (params.rate_table.empty()) throw std::invalid_argument("channel: rate_table empty");
  if (!std::isinf(params.rate_table.front().snr_threshold_db) ||
      params.rate_table.front().snr_threshold_db > 0.0)
    throw std::invalid_argument("channel: first rate_table threshold must be -inf");
  for (std::size_t i = 0; i < params.rate_table.size(); ++i) {
    if (params.rate_table[i].packets_per_frame < 0)
      throw std::invalid_argument("channel: negative packets_per_frame");
    if (i > 0) {
      if (params.rate_table[i].snr_threshold_db <= params.rate_table[i - 1].snr_threshold_db)
        throw std::invalid_argument("channel: rate_table thresholds not strictly increasing");
      if (params.rate_table[i].packets_per_frame <= params.rate_table[i - 1].packets_per_frame)
        throw std::invalid_argument("channel: rate_table packet counts not strictly increasing");
    }
  }
}

Pmf subchannel_rate_pmf(const ChannelParams& params) {
  validate(params);
  const double mean_linear = db_to_linear(params.avg_snr_db);
  const std::size_t steps = params.rate_table.size();
  const int max_rate = params.rate_table.back().packets_per_frame;
  if (mean_linear == 0.0) return Pmf::point_mass(params.rate_table.front().packets_per_frame);
  Eigen::VectorXd p = Eigen::VectorXd::Zero(max_rate + 1);
  for (std::size_t i = 0; i < steps; ++i) {
    const double lo = i == 0 ? 0.0 : db_to_linear(params.rate_table[i].snr_threshold_db);
    const double hi = i + 1 < steps ? db_to_linear(params.rate_table[i + 1].snr_threshold_db)
                                    : std::numeric_limits<double>::infinity();
    const double mass = snr_cdf(hi, mean_linear, params.nakagami_m) -
                        snr_cdf(lo, mean_linear, params.nakagami_m);
    p[params.rate_table[i].packets_per_frame] += mass;
  }
  const double total = p.sum();
  if (total <= 0.0) throw std::runtime_error("channel: degenerate rate distribution");
  p /= total;
  return Pmf(std::move(p));
}

Pmf service_pmf(const ChannelParams& params) {
  const Pmf per_subchannel = subchannel_rate_pmf(params);
  return convolve_power(per_subchannel, params.subchannel_count);
}

}  // namespace cacq
