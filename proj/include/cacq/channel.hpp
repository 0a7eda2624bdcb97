#pragma once

#include <limits>
#include <vector>

#include "cacq/pmf.hpp"

namespace cacq {

/// One adaptive modulation-and-coding step: the rate used when the
/// instantaneous subchannel SNR is at or above the threshold (and below the
/// next step's threshold).
struct RateStep {
  double snr_threshold_db = -std::numeric_limits<double>::infinity();
  int packets_per_frame = 0;
};

/// Per-frame service capacity model for the subchannels allocated to one
/// subscriber station. Subchannels fade independently with identical
/// Nakagami-m statistics around a common average SNR; the rate table maps
/// instantaneous SNR to packets carried per frame.
struct ChannelParams {
  int subchannel_count = 1;
  double avg_snr_db = 0.0;
  double nakagami_m = 1.0;  // 1 = Rayleigh
  std::vector<RateStep> rate_table;
};

void validate(const ChannelParams& params);

/// Distribution of packets per frame carried by a single subchannel: the
/// probability of each rate step is the Gamma-distributed SNR mass between
/// its threshold and the next.
Pmf subchannel_rate_pmf(const ChannelParams& params);

/// Total packets per frame across all subchannels (independent fading):
/// subchannel_count-fold convolution of subchannel_rate_pmf.
Pmf service_pmf(const ChannelParams& params);

}  // namespace cacq
