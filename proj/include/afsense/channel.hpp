// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "afsense/rng.hpp"
#include "afsense/types.hpp"

namespace afsense {

enum class ChannelKind { dense, sparse };

// Multipath channel impulse response: N complex tap gains. For sparse
// channels `support` lists the nonzero tap indices in increasing order and
// every nonzero magnitude lies in [0.2, 1.0]; for dense channels `support`
// is empty and total tap power is normalized to 1.
struct ChannelImpulseResponse {
  Vec taps;
  ChannelKind kind = ChannelKind::dense;
  std::vector<Index> support;

  Index length() const { return taps.size(); }
};

// Per-channel SNR. Infinite SNR is an explicit flag, never a sentinel value.
struct ChannelSnr {
  bool noiseless = false;
  double snr_db = 0.0;

  static ChannelSnr off() { return {true, 0.0}; }
  static ChannelSnr db(double v) { return {false, v}; }
};

// Noise statistics for the relay link (realizations live in LinkObservation).
// snr1 governs the primary->relay hop, snr3 the relay->cognitive hop, snr2
// the direct primary->cognitive path that is generated but never estimated
// from.
struct NoiseSpec {
  ChannelSnr snr1;
  ChannelSnr snr2;
  ChannelSnr snr3;

  static NoiseSpec noiseless() {
    return {ChannelSnr::off(), ChannelSnr::off(), ChannelSnr::off()};
  }
  static NoiseSpec uniform_db(double v) {
    return {ChannelSnr::db(v), ChannelSnr::db(v), ChannelSnr::db(v)};
  }
};

// Gaussian taps with per-tap power profile exp(-decay_rate * i), total power
// normalized to exactly 1. decay_rate = 0 gives a flat profile.
ChannelImpulseResponse generate_dense_channel(Index n_taps, double decay_rate,
                                              RandomStream& rng,
                                              Field field = Field::real);

// Exactly n_nonzero taps: head_count support indices drawn uniformly without
// replacement from [0, head_region), the rest from [head_region, n_taps).
// Nonzero amplitudes are uniform on [-1,-0.2] U [0.2,1] (uniform sign,
// magnitude uniform on [0.2,1]; in complex mode the sign becomes a uniform
// phase).
ChannelImpulseResponse generate_sparse_channel(Index n_taps, Index n_nonzero,
                                               Index head_region,
                                               Index head_count,
                                               RandomStream& rng,
                                               Field field = Field::real);

// i.i.d. zero-mean Gaussian vector with per-sample variance E|n_i|^2 =
// `variance`; circularly symmetric in complex mode.
Vec sample_awgn(Index length, double variance, RandomStream& rng,
                Field field = Field::real);

// Noise variance that realizes snr_db against the mean per-sample power of
// `signal`.
double snr_to_noise_variance(const Vec& signal, double snr_db);

}  // namespace afsense
