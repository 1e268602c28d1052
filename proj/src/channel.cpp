// SPDX-License-Identifier: Apache-2.0

#include "afsense/channel.hpp"

#include <algorithm>
#include <cmath>

namespace afsense {

std::vector<Index> RandomStream::sample_without_replacement(Index lo, Index hi,
                                                            Index k) {
  if (lo > hi || k > hi - lo || k < 0)
    throw InvalidArgument("sample_without_replacement: infeasible range");
  // Floyd's algorithm: k draws regardless of range width.
  std::vector<Index> picked;
  picked.reserve(static_cast<std::size_t>(k));
  for (Index j = hi - k; j < hi; ++j) {
    const Index t = lo + static_cast<Index>(
                             uniform_index(static_cast<std::uint64_t>(j - lo + 1)));
    if (std::find(picked.begin(), picked.end(), t) != picked.end())
      picked.push_back(j);
    else
      picked.push_back(t);
  }
  std::sort(picked.begin(), picked.end());
  return picked;
}

ChannelImpulseResponse generate_dense_channel(Index n_taps, double decay_rate,
                                              RandomStream& rng, Field field) {
  if (n_taps < 1)
    throw InvalidArgument("generate_dense_channel: n_taps must be >= 1");
  if (!(decay_rate >= 0.0) || !std::isfinite(decay_rate))
    throw InvalidArgument("generate_dense_channel: decay_rate must be >= 0");

  Vec taps(n_taps);
  for (Index i = 0; i < n_taps; ++i) {
    const double scale = std::sqrt(std::exp(-decay_rate * static_cast<double>(i)));
    if (field == Field::real) {
      taps[i] = Complex(scale * rng.normal(), 0.0);
    } else {
      taps[i] = scale * M_SQRT1_2 * Complex(rng.normal(), rng.normal());
    }
  }
  const double power = taps.squaredNorm();
  if (power > 0.0) taps /= std::sqrt(power);

  ChannelImpulseResponse cir;
  cir.taps = std::move(taps);
  cir.kind = ChannelKind::dense;
  return cir;
}

ChannelImpulseResponse generate_sparse_channel(Index n_taps, Index n_nonzero,
                                               Index head_region,
                                               Index head_count,
                                               RandomStream& rng, Field field) {
  if (n_taps < 1 || n_nonzero < 1)
    throw InvalidArgument("generate_sparse_channel: counts must be positive");
  if (n_nonzero > n_taps)
    throw InvalidArgument("generate_sparse_channel: n_nonzero exceeds n_taps");
  if (head_region < 1 || head_region > n_taps)
    throw InvalidArgument("generate_sparse_channel: head_region out of range");
  if (head_count < 0 || head_count > head_region || head_count > n_nonzero)
    throw InvalidArgument("generate_sparse_channel: infeasible head_count");
  if (n_nonzero - head_count > n_taps - head_region)
    throw InvalidArgument(
        "generate_sparse_channel: tail cannot hold n_nonzero - head_count taps");

  std::vector<Index> support = rng.sample_without_replacement(0, head_region, head_count);
  std::vector<Index> tail =
      rng.sample_without_replacement(head_region, n_taps, n_nonzero - head_count);
  support.insert(support.end(), tail.begin(), tail.end());
  std::sort(support.begin(), support.end());

  Vec taps = Vec::Zero(n_taps);
  for (Index idx : support) {
    const double magnitude = rng.uniform(0.2, 1.0);
    if (field == Field::real) {
      const double sign = rng.uniform01() < 0.5 ? -1.0 : 1.0;
      taps[idx] = Complex(sign * magnitude, 0.0);
    } else {
      const double phase = rng.uniform(0.0, 2.0 * M_PI);
      taps[idx] = magnitude * Complex(std::cos(phase), std::sin(phase));
    }
  }

  ChannelImpulseResponse cir;
  cir.taps = std::move(taps);
  cir.kind = ChannelKind::sparse;
  cir.support = std::move(support);
  return cir;
}

Vec sample_awgn(Index length, double variance, RandomStream& rng, Field field) {
  if (length < 1) throw InvalidArgument("sample_awgn: length must be >= 1");
  if (!(variance >= 0.0))
    throw InvalidArgument("sample_awgn: variance must be >= 0");

  Vec noise(length);
  if (variance == 0.0) {
    noise.setZero();
    return noise;
  }
  if (field == Field::real) {
    const double sigma = std::sqrt(variance);
    for (Index i = 0; i < length; ++i) noise[i] = Complex(sigma * rng.normal(), 0.0);
  } else {
    const double sigma = std::sqrt(variance / 2.0);
    for (Index i = 0; i < length; ++i)
      noise[i] = Complex(sigma * rng.normal(), sigma * rng.normal());
  }
  return noise;
}

double snr_to_noise_variance(const Vec& signal, double snr_db) {
  if (signal.size() == 0)
    throw InvalidArgument("snr_to_noise_variance: empty signal");
  if (!std::isfinite(snr_db))
    throw InvalidArgument("snr_to_noise_variance: snr_db must be finite");
  const double mean_power = signal.squaredNorm() / static_cast<double>(signal.size());
  if (mean_power == 0.0)
    throw DegenerateInput("snr_to_noise_variance: all-zero signal with finite SNR");
  return mean_power / std::pow(10.0, snr_db / 10.0);
}

}  // namespace afsense
