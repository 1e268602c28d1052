// SPDX-License-Identifier: Apache-2.0

#include "afsense/signal.hpp"

#include <cmath>

namespace afsense {

ConvolutionMatrix::ConvolutionMatrix(Vec generator, Index n_cols,
                                     MatrixMode mode)
    : generator_(std::move(generator)), n_cols_(n_cols), mode_(mode) {
  if (generator_.size() == 0)
    throw InvalidArgument("ConvolutionMatrix: empty generator");
  if (n_cols_ < 1)
    throw InvalidArgument("ConvolutionMatrix: n_cols must be >= 1");
  rows_ = mode_ == MatrixMode::truncated ? generator_.size()
                                         : generator_.size() + n_cols_ - 1;
}

Complex ConvolutionMatrix::entry(Index i, Index j) const {
  const Index k = i - j;
  if (k < 0 || k >= generator_.size()) return Complex(0.0, 0.0);
  return generator_[k];
}

Mat ConvolutionMatrix::dense() const {
  Mat m = Mat::Zero(rows_, n_cols_);
  const Index len = generator_.size();
  for (Index j = 0; j < n_cols_; ++j) {
    const Index lo = j;
    const Index hi = std::min(rows_, j + len);
    for (Index i = lo; i < hi; ++i) m(i, j) = generator_[i - j];
  }
  return m;
}

Vec ConvolutionMatrix::apply(const Vec& v) const {
  if (v.size() != n_cols_)
    throw InvalidArgument("ConvolutionMatrix::apply: size mismatch");
  Vec out = Vec::Zero(rows_);
  const Index len = generator_.size();
  for (Index j = 0; j < n_cols_; ++j) {
    const Complex vj = v[j];
    if (vj == Complex(0.0, 0.0)) continue;
    const Index hi = std::min(rows_, j + len);
    for (Index i = j; i < hi; ++i) out[i] += generator_[i - j] * vj;
  }
  return out;
}

ConvolutionMatrix build_convolution_matrix(Vec generator, Index n_cols,
                                           MatrixMode mode) {
  return ConvolutionMatrix(std::move(generator), n_cols, mode);
}

Vec convolve(const Vec& a, const Vec& b) {
  if (a.size() == 0 || b.size() == 0)
    throw InvalidArgument("convolve: empty input");
  Vec out = Vec::Zero(a.size() + b.size() - 1);
  for (Index i = 0; i < a.size(); ++i)
    for (Index j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

TrainingSignal make_training_signal(Index length, TrainingScheme scheme,
                                    RandomStream* rng) {
  if (length < 1)
    throw InvalidArgument("make_training_signal: length must be >= 1");

  TrainingSignal sig;
  sig.scheme = scheme;
  switch (scheme) {
    case TrainingScheme::ramp: {
      sig.samples.resize(length);
      for (Index i = 0; i < length; ++i)
        sig.samples[i] = Complex(static_cast<double>(i + 1), 0.0);
      const double mean_power =
          sig.samples.squaredNorm() / static_cast<double>(length);
      sig.samples /= std::sqrt(mean_power);
      break;
    }
    case TrainingScheme::bpsk: {
      if (rng == nullptr)
        throw InvalidArgument("make_training_signal: bpsk requires an rng");
      sig.samples.resize(length);
      for (Index i = 0; i < length; ++i)
        sig.samples[i] = Complex(rng->uniform01() < 0.5 ? -1.0 : 1.0, 0.0);
      break;
    }
    case TrainingScheme::custom:
      throw InvalidArgument(
          "make_training_signal: use custom_training_signal for custom samples");
  }
  return sig;
}

TrainingSignal custom_training_signal(Vec samples) {
  if (samples.size() == 0)
    throw InvalidArgument("custom_training_signal: empty samples");
  if (samples.squaredNorm() == 0.0)
    throw InvalidArgument("custom_training_signal: all-zero samples");
  TrainingSignal sig;
  sig.samples = std::move(samples);
  sig.scheme = TrainingScheme::custom;
  return sig;
}

LinkObservation simulate_link(const TrainingSignal& x,
                              const ChannelImpulseResponse& h1,
                              const ChannelImpulseResponse& h2,
                              const ChannelImpulseResponse& h3,
                              const NoiseSpec& noise, double relay_gain,
                              std::pair<MatrixMode, MatrixMode> matrix_modes,
                              RandomStream& rng, Field field) {
  const Index n = h1.length();
  if (h3.length() != n || h2.length() != n)
    throw InvalidArgument("simulate_link: channel lengths differ");
  if (x.length() < 1) throw InvalidArgument("simulate_link: empty training signal");
  if (!(relay_gain > 0.0))
    throw InvalidArgument("simulate_link: relay_gain must be positive");

  LinkObservation obs;
  obs.relay_gain = relay_gain;
  obs.x_mode = matrix_modes.first;
  obs.h3_mode = matrix_modes.second;

  // Primary -> relay hop.
  const ConvolutionMatrix X(x.samples, n, matrix_modes.first);
  const Vec y_clean = X.apply(h1.taps);
  if (noise.snr1.noiseless) {
    obs.n1 = Vec::Zero(y_clean.size());
  } else {
    obs.n1 = sample_awgn(y_clean.size(),
                         snr_to_noise_variance(y_clean, noise.snr1.snr_db), rng,
                         field);
  }
  obs.y = y_clean + obs.n1;

  // Relay -> cognitive hop; the relay amplifies signal and noise alike.
  const ConvolutionMatrix H3(h3.taps, obs.y.size(), matrix_modes.second);
  const Vec z_clean = H3.apply(relay_gain * obs.y);
  if (noise.snr3.noiseless) {
    obs.n3 = Vec::Zero(z_clean.size());
  } else {
    obs.n3 = sample_awgn(z_clean.size(),
                         snr_to_noise_variance(z_clean, noise.snr3.snr_db), rng,
                         field);
  }
  obs.z = z_clean + obs.n3;

  // Direct primary -> cognitive path. Generated for completeness; nothing
  // downstream estimates from it.
  const Vec direct_clean = convolve(x.samples, h2.taps);
  if (noise.snr2.noiseless) {
    obs.n_direct = Vec::Zero(direct_clean.size());
  } else {
    obs.n_direct = sample_awgn(
        direct_clean.size(), snr_to_noise_variance(direct_clean, noise.snr2.snr_db),
        rng, field);
  }
  obs.direct = direct_clean + obs.n_direct;

  return obs;
}

}  // namespace afsense
