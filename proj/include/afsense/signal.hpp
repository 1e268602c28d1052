// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <utility>

#include "afsense/channel.hpp"
#include "afsense/rng.hpp"
#include "afsense/types.hpp"

namespace afsense {

enum class TrainingScheme { ramp, bpsk, custom };

// Known probe sequence of length M, unit mean power for ramp/bpsk.
struct TrainingSignal {
  Vec samples;
  TrainingScheme scheme = TrainingScheme::custom;

  Index length() const { return samples.size(); }
};

// truncated: rows = len(generator), keeping only the outputs that overlap the
//            generator window (an M x N system for an M-sample generator).
// full:      rows = len(generator) + n_cols - 1, the complete linear
//            convolution.
enum class MatrixMode { truncated, full };

// Toeplitz operator of a causal FIR sequence: entry (i, j) = generator(i - j),
// zero outside [0, len-1]. Immutable after construction; matrix-vector
// products equal direct linear convolution (truncated to the first
// len(generator) outputs in truncated mode).
class ConvolutionMatrix {
 public:
  ConvolutionMatrix(Vec generator, Index n_cols, MatrixMode mode);

  Index rows() const { return rows_; }
  Index cols() const { return n_cols_; }
  MatrixMode mode() const { return mode_; }
  const Vec& generator() const { return generator_; }

  Complex entry(Index i, Index j) const;
  Mat dense() const;
  Vec apply(const Vec& v) const;

 private:
  Vec generator_;
  Index n_cols_;
  Index rows_;
  MatrixMode mode_;
};

ConvolutionMatrix build_convolution_matrix(Vec generator, Index n_cols,
                                           MatrixMode mode);

// Full linear convolution of two sequences (length a + b - 1).
Vec convolve(const Vec& a, const Vec& b);

// One shot of the forward chain: y through CH1 at the relay, z through CH3 at
// the cognitive radio, plus the unused direct path through CH2.
struct LinkObservation {
  Vec y;       // received at the AF relay
  Vec z;       // received at the cognitive radio via the relay
  Vec direct;  // received at the cognitive radio via the direct path
  Vec n1;
  Vec n3;
  Vec n_direct;
  double relay_gain = 1.0;
  MatrixMode x_mode = MatrixMode::full;
  MatrixMode h3_mode = MatrixMode::full;
};

// ramp: [1, 2, ..., length] scaled to unit mean power (rng unused);
// bpsk: i.i.d. +/-1 (requires rng). Use custom_training_signal for
// caller-provided samples.
TrainingSignal make_training_signal(Index length, TrainingScheme scheme,
                                    RandomStream* rng = nullptr);

TrainingSignal custom_training_signal(Vec samples);

// y = X h1 + n1, z = H3 (relay_gain * y) + n3, direct = conv(x, h2) + n2.
// X is built from x in matrix_modes.first; H3 from h3 in matrix_modes.second
// with n_cols = len(y). Noise variances realize the per-channel SNRs against
// the clean signal entering each receiver.
LinkObservation simulate_link(const TrainingSignal& x,
                              const ChannelImpulseResponse& h1,
                              const ChannelImpulseResponse& h2,
                              const ChannelImpulseResponse& h3,
                              const NoiseSpec& noise, double relay_gain,
                              std::pair<MatrixMode, MatrixMode> matrix_modes,
                              RandomStream& rng, Field field = Field::real);

}  // namespace afsense
