// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "afsense/signal.hpp"

using namespace afsense;

namespace {

// Direct-convolution oracle, independent of ConvolutionMatrix.
Vec conv_oracle(const Vec& a, const Vec& b) {
  Vec out = Vec::Zero(a.size() + b.size() - 1);
  for (Index i = 0; i < a.size(); ++i)
    for (Index j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

Vec random_real_vec(RandomStream& rng, Index n) {
  Vec v(n);
  for (Index i = 0; i < n; ++i) v[i] = Complex(rng.normal(), 0.0);
  return v;
}

Vec random_complex_vec(RandomStream& rng, Index n) {
  Vec v(n);
  for (Index i = 0; i < n; ++i) v[i] = Complex(rng.normal(), rng.normal());
  return v;
}

ChannelImpulseResponse cir_from(const Vec& taps) {
  ChannelImpulseResponse c;
  c.taps = taps;
  c.kind = ChannelKind::dense;
  return c;
}

}  // namespace

TEST_SUITE_BEGIN("signal");

TEST_CASE("ramp training signal is the normalized consecutive sequence") {
  const auto sig = make_training_signal(3, TrainingScheme::ramp);
  REQUIRE(sig.length() == 3);
  // proportional to [1, 2, 3] with unit mean power
  const double scale = sig.samples[0].real();
  CHECK(sig.samples[1].real() == doctest::Approx(2.0 * scale));
  CHECK(sig.samples[2].real() == doctest::Approx(3.0 * scale));
  CHECK(sig.samples.squaredNorm() / 3.0 == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("ramp of length one") {
  const auto sig = make_training_signal(1, TrainingScheme::ramp);
  CHECK(sig.samples[0] == Complex(1.0, 0.0));
}

TEST_CASE("bpsk training signal uses the +/-1 alphabet") {
  RandomStream rng(21);
  const auto sig = make_training_signal(64, TrainingScheme::bpsk, &rng);
  bool saw_plus = false, saw_minus = false;
  for (Index i = 0; i < sig.length(); ++i) {
    const double re = sig.samples[i].real();
    CHECK((re == 1.0 || re == -1.0));
    CHECK(sig.samples[i].imag() == 0.0);
    (re > 0 ? saw_plus : saw_minus) = true;
  }
  CHECK(saw_plus);
  CHECK(saw_minus);
}

TEST_CASE("training signal argument errors") {
  RandomStream rng(22);
  CHECK_THROWS_AS(make_training_signal(0, TrainingScheme::ramp), InvalidArgument);
  CHECK_THROWS_AS(make_training_signal(4, TrainingScheme::bpsk, nullptr),
                  InvalidArgument);
  CHECK_THROWS_AS(custom_training_signal(Vec::Zero(3)), InvalidArgument);
}

TEST_CASE("one-element convolution matrix") {
  Vec g(1);
  g << Complex(5.0, 0.0);
  const auto m = build_convolution_matrix(g, 1, MatrixMode::truncated);
  CHECK(m.rows() == 1);
  CHECK(m.cols() == 1);
  CHECK(m.dense()(0, 0) == Complex(5.0, 0.0));
}

TEST_CASE("full mode reproduces the complete convolution stencil") {
  Vec g(3);
  g << Complex(1, 0), Complex(2, 0), Complex(3, 0);
  const auto m = build_convolution_matrix(g, 2, MatrixMode::full);
  REQUIRE(m.rows() == 4);
  REQUIRE(m.cols() == 2);
  const Mat d = m.dense();
  CHECK(d(0, 0) == Complex(1, 0));
  CHECK(d(0, 1) == Complex(0, 0));
  CHECK(d(1, 0) == Complex(2, 0));
  CHECK(d(1, 1) == Complex(1, 0));
  CHECK(d(2, 0) == Complex(3, 0));
  CHECK(d(2, 1) == Complex(2, 0));
  CHECK(d(3, 0) == Complex(0, 0));
  CHECK(d(3, 1) == Complex(3, 0));

  // matches the direct convolution oracle on a generic h
  RandomStream rng(23);
  const Vec h = random_real_vec(rng, 2);
  const Vec via_matrix = d * h;
  const Vec via_conv = conv_oracle(g, h);
  CHECK((via_matrix - via_conv).norm() <= 1e-14 * via_conv.norm());
}

TEST_CASE("truncated mode keeps the first generator-length outputs") {
  Vec g(3);
  g << Complex(1, 0), Complex(2, 0), Complex(3, 0);
  const auto m = build_convolution_matrix(g, 2, MatrixMode::truncated);
  REQUIRE(m.rows() == 3);
  REQUIRE(m.cols() == 2);
  const Mat d = m.dense();
  CHECK(d(0, 0) == Complex(1, 0));
  CHECK(d(0, 1) == Complex(0, 0));  // negative-index samples are zero
  CHECK(d(1, 0) == Complex(2, 0));
  CHECK(d(1, 1) == Complex(1, 0));
  CHECK(d(2, 0) == Complex(3, 0));
  CHECK(d(2, 1) == Complex(2, 0));
}

TEST_CASE("matrix-vector product equals direct convolution") {
  RandomStream rng(24);
  for (int rep = 0; rep < 200; ++rep) {
    RandomStream sub = rng.substream(rep);
    const Index len = 1 + static_cast<Index>(sub.uniform_index(12));
    const Index cols = 1 + static_cast<Index>(sub.uniform_index(12));
    const MatrixMode mode =
        sub.uniform01() < 0.5 ? MatrixMode::full : MatrixMode::truncated;
    const Vec g = random_complex_vec(sub, len);
    const Vec v = random_complex_vec(sub, cols);

    const ConvolutionMatrix m(g, cols, mode);
    const Vec direct_full = conv_oracle(g, v);
    const Vec expected = mode == MatrixMode::full ? direct_full : direct_full.head(len);

    const Vec via_apply = m.apply(v);
    const Vec via_dense = m.dense() * v;
    const double scale = std::max(expected.norm(), 1e-30);
    CHECK((via_apply - expected).norm() / scale < 1e-12);
    CHECK((via_dense - expected).norm() / scale < 1e-12);
  }
}

TEST_CASE("identity channels pass the training signal through") {
  RandomStream rng(25);
  const auto x = make_training_signal(16, TrainingScheme::bpsk, &rng);
  Vec id(1);
  id << Complex(1, 0);
  const auto h = cir_from(id);
  const LinkObservation obs =
      simulate_link(x, h, h, h, NoiseSpec::noiseless(), 1.0,
                    {MatrixMode::full, MatrixMode::full}, rng);
  CHECK((obs.y - x.samples).norm() == 0.0);
  CHECK((obs.z - x.samples).norm() == 0.0);
}

TEST_CASE("delay channel shifts the training signal") {
  RandomStream rng(26);
  Vec xs(2);
  xs << Complex(1, 0), Complex(0, 0);
  const auto x = custom_training_signal(xs);
  Vec delay(2), ident(2);
  delay << Complex(0, 0), Complex(1, 0);
  ident << Complex(1, 0), Complex(0, 0);
  const LinkObservation obs =
      simulate_link(x, cir_from(delay), cir_from(ident), cir_from(ident),
                    NoiseSpec::noiseless(), 1.0,
                    {MatrixMode::full, MatrixMode::full}, rng);
  // y = conv(x, [0,1]) = [0, 1, 0]
  REQUIRE(obs.y.size() == 3);
  CHECK(obs.y[0] == Complex(0, 0));
  CHECK(obs.y[1] == Complex(1, 0));
  CHECK(obs.y[2] == Complex(0, 0));
}

TEST_CASE("z composes both channels when noise is off") {
  RandomStream rng(27);
  const Index n = 7, m = 12;
  const Vec h1 = random_real_vec(rng, n);
  const Vec h3 = random_real_vec(rng, n);
  const auto x = make_training_signal(m, TrainingScheme::bpsk, &rng);
  const LinkObservation obs =
      simulate_link(x, cir_from(h1), cir_from(h1), cir_from(h3),
                    NoiseSpec::noiseless(), 1.0,
                    {MatrixMode::full, MatrixMode::full}, rng);
  CHECK(obs.z.size() == obs.y.size() + n - 1);
  const Vec expected = conv_oracle(conv_oracle(x.samples, h1), h3);
  CHECK((obs.z - expected).norm() <= 1e-12 * expected.norm());
}

TEST_CASE("link is linear in the training signal when noise is off") {
  RandomStream rng(28);
  const Index n = 5, m = 9;
  const Vec h1 = random_real_vec(rng, n);
  const Vec h2 = random_real_vec(rng, n);
  const Vec h3 = random_real_vec(rng, n);
  const Vec xa = random_real_vec(rng, m);
  const Vec xb = random_real_vec(rng, m);

  auto run = [&](const Vec& xs) {
    RandomStream r2(0);
    return simulate_link(custom_training_signal(xs), cir_from(h1), cir_from(h2),
                         cir_from(h3), NoiseSpec::noiseless(), 1.0,
                         {MatrixMode::full, MatrixMode::full}, r2);
  };
  const Vec za = run(xa).z;
  const Vec zb = run(xb).z;
  const Vec zab = run(xa + xb).z;
  CHECK((zab - za - zb).norm() <= 1e-12 * (za.norm() + zb.norm()));
}

TEST_CASE("realized noise hits the requested SNR") {
  RandomStream rng(29);
  const Index n = 4;
  const Index m = 10000;
  const Vec h1 = random_real_vec(rng, n);
  const Vec h3 = random_real_vec(rng, n);
  const auto x = make_training_signal(m, TrainingScheme::bpsk, &rng);
  const LinkObservation obs =
      simulate_link(x, cir_from(h1), cir_from(h1), cir_from(h3),
                    NoiseSpec::uniform_db(10.0), 1.0,
                    {MatrixMode::full, MatrixMode::full}, rng);

  const Vec y_clean = obs.y - obs.n1;
  const double snr1 = 10.0 * std::log10(y_clean.squaredNorm() / obs.n1.squaredNorm());
  CHECK(snr1 == doctest::Approx(10.0).epsilon(0.05));

  const Vec z_clean = obs.z - obs.n3;
  const double snr3 = 10.0 * std::log10(z_clean.squaredNorm() / obs.n3.squaredNorm());
  CHECK(snr3 == doctest::Approx(10.0).epsilon(0.05));
}

TEST_CASE("simulate_link is deterministic per seed") {
  auto run = [](std::uint64_t seed) {
    RandomStream rng(seed);
    RandomStream chan = rng.substream(0);
    const auto h1 = generate_sparse_channel(20, 3, 5, 2, chan);
    const auto h2 = generate_dense_channel(20, 0.1, chan);
    const auto h3 = generate_dense_channel(20, 0.1, chan);
    const auto x = make_training_signal(15, TrainingScheme::bpsk, &rng);
    return simulate_link(x, h1, h2, h3, NoiseSpec::uniform_db(10.0), 1.0,
                         {MatrixMode::full, MatrixMode::full}, rng);
  };
  const LinkObservation a = run(777);
  const LinkObservation b = run(777);
  REQUIRE(a.z.size() == b.z.size());
  for (Index i = 0; i < a.z.size(); ++i) CHECK(a.z[i] == b.z[i]);
}

TEST_CASE("simulate_link rejects mismatched channel lengths") {
  RandomStream rng(30);
  const auto x = make_training_signal(4, TrainingScheme::ramp);
  Vec a = Vec::Ones(3), b = Vec::Ones(4);
  CHECK_THROWS_AS(simulate_link(x, cir_from(a), cir_from(a), cir_from(b),
                                NoiseSpec::noiseless(), 1.0,
                                {MatrixMode::full, MatrixMode::full}, rng),
                  InvalidArgument);
}

TEST_SUITE_END();
