// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "afsense/channel.hpp"

using namespace afsense;

TEST_SUITE_BEGIN("channel");

TEST_CASE("dense channel with one tap has unit magnitude") {
  RandomStream rng(1);
  const auto cir = generate_dense_channel(1, 1.0, rng);
  CHECK(cir.taps.size() == 1);
  CHECK(std::abs(cir.taps[0]) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(cir.kind == ChannelKind::dense);
  CHECK(cir.support.empty());
}

TEST_CASE("dense channel power profile follows the exponential decay") {
  // Sample-mean oracle: the expected power ratio between taps 50 and 0 at
  // decay 0.05 is exp(-2.5).
  RandomStream rng(2);
  const int reps = 10000;
  double p0 = 0.0, p50 = 0.0;
  for (int r = 0; r < reps; ++r) {
    RandomStream sub = rng.substream(r);
    const auto cir = generate_dense_channel(100, 0.05, sub);
    p0 += std::norm(cir.taps[0]);
    p50 += std::norm(cir.taps[50]);
  }
  const double ratio = p50 / p0;
  CHECK(ratio == doctest::Approx(std::exp(-2.5)).epsilon(0.05));
}

TEST_CASE("dense channel with zero decay is flat") {
  RandomStream rng(3);
  const int reps = 20000;
  Eigen::Vector3d power = Eigen::Vector3d::Zero();
  for (int r = 0; r < reps; ++r) {
    RandomStream sub = rng.substream(r);
    const auto cir = generate_dense_channel(3, 0.0, sub);
    for (int i = 0; i < 3; ++i) power[i] += std::norm(cir.taps[i]);
  }
  power /= reps;
  for (int i = 0; i < 3; ++i)
    CHECK(power[i] == doctest::Approx(1.0 / 3.0).epsilon(0.05));
}

TEST_CASE("dense channel has unit total power per realization") {
  RandomStream rng(4);
  for (int r = 0; r < 20; ++r) {
    RandomStream sub = rng.substream(r);
    const auto cir = generate_dense_channel(64, 0.1, sub);
    CHECK(cir.taps.squaredNorm() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("dense channel rejects bad arguments") {
  RandomStream rng(5);
  CHECK_THROWS_AS(generate_dense_channel(0, 1.0, rng), InvalidArgument);
  CHECK_THROWS_AS(generate_dense_channel(4, -0.5, rng), InvalidArgument);
}

TEST_CASE("sparse channel respects head/tail split and magnitude law") {
  RandomStream rng(6);
  for (int r = 0; r < 200; ++r) {
    RandomStream sub = rng.substream(r);
    const auto cir = generate_sparse_channel(100, 15, 10, 10, sub);
    CHECK(cir.kind == ChannelKind::sparse);
    CHECK(cir.support.size() == 15);

    int in_head = 0;
    int nonzero = 0;
    for (Index i = 0; i < cir.taps.size(); ++i) {
      const double mag = std::abs(cir.taps[i]);
      const bool on_support =
          std::find(cir.support.begin(), cir.support.end(), i) != cir.support.end();
      if (on_support) {
        ++nonzero;
        CHECK(mag >= 0.2);
        CHECK(mag <= 1.0);
        if (i < 10) ++in_head;
      } else {
        CHECK(mag == 0.0);
      }
    }
    CHECK(nonzero == 15);
    CHECK(in_head == 10);
    CHECK(std::is_sorted(cir.support.begin(), cir.support.end()));
    CHECK(std::set<Index>(cir.support.begin(), cir.support.end()).size() == 15);
  }
}

TEST_CASE("sparse channel with full support") {
  RandomStream rng(7);
  const auto cir = generate_sparse_channel(5, 5, 5, 5, rng);
  CHECK(cir.support == std::vector<Index>{0, 1, 2, 3, 4});
}

TEST_CASE("sparse channel tail indices stay beyond the head region") {
  RandomStream rng(8);
  for (int r = 0; r < 100; ++r) {
    RandomStream sub = rng.substream(r);
    const auto cir = generate_sparse_channel(50, 6, 10, 2, sub);
    int head = 0;
    for (Index i : cir.support)
      if (i < 10) ++head;
    CHECK(head == 2);
  }
}

TEST_CASE("sparse channel rejects infeasible requests") {
  RandomStream rng(9);
  CHECK_THROWS_AS(generate_sparse_channel(10, 11, 5, 2, rng), InvalidArgument);
  CHECK_THROWS_AS(generate_sparse_channel(10, 5, 4, 5, rng), InvalidArgument);
  CHECK_THROWS_AS(generate_sparse_channel(10, 5, 11, 2, rng), InvalidArgument);
  // tail region of width 1 cannot hold 4 taps
  CHECK_THROWS_AS(generate_sparse_channel(10, 5, 9, 1, rng), InvalidArgument);
}

TEST_CASE("channels are bit-for-bit deterministic per seed") {
  RandomStream a(1234), b(1234);
  const auto ca = generate_sparse_channel(100, 15, 10, 10, a);
  const auto cb = generate_sparse_channel(100, 15, 10, 10, b);
  REQUIRE(ca.taps.size() == cb.taps.size());
  for (Index i = 0; i < ca.taps.size(); ++i) CHECK(ca.taps[i] == cb.taps[i]);
  CHECK(ca.support == cb.support);

  RandomStream c(99), d(99);
  const auto cc = generate_dense_channel(100, 0.05, c);
  const auto cd = generate_dense_channel(100, 0.05, d);
  for (Index i = 0; i < cc.taps.size(); ++i) CHECK(cc.taps[i] == cd.taps[i]);
}

TEST_CASE("awgn with zero variance is the zero vector") {
  RandomStream rng(10);
  const Vec n = sample_awgn(4, 0.0, rng);
  CHECK(n.size() == 4);
  for (Index i = 0; i < 4; ++i) CHECK(n[i] == Complex(0.0, 0.0));
}

TEST_CASE("awgn sample moments match the requested variance") {
  RandomStream rng(11);
  const Index n = 100000;
  const Vec noise = sample_awgn(n, 2.0, rng);
  CHECK(noise.squaredNorm() / static_cast<double>(n) ==
        doctest::Approx(2.0).epsilon(0.03));

  RandomStream rng2(12);
  const Vec noise2 = sample_awgn(n, 1.0, rng2);
  CHECK(std::abs(noise2.real().mean()) < 0.02);
}

TEST_CASE("complex awgn splits variance between parts") {
  RandomStream rng(13);
  const Index n = 100000;
  const Vec noise = sample_awgn(n, 2.0, rng, Field::complex);
  CHECK(noise.real().squaredNorm() / static_cast<double>(n) ==
        doctest::Approx(1.0).epsilon(0.05));
  CHECK(noise.imag().squaredNorm() / static_cast<double>(n) ==
        doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("awgn rejects negative variance") {
  RandomStream rng(14);
  CHECK_THROWS_AS(sample_awgn(4, -1.0, rng), InvalidArgument);
}

TEST_CASE("awgn passes a Kolmogorov-Smirnov sanity gate") {
  RandomStream rng(15);
  const Index n = 10000;
  const Vec noise = sample_awgn(n, 1.0, rng);
  std::vector<double> xs(n);
  for (Index i = 0; i < n; ++i) xs[static_cast<std::size_t>(i)] = noise[i].real();
  std::sort(xs.begin(), xs.end());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double phi = 0.5 * std::erfc(-xs[i] / std::sqrt(2.0));
    const double lo = static_cast<double>(i) / n;
    const double hi = static_cast<double>(i + 1) / n;
    d = std::max(d, std::max(std::abs(phi - lo), std::abs(phi - hi)));
  }
  // asymptotic critical value at significance 0.01
  CHECK(d < 1.628 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("snr_to_noise_variance conventions") {
  Vec ones = Vec::Constant(8, Complex(1.0, 0.0));
  CHECK(snr_to_noise_variance(ones, 0.0) == doctest::Approx(1.0));
  CHECK(snr_to_noise_variance(ones, 10.0) == doctest::Approx(0.1));

  Vec v(2);
  v << Complex(3.0, 0.0), Complex(4.0, 0.0);
  CHECK(snr_to_noise_variance(v, 0.0) == doctest::Approx(12.5));

  Vec zeros = Vec::Zero(3);
  CHECK_THROWS_AS(snr_to_noise_variance(zeros, 10.0), DegenerateInput);
}

TEST_SUITE_END();
