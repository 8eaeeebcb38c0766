#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "mixforge/errors.hpp"
#include "mixforge/spectral.hpp"
#include "reference.hpp"

using namespace mixforge;

TEST_CASE("default config is 256/64 at 8 kHz and scales with the rate") {
  const StftConfig cfg = StftConfig::for_rate(8000);
  CHECK(cfg.frame_len == 256);
  CHECK(cfg.hop == 64);
  const StftConfig cfg16 = StftConfig::for_rate(16000);
  CHECK(cfg16.frame_len == 512);
  CHECK(cfg16.hop == 128);
}

TEST_CASE("stft of silence is all-zero bins") {
  AudioClip clip;
  clip.sample_rate = 8000;
  clip.samples.assign(1000, 0.0);
  const Spectrogram spec = stft(clip);
  CHECK(spec.n_bins == 129);
  CHECK(spec.original_len == 1000);
  for (const std::complex<double>& b : spec.bins) CHECK(std::abs(b) == 0.0);

  const AudioClip back = istft(spec);
  REQUIRE(back.size() == 1000);
  for (double v : back.samples) CHECK(v == 0.0);
}

TEST_CASE("unit impulse at sample 0 gives a flat first frame at the window weight") {
  AudioClip clip;
  clip.sample_rate = 8000;
  clip.samples.assign(500, 0.0);
  clip.samples[0] = 1.0;
  const Spectrogram spec = stft(clip);

  // With the lead-in, sample 0 sits (frame_len - hop) into frame 0; the DFT
  // of a single windowed impulse is flat at that window weight across f.
  const int offset = spec.frame_len - spec.hop;
  const double weight =
      0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * offset / spec.frame_len);
  for (int f = 0; f < spec.n_bins; ++f)
    CHECK(std::abs(spec.at(f, 0)) == doctest::Approx(weight).epsilon(1e-12));
}

TEST_CASE("istft(stft(x)) round trip is exact to 1e-6 relative L2") {
  for (uint64_t seed : {1, 2, 3, 4}) {
    const AudioClip clip = ref::random_clip(8000, 8000, seed);
    const AudioClip back = istft(stft(clip));
    REQUIRE(back.size() == clip.size());
    CHECK(ref::rel_l2_diff(clip, back) < 1e-6);
  }
  // Awkward lengths: not multiples of the hop.
  for (long long n : {100, 257, 8191}) {
    const AudioClip clip = ref::random_clip(n, 8000, static_cast<uint64_t>(n));
    CHECK(ref::rel_l2_diff(clip, istft(stft(clip))) < 1e-6);
  }
}

TEST_CASE("stft matches the serial naive-DFT reference") {
  const AudioClip clip = ref::random_clip(2000, 8000, 7);
  const StftConfig cfg = StftConfig::for_rate(8000);
  const Spectrogram fast = stft(clip, cfg);
  const Spectrogram slow = ref::stft_serial(clip, cfg);
  REQUIRE(fast.n_frames == slow.n_frames);
  REQUIRE(fast.n_bins == slow.n_bins);
  double max_err = 0.0;
  for (size_t i = 0; i < fast.bins.size(); ++i)
    max_err = std::max(max_err, std::abs(fast.bins[i] - slow.bins[i]));
  CHECK(max_err < 1e-9);

  const AudioClip fast_back = istft(fast);
  const AudioClip slow_back = ref::istft_serial(slow);
  CHECK(ref::rel_l2_diff(fast_back, slow_back) < 1e-9);
}

TEST_CASE("stft is linear") {
  const AudioClip x = ref::random_clip(3000, 8000, 14);
  const AudioClip y = ref::random_clip(3000, 8000, 15);
  AudioClip combo;
  combo.sample_rate = 8000;
  combo.samples.resize(3000);
  for (size_t i = 0; i < combo.samples.size(); ++i)
    combo.samples[i] = 0.3 * x.samples[i] - 1.7 * y.samples[i];

  const Spectrogram sx = stft(x);
  const Spectrogram sy = stft(y);
  const Spectrogram sc = stft(combo);
  double max_err = 0.0;
  for (size_t i = 0; i < sc.bins.size(); ++i)
    max_err = std::max(max_err, std::abs(sc.bins[i] - (0.3 * sx.bins[i] - 1.7 * sy.bins[i])));
  CHECK(max_err < 1e-9);
}

TEST_CASE("istft is linear: doubling the bins doubles the output") {
  const AudioClip clip = ref::random_clip(3000, 8000, 8);
  Spectrogram spec = stft(clip);
  const AudioClip once = istft(spec);
  for (std::complex<double>& b : spec.bins) b *= 2.0;
  const AudioClip twice = istft(spec);
  REQUIRE(once.size() == twice.size());
  for (size_t i = 0; i < once.samples.size(); ++i)
    CHECK(twice.samples[i] == doctest::Approx(2.0 * once.samples[i]).epsilon(1e-9));
}

TEST_CASE("stft rejects empty clips and rate mismatches") {
  AudioClip empty;
  empty.sample_rate = 8000;
  CHECK_THROWS_AS(stft(empty), InvalidArgument);

  AudioClip wrong_rate;
  wrong_rate.sample_rate = 16000;
  wrong_rate.samples.assign(100, 0.1);
  CHECK_THROWS_AS(stft(wrong_rate), InvalidArgument);  // default config is 8 kHz
}

TEST_CASE("istft rejects inconsistent metadata") {
  const AudioClip clip = ref::random_clip(1000, 8000, 9);
  Spectrogram spec = stft(clip);
  Spectrogram broken = spec;
  broken.n_bins = 64;  // no longer frame_len/2 + 1
  CHECK_THROWS_AS(istft(broken), InvalidArgument);
  broken = spec;
  broken.hop = 0;
  CHECK_THROWS_AS(istft(broken), InvalidArgument);
}

TEST_CASE("recombine with its own magnitude and phase reproduces the spectrogram") {
  const AudioClip clip = ref::random_clip(2000, 8000, 10);
  const Spectrogram spec = stft(clip);
  const Spectrogram again = recombine(spec.magnitude(), spec);
  double max_err = 0.0;
  for (size_t i = 0; i < spec.bins.size(); ++i)
    max_err = std::max(max_err, std::abs(spec.bins[i] - again.bins[i]));
  CHECK(max_err < 1e-12);
}

TEST_CASE("recombine with zero magnitude gives a zero spectrogram") {
  const AudioClip clip = ref::random_clip(1000, 8000, 11);
  const Spectrogram spec = stft(clip);
  const Spectrogram zeroed = recombine(std::vector<double>(spec.bins.size(), 0.0), spec);
  for (const std::complex<double>& b : zeroed.bins) CHECK(std::abs(b) == 0.0);
}

TEST_CASE("halving the magnitude roughly halves the synthesis norm") {
  const AudioClip clip = ref::random_clip(4000, 8000, 12);
  const Spectrogram spec = stft(clip);
  std::vector<double> mag = spec.magnitude();
  for (double& m : mag) m *= 0.5;
  const AudioClip full = istft(spec);
  const AudioClip half = istft(recombine(mag, spec));

  double n_full = 0.0, n_half = 0.0;
  for (double v : full.samples) n_full += v * v;
  for (double v : half.samples) n_half += v * v;
  const double ratio = std::sqrt(n_half / n_full);
  CHECK(ratio > 0.4);
  CHECK(ratio < 0.6);
}

TEST_CASE("recombine validates shape and sign") {
  const AudioClip clip = ref::random_clip(1000, 8000, 13);
  const Spectrogram spec = stft(clip);
  CHECK_THROWS_AS(recombine(std::vector<double>(3, 0.0), spec), InvalidArgument);
  std::vector<double> neg(spec.bins.size(), 0.0);
  neg[5] = -1.0;
  CHECK_THROWS_AS(recombine(neg, spec), InvalidArgument);
}
