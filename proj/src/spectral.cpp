#include "mixforge/spectral.hpp"

#include <cmath>
#include <numbers>

#include "fft.hpp"
#include "mixforge/errors.hpp"

namespace mixforge {

namespace {

// Periodic hann. With hop = frame_len / 4 the shifted window sum is exactly
// frame_len / (2 * hop) = 2 wherever all four overlapping frames exist.
std::vector<double> hann_window(int n) {
  std::vector<double> w(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
    w[static_cast<size_t>(i)] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / n);
  return w;
}

void check_metadata(const Spectrogram& s) {
  if (s.window != Window::Hann)
    throw InvalidArgument("spectrogram: unsupported window tag");
  if (s.frame_len <= 0 || s.hop <= 0 || s.hop > s.frame_len)
    throw InvalidArgument("spectrogram: inconsistent frame/hop metadata");
  if (s.n_bins != s.frame_len / 2 + 1)
    throw InvalidArgument("spectrogram: bin count does not match frame length");
  if (s.bins.size() != static_cast<size_t>(s.n_bins) * s.n_frames)
    throw InvalidArgument("spectrogram: bin storage does not match shape");
}

}  // namespace

StftConfig StftConfig::for_rate(int rate) {
  if (rate <= 0) throw InvalidArgument("stft: non-positive sample rate");
  StftConfig cfg;
  cfg.sample_rate = rate;
  cfg.frame_len = static_cast<int>(std::lround(0.032 * rate));
  cfg.hop = static_cast<int>(std::lround(0.008 * rate));
  return cfg;
}

std::vector<double> Spectrogram::magnitude() const {
  std::vector<double> m(bins.size());
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < static_cast<long long>(bins.size()); ++i)
    m[static_cast<size_t>(i)] = std::abs(bins[static_cast<size_t>(i)]);
  return m;
}

Spectrogram stft(const AudioClip& clip, const StftConfig& cfg) {
  if (clip.empty()) throw InvalidArgument("stft: empty clip");
  if (clip.sample_rate != cfg.sample_rate)
    throw InvalidArgument("stft: clip rate does not match the configured working rate");
  if (cfg.frame_len <= 0 || cfg.hop <= 0 || cfg.hop > cfg.frame_len)
    throw InvalidArgument("stft: bad frame/hop configuration");

  const int frame_len = cfg.frame_len;
  const int hop = cfg.hop;
  const long long len = clip.size();
  // Lead-in so the first samples get full window coverage (hann is zero at
  // its first sample), tail padding so the last hop is covered.
  const long long pad = frame_len - hop;
  const long long n_frames = (pad + len + hop - 1) / hop;
  const long long padded_len = (n_frames - 1) * hop + frame_len;

  std::vector<double> padded(static_cast<size_t>(padded_len), 0.0);
  for (long long i = 0; i < len; ++i)
    padded[static_cast<size_t>(pad + i)] = clip.samples[static_cast<size_t>(i)];

  const std::vector<double> window = hann_window(frame_len);

  Spectrogram spec;
  spec.n_bins = frame_len / 2 + 1;
  spec.n_frames = static_cast<int>(n_frames);
  spec.frame_len = frame_len;
  spec.hop = hop;
  spec.sample_rate = cfg.sample_rate;
  spec.original_len = len;
  spec.bins.resize(static_cast<size_t>(spec.n_bins) * spec.n_frames);

#pragma omp parallel
  {
    std::vector<double> frame(static_cast<size_t>(frame_len));
#pragma omp for schedule(static)
    for (long long t = 0; t < n_frames; ++t) {
      const double* src = &padded[static_cast<size_t>(t * hop)];
      for (int i = 0; i < frame_len; ++i) frame[static_cast<size_t>(i)] = src[i] * window[static_cast<size_t>(i)];
      detail::rfft(frame.data(), &spec.bins[static_cast<size_t>(t) * spec.n_bins], frame_len);
    }
  }
  return spec;
}

AudioClip istft(const Spectrogram& spec) {
  check_metadata(spec);
  const int frame_len = spec.frame_len;
  const int hop = spec.hop;
  const long long n_frames = spec.n_frames;
  const long long pad = frame_len - hop;
  const long long padded_len = (n_frames - 1) * hop + frame_len;

  // Invert every frame first (parallel), then overlap-add serially so the
  // accumulation order is fixed.
  std::vector<double> frames(static_cast<size_t>(n_frames) * frame_len);
#pragma omp parallel for schedule(static)
  for (long long t = 0; t < n_frames; ++t)
    detail::irfft(&spec.bins[static_cast<size_t>(t) * spec.n_bins],
                  &frames[static_cast<size_t>(t) * frame_len], frame_len);

  const std::vector<double> window = hann_window(frame_len);
  std::vector<double> acc(static_cast<size_t>(padded_len), 0.0);
  std::vector<double> wsum(static_cast<size_t>(padded_len), 0.0);
  for (long long t = 0; t < n_frames; ++t) {
    const double* fr = &frames[static_cast<size_t>(t) * frame_len];
    double* a = &acc[static_cast<size_t>(t * hop)];
    double* w = &wsum[static_cast<size_t>(t * hop)];
    for (int i = 0; i < frame_len; ++i) {
      a[i] += fr[i];
      w[i] += window[static_cast<size_t>(i)];
    }
  }

  AudioClip out;
  out.sample_rate = spec.sample_rate;
  const long long out_len = spec.original_len;
  if (pad + out_len > padded_len)
    throw InvalidArgument("istft: original_len does not fit the frame layout");
  out.samples.resize(static_cast<size_t>(out_len));
  for (long long i = 0; i < out_len; ++i) {
    const size_t q = static_cast<size_t>(pad + i);
    out.samples[static_cast<size_t>(i)] = wsum[q] > 1e-12 ? acc[q] / wsum[q] : 0.0;
  }
  return out;
}

Spectrogram recombine(const std::vector<double>& magnitude, const Spectrogram& phase_source) {
  check_metadata(phase_source);
  if (magnitude.size() != phase_source.bins.size())
    throw InvalidArgument("recombine: magnitude shape does not match phase source");

  bool has_negative = false;
#pragma omp parallel for schedule(static) reduction(|| : has_negative)
  for (long long i = 0; i < static_cast<long long>(magnitude.size()); ++i)
    has_negative = has_negative || magnitude[static_cast<size_t>(i)] < 0.0;
  if (has_negative) throw InvalidArgument("recombine: negative magnitude");

  Spectrogram out = phase_source;
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < static_cast<long long>(magnitude.size()); ++i) {
    const size_t k = static_cast<size_t>(i);
    const double m = magnitude[k];
    const std::complex<double> p = phase_source.bins[k];
    const double pm = std::abs(p);
    out.bins[k] = pm > 0.0 ? p * (m / pm) : std::complex<double>(m, 0.0);
  }
  return out;
}

}  // namespace mixforge
