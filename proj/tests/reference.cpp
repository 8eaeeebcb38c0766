#include "reference.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace mixforge::ref {

std::vector<double> conv_full_serial(const std::vector<double>& x, const std::vector<double>& h) {
  if (x.empty() || h.empty()) return {};
  std::vector<double> y(x.size() + h.size() - 1, 0.0);
  for (size_t i = 0; i < x.size(); ++i)
    for (size_t j = 0; j < h.size(); ++j) y[i + j] += x[i] * h[j];
  return y;
}

std::vector<std::complex<double>> naive_dft_onesided(const std::vector<double>& x) {
  const size_t n = x.size();
  std::vector<std::complex<double>> out(n / 2 + 1);
  for (size_t k = 0; k < out.size(); ++k) {
    std::complex<double> acc = 0.0;
    for (size_t i = 0; i < n; ++i) {
      const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) *
                           static_cast<double>(i) / static_cast<double>(n);
      acc += x[i] * std::complex<double>(std::cos(angle), std::sin(angle));
    }
    out[k] = acc;
  }
  return out;
}

namespace {

std::vector<double> hann(int n) {
  std::vector<double> w(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
    w[static_cast<size_t>(i)] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / n);
  return w;
}

}  // namespace

Spectrogram stft_serial(const AudioClip& clip, const StftConfig& cfg) {
  const int frame_len = cfg.frame_len;
  const int hop = cfg.hop;
  const long long len = clip.size();
  const long long pad = frame_len - hop;
  const long long n_frames = (pad + len + hop - 1) / hop;
  const long long padded_len = (n_frames - 1) * hop + frame_len;

  std::vector<double> padded(static_cast<size_t>(padded_len), 0.0);
  for (long long i = 0; i < len; ++i) padded[static_cast<size_t>(pad + i)] = clip.samples[static_cast<size_t>(i)];
  const std::vector<double> window = hann(frame_len);

  Spectrogram spec;
  spec.n_bins = frame_len / 2 + 1;
  spec.n_frames = static_cast<int>(n_frames);
  spec.frame_len = frame_len;
  spec.hop = hop;
  spec.sample_rate = cfg.sample_rate;
  spec.original_len = len;
  spec.bins.resize(static_cast<size_t>(spec.n_bins) * spec.n_frames);

  std::vector<double> frame(static_cast<size_t>(frame_len));
  for (long long t = 0; t < n_frames; ++t) {
    for (int i = 0; i < frame_len; ++i)
      frame[static_cast<size_t>(i)] = padded[static_cast<size_t>(t * hop + i)] * window[static_cast<size_t>(i)];
    const std::vector<std::complex<double>> spectrum = naive_dft_onesided(frame);
    for (int f = 0; f < spec.n_bins; ++f)
      spec.at(f, static_cast<int>(t)) = spectrum[static_cast<size_t>(f)];
  }
  return spec;
}

AudioClip istft_serial(const Spectrogram& spec) {
  const int frame_len = spec.frame_len;
  const int hop = spec.hop;
  const long long pad = frame_len - hop;
  const long long padded_len = (static_cast<long long>(spec.n_frames) - 1) * hop + frame_len;

  const std::vector<double> window = hann(frame_len);
  std::vector<double> acc(static_cast<size_t>(padded_len), 0.0);
  std::vector<double> wsum(static_cast<size_t>(padded_len), 0.0);

  // Inverse DFT per frame from the one-sided spectrum (Hermitian expansion).
  std::vector<double> frame(static_cast<size_t>(frame_len));
  for (int t = 0; t < spec.n_frames; ++t) {
    for (int i = 0; i < frame_len; ++i) {
      std::complex<double> val = 0.0;
      for (int f = 0; f < spec.n_bins; ++f) {
        const double angle = 2.0 * std::numbers::pi * f * i / frame_len;
        const std::complex<double> e(std::cos(angle), std::sin(angle));
        const bool interior = f != 0 && f != frame_len / 2;
        val += spec.at(f, t) * e;
        if (interior) val += std::conj(spec.at(f, t) * e);
      }
      frame[static_cast<size_t>(i)] = val.real() / frame_len;
    }
    for (int i = 0; i < frame_len; ++i) {
      acc[static_cast<size_t>(t * hop + i)] += frame[static_cast<size_t>(i)];
      wsum[static_cast<size_t>(t * hop + i)] += window[static_cast<size_t>(i)];
    }
  }

  AudioClip out;
  out.sample_rate = spec.sample_rate;
  out.samples.resize(static_cast<size_t>(spec.original_len));
  for (long long i = 0; i < spec.original_len; ++i) {
    const size_t q = static_cast<size_t>(pad + i);
    out.samples[static_cast<size_t>(i)] = wsum[q] > 1e-12 ? acc[q] / wsum[q] : 0.0;
  }
  return out;
}

double si_sdr_direct(const AudioClip& reference, const AudioClip& estimate) {
  const size_t n = reference.samples.size();
  if (n != estimate.samples.size() || n == 0) throw std::runtime_error("si_sdr_direct: bad input");

  std::vector<double> r(n), e(n);
  double rm = 0.0, em = 0.0;
  for (size_t i = 0; i < n; ++i) {
    rm += reference.samples[i];
    em += estimate.samples[i];
  }
  rm /= static_cast<double>(n);
  em /= static_cast<double>(n);
  for (size_t i = 0; i < n; ++i) {
    r[i] = reference.samples[i] - rm;
    e[i] = estimate.samples[i] - em;
  }

  double dot = 0.0, rr = 0.0;
  for (size_t i = 0; i < n; ++i) {
    dot += e[i] * r[i];
    rr += r[i] * r[i];
  }
  const double alpha = dot / rr;
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double t = alpha * r[i];
    num += t * t;
    const double d = t - e[i];
    den += d * d;
  }
  if (den == 0.0) return 120.0;
  if (num == 0.0) return -120.0;
  return 10.0 * std::log10(num / den);
}

double spectral_peak_hz(const AudioClip& clip) {
  const std::vector<std::complex<double>> spectrum = naive_dft_onesided(clip.samples);
  size_t best = 0;
  for (size_t k = 1; k < spectrum.size(); ++k)
    if (std::abs(spectrum[k]) > std::abs(spectrum[best])) best = k;
  return static_cast<double>(best) * clip.sample_rate / static_cast<double>(clip.samples.size());
}

void ibm_oracle(const std::vector<double>& a, const std::vector<double>& b,
                std::vector<double>& m1, std::vector<double>& m2) {
  m1.resize(a.size());
  m2.resize(a.size());
  for (size_t i = 0; i < a.size(); ++i) {
    m1[i] = a[i] > b[i] ? 1.0 : 0.0;
    m2[i] = b[i] > a[i] ? 1.0 : 0.0;
  }
}

void irm_oracle(const std::vector<double>& a, const std::vector<double>& b,
                std::vector<double>& m1, std::vector<double>& m2) {
  m1.resize(a.size());
  m2.resize(a.size());
  for (size_t i = 0; i < a.size(); ++i) {
    const double s = a[i] + b[i];
    m1[i] = s > 0.0 ? a[i] / s : 0.5;
    m2[i] = s > 0.0 ? b[i] / s : 0.5;
  }
}

void wfm_oracle(const std::vector<double>& a, const std::vector<double>& b,
                std::vector<double>& m1, std::vector<double>& m2) {
  m1.resize(a.size());
  m2.resize(a.size());
  for (size_t i = 0; i < a.size(); ++i) {
    const double s = a[i] * a[i] + b[i] * b[i];
    m1[i] = s > 0.0 ? a[i] * a[i] / s : 0.5;
    m2[i] = s > 0.0 ? b[i] * b[i] / s : 0.5;
  }
}

AudioClip random_clip(long long n, int rate, uint64_t seed, double amplitude) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-amplitude, amplitude);
  AudioClip clip;
  clip.sample_rate = rate;
  clip.samples.resize(static_cast<size_t>(n));
  for (double& v : clip.samples) v = dist(rng);
  return clip;
}

AudioClip tone(double freq_hz, double duration_s, int rate, double amplitude) {
  AudioClip clip;
  clip.sample_rate = rate;
  clip.samples.resize(static_cast<size_t>(duration_s * rate));
  for (size_t i = 0; i < clip.samples.size(); ++i)
    clip.samples[i] = amplitude * std::sin(2.0 * std::numbers::pi * freq_hz * static_cast<double>(i) / rate);
  return clip;
}

AudioClip random_bandlimited(long long n, int rate, uint64_t seed, double max_hz) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> freq(20.0, max_hz);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  AudioClip clip;
  clip.sample_rate = rate;
  clip.samples.assign(static_cast<size_t>(n), 0.0);
  for (int c = 0; c < 12; ++c) {
    const double f = freq(rng);
    const double p = phase(rng);
    for (size_t i = 0; i < clip.samples.size(); ++i)
      clip.samples[i] += 0.08 * std::sin(2.0 * std::numbers::pi * f * static_cast<double>(i) / rate + p);
  }
  return clip;
}

double rel_l2_diff(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return 1e30;
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    num += d * d;
    den += a[i] * a[i];
  }
  if (den == 0.0) return num == 0.0 ? 0.0 : 1e30;
  return std::sqrt(num / den);
}

double rel_l2_diff(const AudioClip& a, const AudioClip& b) {
  return rel_l2_diff(a.samples, b.samples);
}

}  // namespace mixforge::ref
