#ifndef MIXFORGE_SPECTRAL_HPP_
#define MIXFORGE_SPECTRAL_HPP_

#include <complex>
#include <vector>

#include "mixforge/audio.hpp"

namespace mixforge {

// 32 ms frames, 8 ms hop, hann window: 256 / 64 samples at the 8 kHz
// working rate.
struct StftConfig {
  int frame_len = 256;
  int hop = 64;
  int sample_rate = kWorkingRate;

  static StftConfig for_rate(int rate);
};

enum class Window { Hann };

// One-sided complex T-F matrix. Frame-major storage: (f, t) lives at
// bins[t * n_bins + f].
struct Spectrogram {
  int n_bins = 0;
  int n_frames = 0;
  int frame_len = 0;
  int hop = 0;
  Window window = Window::Hann;
  int sample_rate = 0;
  long long original_len = 0;
  std::vector<std::complex<double>> bins;

  std::complex<double>& at(int f, int t) {
    return bins[static_cast<size_t>(t) * n_bins + f];
  }
  const std::complex<double>& at(int f, int t) const {
    return bins[static_cast<size_t>(t) * n_bins + f];
  }
  bool same_shape(const Spectrogram& o) const {
    return n_bins == o.n_bins && n_frames == o.n_frames;
  }
  // |bins|, flattened in storage order.
  std::vector<double> magnitude() const;
};

// One-sided STFT. The clip rate must equal cfg.sample_rate. A lead-in of
// (frame_len - hop) zeros plus tail padding gives every sample full window
// coverage; original_len is recorded so istft can return the exact length.
Spectrogram stft(const AudioClip& clip, const StftConfig& cfg = StftConfig{});

// Overlap-add synthesis with window-sum normalization, truncated to
// original_len.
AudioClip istft(const Spectrogram& spec);

// bins = magnitude * exp(i * angle(phase_source)); zero phase bins get unit
// phase. magnitude is in the spectrogram's flattened storage order.
Spectrogram recombine(const std::vector<double>& magnitude, const Spectrogram& phase_source);

}  // namespace mixforge

#endif  // MIXFORGE_SPECTRAL_HPP_
