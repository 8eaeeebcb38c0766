#ifndef MIXFORGE_AUDIO_HPP_
#define MIXFORGE_AUDIO_HPP_

#include <filesystem>
#include <vector>

namespace mixforge {

// Working sample rate of the whole pipeline; sources are downsampled to this
// before any recording or analysis step.
inline constexpr int kWorkingRate = 8000;

// Mono audio. Samples are real-valued, nominally in [-1, 1]; only the WAV
// boundary quantizes.
struct AudioClip {
  std::vector<double> samples;
  int sample_rate = 0;

  long long size() const { return static_cast<long long>(samples.size()); }
  bool empty() const { return samples.empty(); }
  double duration_s() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
};

// Header-only probe, used by the planner to measure durations without
// decoding payloads.
struct WavInfo {
  int sample_rate = 0;
  long long frames = 0;
};

// PCM 16-bit little-endian mono RIFF/WAVE only. Decodes to [-1, 1] by
// division by 32768.
AudioClip read_wav(const std::filesystem::path& path);
WavInfo read_wav_info(const std::filesystem::path& path);

// Clamps to [-1, 1], then stores clamp(round(x * 32768), -32768, 32767) so
// that write(read(f)) reproduces f's payload bit-exactly and the round-trip
// error never exceeds one quantization step.
void write_wav(const AudioClip& clip, const std::filesystem::path& path);

// Windowed-sinc polyphase resampler, 64 taps per phase, DC-normalized.
// Output length is round(len * target_rate / source_rate). Low-passes before
// decimation when downsampling; identity when the rates already match.
AudioClip resample(const AudioClip& clip, int target_rate);

}  // namespace mixforge

#endif  // MIXFORGE_AUDIO_HPP_
