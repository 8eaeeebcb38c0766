#ifndef MIXFORGE_CHANNEL_HPP_
#define MIXFORGE_CHANNEL_HPP_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mixforge/audio.hpp"

namespace mixforge {

enum class ChannelSide { Left, Right };

// Distance-parameterized acoustic path: direct 1/d tap plus an optional
// exponentially decaying reverberant tail, optional soft-clip nonlinearity
// and additive noise.
struct ChannelModel {
  double mic_distance_m = 2.0;
  double source_spacing_m = 0.5;
  double reverb_rt60_s = 0.0;
  // Noise level relative to the clean wet signal's RMS; unset disables noise.
  std::optional<double> noise_snr_db;
  // Absolute noise level re full scale; takes precedence over noise_snr_db.
  // This is what makes distance sweeps degrade: a relative SNR tracks the
  // signal and cancels the distance effect.
  std::optional<double> noise_floor_dbfs;
  double speed_of_sound = 343.0;
  double nonlinearity_drive = 0.0;  // 0 disables the soft-clip
  uint64_t seed = 0;
  int sample_rate = kWorkingRate;

  // Sources sit at (+-source_spacing/2, 0); the mic is on the perpendicular
  // bisector at (0, mic_distance).
  double source_distance(ChannelSide which) const;
};

// key = value text config. Recognized keys: mic_distance_m, source_spacing_m,
// reverb_rt60_s, noise_snr_db, noise_floor_dbfs, nonlinearity_drive, seed,
// sample_rate. noise keys accept "off".
ChannelModel load_channel_config(const std::filesystem::path& path);
ChannelModel channel_config_from_string(const std::string& text);
// Single-line snapshot (space-separated key=value) for manifest headers.
std::string channel_config_line(const ChannelModel& model);

// Direct tap 1/max(d, 0.1) at round(d / c * rate); rt60 > 0 appends a
// seeded-noise tail whose envelope falls 60 dB over rt60 seconds. The tail
// draw depends on (seed, which) only, so distance sweeps vary nothing else.
std::vector<double> generate_rir(double distance_m, const ChannelModel& model, ChannelSide which);

struct SessionReport {
  AudioClip recording;
  long long overrun_lost = 0;
  long long underrun_lost = 0;

  bool clean() const { return overrun_lost == 0 && underrun_lost == 0; }
};

// Full-duplex capture contract. Sample 0 of the recording corresponds to
// render start; dual rendering starts both sources at the same output index.
// Hardware-style sessions are exclusive-access: one in-flight call.
class Session {
 public:
  virtual ~Session() = default;
  virtual SessionReport play_record_single(const AudioClip& source, ChannelSide which) = 0;
  virtual SessionReport play_record_dual(const AudioClip& left, const AudioClip& right) = 0;
};

// Pure-function simulator entry points. noise_draw distinguishes successive
// session calls so each recording gets a fresh, reproducible realization.
SessionReport simulate_single(const AudioClip& source, const ChannelModel& model,
                              ChannelSide which = ChannelSide::Left, uint64_t noise_draw = 0);
SessionReport simulate_dual(const AudioClip& left, const AudioClip& right,
                            const ChannelModel& model, uint64_t noise_draw = 0);

// Session adapter over the simulator; always clean, advances the noise draw
// per call.
class SimulatorSession : public Session {
 public:
  explicit SimulatorSession(ChannelModel model) : model_(std::move(model)) {}
  SessionReport play_record_single(const AudioClip& source, ChannelSide which) override;
  SessionReport play_record_dual(const AudioClip& left, const AudioClip& right) override;

 private:
  ChannelModel model_;
  uint64_t call_index_ = 0;
};

// Scheduled fault on the Nth call (1-based) of a fake session.
struct FaultSpec {
  uint64_t call_index = 0;
  long long overrun_lost = 0;
  long long underrun_lost = 0;
};

// Passes audio through unchanged (dual = sample-wise sum) but reports the
// scheduled overrun/underrun losses; clean on unscheduled calls.
std::unique_ptr<Session> fake_session(std::vector<FaultSpec> schedule);

// Parses "o@1,u@3" or "o@1=128" fault lists (CLI `--session fake:<schedule>`).
std::vector<FaultSpec> parse_fault_schedule(const std::string& text);

}  // namespace mixforge

#endif  // MIXFORGE_CHANNEL_HPP_
