#include "mixforge/channel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include "mixforge/errors.hpp"
#include "mixforge/kernels.hpp"
#include "mixforge/util.hpp"

namespace mixforge {

double ChannelModel::source_distance(ChannelSide which) const {
  (void)which;  // the geometry is mirror-symmetric
  return std::hypot(source_spacing_m / 2.0, mic_distance_m);
}

namespace {

double soft_clip(double x, double drive) {
  // Memoryless cubic x - drive*x^3, saturating past its turning point.
  const double knee = 1.0 / std::sqrt(3.0 * drive);
  if (x > knee) return knee - drive * knee * knee * knee;
  if (x < -knee) return -(knee - drive * knee * knee * knee);
  return x - drive * x * x * x;
}

void add_noise(std::vector<double>& wet, const ChannelModel& model, uint64_t noise_draw) {
  double sigma = 0.0;
  if (model.noise_floor_dbfs.has_value()) {
    sigma = std::pow(10.0, *model.noise_floor_dbfs / 20.0);
  } else if (model.noise_snr_db.has_value()) {
    const double wet_rms = kernels::rms(wet);
    // All-zero sources fall back to a -40 dBFS floor so the SNR reference
    // stays defined.
    sigma = wet_rms > 0.0 ? wet_rms * std::pow(10.0, -*model.noise_snr_db / 20.0)
                          : std::pow(10.0, -40.0 / 20.0);
  } else {
    return;
  }
  std::mt19937_64 rng(mix64(model.seed, mix64(0x6e6f697365ull, noise_draw)));
  std::normal_distribution<double> noise(0.0, sigma);
  for (double& v : wet) v += noise(rng);
}

AudioClip finish_recording(std::vector<double> wet, const ChannelModel& model,
                           uint64_t noise_draw) {
  if (model.nonlinearity_drive > 0.0)
    for (double& v : wet) v = soft_clip(v, model.nonlinearity_drive);
  add_noise(wet, model, noise_draw);
  AudioClip rec;
  rec.sample_rate = model.sample_rate;
  rec.samples = std::move(wet);
  return rec;
}

void check_rate(const AudioClip& clip, const ChannelModel& model, const char* op) {
  if (clip.sample_rate != model.sample_rate)
    throw InvalidArgument(std::string(op) + ": source rate does not match the channel rate");
}

}  // namespace

std::vector<double> generate_rir(double distance_m, const ChannelModel& model, ChannelSide which) {
  if (distance_m <= 0.0) throw InvalidArgument("generate_rir: non-positive distance");
  if (model.sample_rate <= 0) throw InvalidArgument("generate_rir: non-positive sample rate");

  const int rate = model.sample_rate;
  const long long delay = std::llround(distance_m / model.speed_of_sound * rate);
  const double direct = 1.0 / std::max(distance_m, 0.1);

  if (model.reverb_rt60_s <= 0.0) {
    std::vector<double> h(static_cast<size_t>(delay) + 1, 0.0);
    h[static_cast<size_t>(delay)] = direct;
    return h;
  }

  // Envelope 10^(-3 t / rt60): -60 dB at rt60; keep the tail out to -80 dB.
  const double rt60 = model.reverb_rt60_s;
  const long long tail_len = static_cast<long long>(std::ceil(rt60 * rate * 80.0 / 60.0));
  std::vector<double> h(static_cast<size_t>(delay + 1 + tail_len), 0.0);
  h[static_cast<size_t>(delay)] = direct;

  const uint64_t tag = which == ChannelSide::Left ? 0x4c6566744368ull : 0x526967687443ull;
  std::mt19937_64 rng(mix64(model.seed, tag));
  std::normal_distribution<double> noise(0.0, 1.0);
  for (long long k = 1; k <= tail_len; ++k) {
    const double env = direct * std::pow(10.0, -3.0 * static_cast<double>(k) / (rt60 * rate));
    h[static_cast<size_t>(delay + k)] = env * noise(rng);
  }
  return h;
}

SessionReport simulate_single(const AudioClip& source, const ChannelModel& model,
                              ChannelSide which, uint64_t noise_draw) {
  check_rate(source, model, "simulate_single");
  const std::vector<double> h = generate_rir(model.source_distance(which), model, which);
  SessionReport report;
  report.recording = finish_recording(kernels::conv_full(source.samples, h), model, noise_draw);
  return report;
}

SessionReport simulate_dual(const AudioClip& left, const AudioClip& right,
                            const ChannelModel& model, uint64_t noise_draw) {
  check_rate(left, model, "simulate_dual");
  check_rate(right, model, "simulate_dual");

  // Both channels start at render index 0; the shorter source is tail-padded
  // so the renders share one clock.
  const size_t render_len = std::max(left.samples.size(), right.samples.size());
  std::vector<double> left_padded = left.samples;
  std::vector<double> right_padded = right.samples;
  left_padded.resize(render_len, 0.0);
  right_padded.resize(render_len, 0.0);

  const std::vector<double> h_left = generate_rir(model.source_distance(ChannelSide::Left),
                                                  model, ChannelSide::Left);
  const std::vector<double> h_right = generate_rir(model.source_distance(ChannelSide::Right),
                                                   model, ChannelSide::Right);
  std::vector<double> wet_left = kernels::conv_full(left_padded, h_left);
  const std::vector<double> wet_right = kernels::conv_full(right_padded, h_right);

  std::vector<double> wet(std::max(wet_left.size(), wet_right.size()), 0.0);
  for (size_t i = 0; i < wet.size(); ++i) {
    double v = 0.0;
    if (i < wet_left.size()) v = wet_left[i];
    if (i < wet_right.size()) v += wet_right[i];
    wet[i] = v;
  }

  SessionReport report;
  report.recording = finish_recording(std::move(wet), model, noise_draw);
  return report;
}

SessionReport SimulatorSession::play_record_single(const AudioClip& source, ChannelSide which) {
  return simulate_single(source, model_, which, call_index_++);
}

SessionReport SimulatorSession::play_record_dual(const AudioClip& left, const AudioClip& right) {
  return simulate_dual(left, right, model_, call_index_++);
}

namespace {

class FakeSession : public Session {
 public:
  explicit FakeSession(std::vector<FaultSpec> schedule) : schedule_(std::move(schedule)) {}

  SessionReport play_record_single(const AudioClip& source, ChannelSide) override {
    SessionReport report;
    report.recording = source;
    apply_fault(report);
    return report;
  }

  SessionReport play_record_dual(const AudioClip& left, const AudioClip& right) override {
    SessionReport report;
    report.recording.sample_rate = left.sample_rate;
    report.recording.samples.resize(std::max(left.samples.size(), right.samples.size()), 0.0);
    for (size_t i = 0; i < report.recording.samples.size(); ++i) {
      double v = 0.0;
      if (i < left.samples.size()) v = left.samples[i];
      if (i < right.samples.size()) v += right.samples[i];
      report.recording.samples[i] = v;
    }
    apply_fault(report);
    return report;
  }

 private:
  void apply_fault(SessionReport& report) {
    ++calls_;
    for (const FaultSpec& f : schedule_) {
      if (f.call_index == calls_) {
        report.overrun_lost = f.overrun_lost;
        report.underrun_lost = f.underrun_lost;
      }
    }
  }

  std::vector<FaultSpec> schedule_;
  uint64_t calls_ = 0;
};

}  // namespace

std::unique_ptr<Session> fake_session(std::vector<FaultSpec> schedule) {
  return std::make_unique<FakeSession>(std::move(schedule));
}

std::vector<FaultSpec> parse_fault_schedule(const std::string& text) {
  std::vector<FaultSpec> schedule;
  if (trim(text).empty()) return schedule;
  for (const std::string& item : split(text, ',')) {
    const std::string spec{trim(item)};
    if (spec.size() < 3 || (spec[0] != 'o' && spec[0] != 'u') || spec[1] != '@')
      throw FormatError("fault schedule: expected o@N or u@N, got '" + spec + "'");
    char* end = nullptr;
    const unsigned long long call = std::strtoull(spec.c_str() + 2, &end, 10);
    if (call == 0) throw FormatError("fault schedule: call indices are 1-based: '" + spec + "'");
    long long lost = 960;  // default loss, ~0.12 s at the working rate
    if (*end == '=') lost = std::strtoll(end + 1, nullptr, 10);
    if (lost <= 0) throw FormatError("fault schedule: lost sample count must be positive");
    FaultSpec f;
    f.call_index = call;
    if (spec[0] == 'o') f.overrun_lost = lost;
    else f.underrun_lost = lost;
    schedule.push_back(f);
  }
  return schedule;
}

namespace {

void apply_channel_kv(ChannelModel& m, const std::string& key, const std::string& value) {
  const auto as_double = [&] {
    char* end = nullptr;
    const double v = std::strtod(value.c_str(), &end);
    if (end == value.c_str() || *end != '\0')
      throw FormatError("channel config: bad number for " + key + ": '" + value + "'");
    return v;
  };
  if (key == "mic_distance_m") m.mic_distance_m = as_double();
  else if (key == "source_spacing_m") m.source_spacing_m = as_double();
  else if (key == "reverb_rt60_s") m.reverb_rt60_s = as_double();
  else if (key == "noise_snr_db") {
    if (value == "off" || value == "none") m.noise_snr_db.reset();
    else m.noise_snr_db = as_double();
  } else if (key == "noise_floor_dbfs") {
    if (value == "off" || value == "none") m.noise_floor_dbfs.reset();
    else m.noise_floor_dbfs = as_double();
  } else if (key == "nonlinearity_drive") m.nonlinearity_drive = as_double();
  else if (key == "speed_of_sound") m.speed_of_sound = as_double();
  else if (key == "seed") m.seed = std::strtoull(value.c_str(), nullptr, 10);
  else if (key == "sample_rate") m.sample_rate = static_cast<int>(as_double());
  else throw FormatError("channel config: unknown key '" + key + "'");
}

ChannelModel parse_channel_config(std::istream& in) {
  ChannelModel m;
  std::string line;
  while (std::getline(in, line)) {
    const std::string_view t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const size_t eq = t.find('=');
    if (eq == std::string_view::npos)
      throw FormatError("channel config: expected key = value, got '" + std::string(t) + "'");
    const std::string key{trim(t.substr(0, eq))};
    const std::string value{trim(t.substr(eq + 1))};
    apply_channel_kv(m, key, value);
  }
  if (m.mic_distance_m <= 0.0) throw FormatError("channel config: mic_distance_m must be positive");
  if (m.reverb_rt60_s < 0.0) throw FormatError("channel config: reverb_rt60_s must be >= 0");
  if (m.sample_rate <= 0) throw FormatError("channel config: sample_rate must be positive");
  return m;
}

}  // namespace

ChannelModel load_channel_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("channel config: cannot open: " + path.string());
  return parse_channel_config(f);
}

ChannelModel channel_config_from_string(const std::string& text) {
  std::istringstream in(text);
  return parse_channel_config(in);
}

std::string channel_config_line(const ChannelModel& m) {
  std::ostringstream out;
  out << "mic_distance_m=" << fmt_f6(m.mic_distance_m)
      << " source_spacing_m=" << fmt_f6(m.source_spacing_m)
      << " reverb_rt60_s=" << fmt_f6(m.reverb_rt60_s)
      << " noise_snr_db=" << (m.noise_snr_db ? fmt_f6(*m.noise_snr_db) : "off")
      << " noise_floor_dbfs=" << (m.noise_floor_dbfs ? fmt_f6(*m.noise_floor_dbfs) : "off")
      << " nonlinearity_drive=" << fmt_f6(m.nonlinearity_drive)
      << " speed_of_sound=" << fmt_f6(m.speed_of_sound)
      << " seed=" << m.seed
      << " sample_rate=" << m.sample_rate;
  return out.str();
}

}  // namespace mixforge
