#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "mixforge/channel.hpp"
#include "mixforge/errors.hpp"
#include "mixforge/kernels.hpp"
#include "reference.hpp"

using namespace mixforge;
namespace fs = std::filesystem;

namespace {

ChannelModel quiet_model() {
  ChannelModel m;
  m.noise_snr_db.reset();
  m.noise_floor_dbfs.reset();
  m.reverb_rt60_s = 0.0;
  return m;
}

AudioClip impulse(long long n, int rate) {
  AudioClip c;
  c.sample_rate = rate;
  c.samples.assign(static_cast<size_t>(n), 0.0);
  c.samples[0] = 1.0;
  return c;
}

}  // namespace

TEST_CASE("anechoic rir is a single 1/d tap at the propagation delay") {
  const ChannelModel m = quiet_model();
  const std::vector<double> h = generate_rir(1.0, m, ChannelSide::Left);
  REQUIRE(h.size() == 24);  // round(8000/343) = 23, plus index 0
  for (size_t i = 0; i < 23; ++i) CHECK(h[i] == 0.0);
  CHECK(h[23] == 1.0);

  const std::vector<double> h2 = generate_rir(2.0, m, ChannelSide::Left);
  CHECK(h2[static_cast<size_t>(std::llround(2.0 / 343.0 * 8000))] == 0.5);  // exact 1/d halving
}

TEST_CASE("direct tap follows 1/d exactly over the sweep set and decreases monotonically") {
  const ChannelModel m = quiet_model();
  double prev = 1e9;
  for (double d : {0.5, 1.0, 1.5, 2.0, 2.5, 3.0}) {
    const std::vector<double> h = generate_rir(d, m, ChannelSide::Right);
    const size_t delay = static_cast<size_t>(std::llround(d / 343.0 * 8000));
    CHECK(std::abs(h[delay] - 1.0 / d) <= 1e-12);
    CHECK(h[delay] < prev);
    prev = h[delay];
  }
}

TEST_CASE("reverberant tail decays 60 dB at rt60 within 1 dB") {
  ChannelModel m = quiet_model();
  m.reverb_rt60_s = 0.3;
  m.seed = 5;
  const std::vector<double> h = generate_rir(1.0, m, ChannelSide::Left);
  const size_t delay = 23;
  REQUIRE(h.size() > delay + static_cast<size_t>(0.3 * 8000));

  // RMS of the tail in a +-10 ms window around rt60 vs the direct tap.
  const size_t center = delay + static_cast<size_t>(0.3 * 8000);
  const size_t half = 80;
  double acc = 0.0;
  for (size_t i = center - half; i <= center + half; ++i) acc += h[i] * h[i];
  const double rms = std::sqrt(acc / (2 * half + 1));
  const double drop_db = 20.0 * std::log10(rms / h[delay]);
  CHECK(drop_db <= -59.0);
  CHECK(drop_db >= -61.0);
}

TEST_CASE("rir generation is deterministic and rejects bad distances") {
  ChannelModel m = quiet_model();
  m.reverb_rt60_s = 0.2;
  m.seed = 9;
  CHECK(generate_rir(1.3, m, ChannelSide::Left) == generate_rir(1.3, m, ChannelSide::Left));
  CHECK(generate_rir(1.3, m, ChannelSide::Left) != generate_rir(1.3, m, ChannelSide::Right));
  CHECK_THROWS_AS(generate_rir(0.0, m, ChannelSide::Left), InvalidArgument);
  CHECK_THROWS_AS(generate_rir(-1.0, m, ChannelSide::Left), InvalidArgument);
}

TEST_CASE("impulse through the noise-free simulator returns the rir") {
  const ChannelModel m = quiet_model();
  const SessionReport rep = simulate_single(impulse(100, 8000), m, ChannelSide::Left);
  CHECK(rep.clean());
  const std::vector<double> h = generate_rir(m.source_distance(ChannelSide::Left), m, ChannelSide::Left);
  REQUIRE(rep.recording.samples.size() == 100 + h.size() - 1);
  for (size_t i = 0; i < h.size(); ++i) CHECK(rep.recording.samples[i] == h[i]);
}

TEST_CASE("zero source with an SNR configured yields the -40 dBFS fallback noise floor") {
  ChannelModel m = quiet_model();
  m.noise_snr_db = 25.0;
  AudioClip zeros;
  zeros.sample_rate = 8000;
  zeros.samples.assign(20000, 0.0);
  const SessionReport rep = simulate_single(zeros, m, ChannelSide::Left);
  const double rms = kernels::rms(rep.recording.samples);
  CHECK(rms == doctest::Approx(0.01).epsilon(0.05));
}

TEST_CASE("pure tone goes through as a delayed scaled tone") {
  const ChannelModel m = quiet_model();
  const AudioClip src = ref::tone(500.0, 0.5, 8000, 0.5);
  const SessionReport rep = simulate_single(src, m, ChannelSide::Left);

  // Cross-correlation oracle: lag of the peak equals the rir delay, peak
  // ratio equals the direct gain.
  const std::vector<double> h = generate_rir(m.source_distance(ChannelSide::Left), m, ChannelSide::Left);
  const size_t expect_delay = h.size() - 1;
  double best = -1.0;
  size_t best_lag = 0;
  for (size_t lag = 0; lag < 60; ++lag) {
    double acc = 0.0;
    for (size_t i = 0; i + lag < rep.recording.samples.size() && i < src.samples.size(); ++i)
      acc += src.samples[i] * rep.recording.samples[i + lag];
    if (acc > best) {
      best = acc;
      best_lag = lag;
    }
  }
  CHECK(best_lag == expect_delay);
  const double gain = kernels::rms({rep.recording.samples.data() + best_lag, src.samples.size() - best_lag}) /
                      kernels::rms({src.samples.data(), src.samples.size() - best_lag});
  CHECK(gain == doctest::Approx(h.back()).epsilon(1e-3));
}

TEST_CASE("dual with a silent right channel equals single left, including the noise draw") {
  ChannelModel m = quiet_model();
  m.noise_snr_db = 20.0;
  m.seed = 77;
  const AudioClip left = ref::random_clip(4000, 8000, 301, 0.4);
  AudioClip right;
  right.sample_rate = 8000;
  right.samples.assign(4000, 0.0);

  const SessionReport dual = simulate_dual(left, right, m, 3);
  const SessionReport single = simulate_single(left, m, ChannelSide::Left, 3);
  CHECK(dual.recording.samples == single.recording.samples);
}

TEST_CASE("opposite-phase sources through identical anechoic paths cancel exactly") {
  const ChannelModel m = quiet_model();  // rt60 = 0: left/right rirs are identical
  const AudioClip x = ref::random_clip(2000, 8000, 302, 0.4);
  AudioClip neg = x;
  for (double& v : neg.samples) v = -v;
  const SessionReport rep = simulate_dual(x, neg, m);
  for (double v : rep.recording.samples) CHECK(v == 0.0);
}

TEST_CASE("noise-free dual equals the sum of the two singles exactly") {
  ChannelModel m = quiet_model();
  m.reverb_rt60_s = 0.15;
  m.seed = 41;
  const AudioClip a = ref::random_clip(3000, 8000, 303, 0.4);
  const AudioClip b = ref::random_clip(3000, 8000, 304, 0.4);

  const SessionReport dual = simulate_dual(a, b, m);
  const SessionReport sa = simulate_single(a, m, ChannelSide::Left);
  const SessionReport sb = simulate_single(b, m, ChannelSide::Right);
  REQUIRE(dual.recording.samples.size() == sa.recording.samples.size());
  for (size_t i = 0; i < dual.recording.samples.size(); ++i)
    CHECK(dual.recording.samples[i] == sa.recording.samples[i] + sb.recording.samples[i]);
}

TEST_CASE("dual recording matches the brute-force convolution oracle") {
  ChannelModel m = quiet_model();
  m.reverb_rt60_s = 0.1;
  m.seed = 42;
  const AudioClip a = ref::random_clip(1500, 8000, 305, 0.4);
  const AudioClip b = ref::random_clip(2500, 8000, 306, 0.4);

  const SessionReport dual = simulate_dual(a, b, m);

  std::vector<double> a_pad = a.samples, b_pad = b.samples;
  a_pad.resize(2500, 0.0);
  const std::vector<double> ya = ref::conv_full_serial(
      a_pad, generate_rir(m.source_distance(ChannelSide::Left), m, ChannelSide::Left));
  const std::vector<double> yb = ref::conv_full_serial(
      b_pad, generate_rir(m.source_distance(ChannelSide::Right), m, ChannelSide::Right));
  REQUIRE(dual.recording.samples.size() == ya.size());
  double max_err = 0.0;
  for (size_t i = 0; i < ya.size(); ++i)
    max_err = std::max(max_err, std::abs(dual.recording.samples[i] - (ya[i] + yb[i])));
  CHECK(max_err < 1e-9);
}

TEST_CASE("same model seed gives bit-identical recordings") {
  ChannelModel m = quiet_model();
  m.noise_snr_db = 18.0;
  m.reverb_rt60_s = 0.2;
  m.seed = 55;
  const AudioClip a = ref::random_clip(2000, 8000, 307, 0.4);
  const AudioClip b = ref::random_clip(2000, 8000, 308, 0.4);
  CHECK(simulate_dual(a, b, m, 1).recording.samples ==
        simulate_dual(a, b, m, 1).recording.samples);
  CHECK(simulate_dual(a, b, m, 1).recording.samples !=
        simulate_dual(a, b, m, 2).recording.samples);  // fresh draw per call
}

TEST_CASE("dual start synchronization: equal-distance impulses land on the same index") {
  const ChannelModel m = quiet_model();
  const AudioClip imp = impulse(50, 8000);
  const SessionReport rep = simulate_dual(imp, imp, m);
  size_t first_nonzero = 0;
  while (first_nonzero < rep.recording.samples.size() &&
         rep.recording.samples[first_nonzero] == 0.0)
    ++first_nonzero;
  const std::vector<double> h = generate_rir(m.source_distance(ChannelSide::Left), m, ChannelSide::Left);
  CHECK(first_nonzero == h.size() - 1);
  // Amplitude doubled: both direct taps coincide, zero inter-channel skew.
  CHECK(rep.recording.samples[first_nonzero] ==
        doctest::Approx(2.0 / m.source_distance(ChannelSide::Left)).epsilon(1e-12));
}

TEST_CASE("soft-clip nonlinearity saturates and stays monotone") {
  ChannelModel m = quiet_model();
  m.nonlinearity_drive = 0.5;
  AudioClip ramp;
  ramp.sample_rate = 8000;
  for (int i = -100; i <= 100; ++i) ramp.samples.push_back(i / 50.0);
  const SessionReport rep = simulate_single(ramp, m, ChannelSide::Left);
  // The simulator applies the clip after the 1/d convolution; output must be
  // bounded by the cubic's saturation value.
  const double knee = 1.0 / std::sqrt(3.0 * 0.5);
  const double sat = knee - 0.5 * knee * knee * knee;
  for (double v : rep.recording.samples) CHECK(std::abs(v) <= sat + 1e-12);
}

TEST_CASE("simulator rejects rate mismatches") {
  const ChannelModel m = quiet_model();
  AudioClip wrong;
  wrong.sample_rate = 44100;
  wrong.samples.assign(100, 0.1);
  CHECK_THROWS_AS(simulate_single(wrong, m, ChannelSide::Left), InvalidArgument);
  CHECK_THROWS_AS(simulate_dual(wrong, wrong, m), InvalidArgument);
}

TEST_CASE("fake session reports scheduled faults then goes clean") {
  auto session = fake_session({{1, 960, 0}});
  const AudioClip src = ref::random_clip(100, 8000, 309, 0.4);
  const SessionReport r1 = session->play_record_single(src, ChannelSide::Left);
  CHECK(r1.overrun_lost > 0);
  CHECK(!r1.clean());
  CHECK(r1.recording.samples == src.samples);  // audio still passes through
  const SessionReport r2 = session->play_record_single(src, ChannelSide::Left);
  CHECK(r2.clean());

  auto clean = fake_session({});
  CHECK(clean->play_record_single(src, ChannelSide::Left).clean());
  CHECK(clean->play_record_dual(src, src).clean());

  auto two_faults = fake_session({{1, 0, 128}, {2, 0, 64}});
  CHECK(two_faults->play_record_single(src, ChannelSide::Left).underrun_lost == 128);
  CHECK(two_faults->play_record_single(src, ChannelSide::Left).underrun_lost == 64);
  CHECK(two_faults->play_record_single(src, ChannelSide::Left).clean());
}

TEST_CASE("fault schedules parse from text") {
  const std::vector<FaultSpec> sched = parse_fault_schedule("o@1,u@3=128");
  REQUIRE(sched.size() == 2);
  CHECK(sched[0].call_index == 1);
  CHECK(sched[0].overrun_lost > 0);
  CHECK(sched[0].underrun_lost == 0);
  CHECK(sched[1].call_index == 3);
  CHECK(sched[1].underrun_lost == 128);
  CHECK(parse_fault_schedule("").empty());
  CHECK_THROWS_AS(parse_fault_schedule("x@1"), FormatError);
  CHECK_THROWS_AS(parse_fault_schedule("o@0"), FormatError);
}

TEST_CASE("channel config files parse, with flags for disabled noise") {
  const fs::path p = fs::temp_directory_path() / "mixforge_channel_cfg.txt";
  {
    std::ofstream f(p);
    f << "# comment line\n";
    f << "mic_distance_m = 2.5\n";
    f << "source_spacing_m = 0.6\n";
    f << "reverb_rt60_s = 0.25\n";
    f << "noise_snr_db = 25\n";
    f << "noise_floor_dbfs = off\n";
    f << "nonlinearity_drive = 0.1\n";
    f << "seed = 1234\n";
  }
  const ChannelModel m = load_channel_config(p);
  CHECK(m.mic_distance_m == 2.5);
  CHECK(m.source_spacing_m == 0.6);
  CHECK(m.reverb_rt60_s == 0.25);
  REQUIRE(m.noise_snr_db.has_value());
  CHECK(*m.noise_snr_db == 25.0);
  CHECK(!m.noise_floor_dbfs.has_value());
  CHECK(m.nonlinearity_drive == 0.1);
  CHECK(m.seed == 1234);
  CHECK(m.sample_rate == 8000);

  CHECK(m.source_distance(ChannelSide::Left) ==
        doctest::Approx(std::hypot(0.3, 2.5)).epsilon(1e-15));

  CHECK_THROWS_AS(channel_config_from_string("bogus_key = 1\n"), FormatError);
  CHECK_THROWS_AS(channel_config_from_string("mic_distance_m = -1\n"), FormatError);
  CHECK_THROWS_AS(channel_config_from_string("no equals sign"), FormatError);
  CHECK_THROWS_AS(load_channel_config(p.parent_path() / "missing_cfg.txt"), IoError);

  // The snapshot line round-trips through the parser.
  const ChannelModel again = channel_config_from_string([&] {
    std::string line = channel_config_line(m);
    for (char& c : line)
      if (c == ' ') c = '\n';
    return line;
  }());
  CHECK(again.mic_distance_m == m.mic_distance_m);
  CHECK(again.seed == m.seed);
  CHECK(again.noise_snr_db == m.noise_snr_db);
}
