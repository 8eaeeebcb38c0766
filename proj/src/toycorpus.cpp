#include "mixforge/toycorpus.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "mixforge/audio.hpp"
#include "mixforge/errors.hpp"
#include "mixforge/util.hpp"

namespace mixforge {

namespace fs = std::filesystem;

namespace {

struct Voice {
  double f0 = 120.0;
  double formant1 = 500.0;
  double formant2 = 1500.0;
};

// Harmonic stack with formant-shaped amplitudes, raised-cosine syllable
// envelope and slow vibrato. Crude, but T-F sparse the way speech is.
void render_syllable(std::vector<double>& out, size_t start, size_t len, const Voice& voice,
                     int rate, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double f0 = voice.f0 * (0.94 + 0.12 * unit(rng));
  const double vibrato_hz = 4.0 + 2.0 * unit(rng);
  const double vibrato_depth = 0.015;
  const int harmonics = static_cast<int>(std::min(3400.0, rate / 2.0 * 0.85) / f0);

  std::vector<double> amp(static_cast<size_t>(harmonics) + 1, 0.0);
  for (int h = 1; h <= harmonics; ++h) {
    const double freq = h * f0;
    const double r1 = (freq - voice.formant1) / 180.0;
    const double r2 = (freq - voice.formant2) / 260.0;
    amp[static_cast<size_t>(h)] = (1.0 / (1.0 + r1 * r1) + 0.6 / (1.0 + r2 * r2)) / h * 2.0;
  }

  double phase = unit(rng) * 2.0 * std::numbers::pi;
  for (size_t i = 0; i < len && start + i < out.size(); ++i) {
    const double t = static_cast<double>(i) / rate;
    const double env = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi *
                                            std::min(1.0, static_cast<double>(i) / len));
    const double inst_f0 =
        f0 * (1.0 + vibrato_depth * std::sin(2.0 * std::numbers::pi * vibrato_hz * t));
    phase += 2.0 * std::numbers::pi * inst_f0 / rate;
    double v = 0.0;
    for (int h = 1; h <= harmonics; ++h) v += amp[static_cast<size_t>(h)] * std::sin(h * phase);
    out[start + i] += env * v;
  }
}

AudioClip render_sentence(const Voice& voice, double duration_s, int rate, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  AudioClip clip;
  clip.sample_rate = rate;
  clip.samples.assign(static_cast<size_t>(duration_s * rate), 0.0);

  size_t pos = static_cast<size_t>((0.02 + 0.05 * unit(rng)) * rate);
  while (pos < clip.samples.size()) {
    const size_t syllable = static_cast<size_t>((0.12 + 0.16 * unit(rng)) * rate);
    render_syllable(clip.samples, pos, syllable, voice, rate, rng);
    pos += syllable + static_cast<size_t>((0.04 + 0.12 * unit(rng)) * rate);
  }

  double peak = 0.0;
  for (double v : clip.samples) peak = std::max(peak, std::abs(v));
  if (peak > 0.0) {
    const double target = 0.3 + 0.25 * unit(rng);
    for (double& v : clip.samples) v *= target / peak;
  }
  return clip;
}

}  // namespace

void make_toy_corpus(const fs::path& root, const ToyCorpusOptions& opts) {
  if (opts.dialects < 1 || opts.speakers_per_dialect < 1 || opts.sentences_per_speaker < 1)
    throw InvalidArgument("make_toy_corpus: counts must be positive");
  if (opts.sample_rate <= 0) throw InvalidArgument("make_toy_corpus: bad sample rate");
  if (opts.min_duration_s <= 0 || opts.max_duration_s < opts.min_duration_s)
    throw InvalidArgument("make_toy_corpus: bad duration range");

  std::mt19937_64 rng(mix64(opts.seed, 0x636f72707573ull));
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  int speaker_serial = 0;
  for (int d = 0; d < opts.dialects; ++d) {
    const std::string dialect = "DR" + std::to_string(d + 1);
    for (int s = 0; s < opts.speakers_per_dialect; ++s, ++speaker_serial) {
      const char gender = speaker_serial % 2 == 0 ? 'F' : 'M';
      const std::string speaker = std::string(1, gender) +
                                  static_cast<char>('A' + d % 26) +
                                  static_cast<char>('A' + s % 26) + std::to_string(speaker_serial % 10);
      Voice voice;
      voice.f0 = (gender == 'F' ? 170.0 : 95.0) + 60.0 * unit(rng);
      voice.formant1 = 350.0 + 400.0 * unit(rng);
      voice.formant2 = 1000.0 + 1100.0 * unit(rng);

      const fs::path dir = root / dialect / speaker;
      std::error_code ec;
      fs::create_directories(dir, ec);
      if (!fs::is_directory(dir))
        throw IoError("make_toy_corpus: cannot create " + dir.string());

      for (int u = 0; u < opts.sentences_per_speaker; ++u) {
        // Speaker-unique sentence ids, like TIMIT's SI utterances, so any two
        // speakers' files are pairable under the sentence-diversity rule.
        const std::string sentence =
            "SI" + std::to_string(1000 + speaker_serial * opts.sentences_per_speaker + u);
        const double duration =
            opts.min_duration_s + (opts.max_duration_s - opts.min_duration_s) * unit(rng);
        const uint64_t sentence_seed =
            mix64(opts.seed, fnv1a64(dialect + "_" + speaker + "_" + sentence));
        write_wav(render_sentence(voice, duration, opts.sample_rate, sentence_seed),
                  dir / (sentence + ".wav"));
      }
    }
  }
}

}  // namespace mixforge
