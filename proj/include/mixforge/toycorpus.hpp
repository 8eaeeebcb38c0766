#ifndef MIXFORGE_TOYCORPUS_HPP_
#define MIXFORGE_TOYCORPUS_HPP_

#include <cstdint>
#include <filesystem>

namespace mixforge {

// Parameters for the bundled speech-like test corpus: harmonic "syllables"
// with per-speaker pitch and formants, separated by short pauses, laid out
// TIMIT-style as root/<dialect>/<speaker>/<sentence>.wav.
struct ToyCorpusOptions {
  int dialects = 2;
  int speakers_per_dialect = 3;
  int sentences_per_speaker = 3;
  double min_duration_s = 2.0;
  double max_duration_s = 3.0;
  int sample_rate = 16000;
  uint64_t seed = 1;
};

void make_toy_corpus(const std::filesystem::path& root, const ToyCorpusOptions& opts);

}  // namespace mixforge

#endif  // MIXFORGE_TOYCORPUS_HPP_
