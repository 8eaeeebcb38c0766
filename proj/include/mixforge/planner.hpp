#ifndef MIXFORGE_PLANNER_HPP_
#define MIXFORGE_PLANNER_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mixforge/audio.hpp"

namespace mixforge {

// One corpus wav, renamed TIMIT-style: dialect region, speaker ID and
// sentence ID combined into a canonical name like "DR4_FALK0_SA1".
struct SourceFile {
  std::string dialect;
  std::string speaker_id;
  std::string sentence_id;
  std::optional<char> gender;  // leading F/M of the speaker ID, when present
  std::filesystem::path path;
  long long duration = 0;  // samples at the working rate

  std::string canonical_name() const { return dialect + "_" + speaker_id + "_" + sentence_id; }
};

struct PlanEntry {
  SourceFile left;
  SourceFile right;
  std::string mixture_name;  // canonical(left) + "__" + canonical(right)
  double gain_left_db = 0.0;
  double gain_right_db = 0.0;
};

struct MixturePlan {
  std::vector<PlanEntry> entries;
  uint64_t seed = 0;
};

// Walks root/<dialect>/<speaker>/<sentence>.wav; durations come from wav
// headers rescaled to the working rate. Output is sorted by canonical name.
std::vector<SourceFile> scan_corpus(const std::filesystem::path& root, int working_rate);

struct PlannerOptions {
  int count = 0;
  uint64_t seed = 0;
  double max_len_ratio = 1.5;
  int max_uses_per_speaker = 4;
  // When nonzero, each entry gets independent uniform gains in
  // [-gain_jitter_db, +gain_jitter_db] instead of 0 dB / 0 dB.
  double gain_jitter_db = 0.0;
};

// Greedy round-robin over (dialect, speaker) buckets with length-closest
// partner selection and seeded tie-breaking. Hard constraints: distinct
// speakers, distinct files, distinct sentence IDs per pair, per-speaker use
// caps; the duration-ratio cap applies whenever it is satisfiable.
MixturePlan build_mixture_list(const std::vector<SourceFile>& files, const PlannerOptions& opts);

void save_plan(const MixturePlan& plan, const std::filesystem::path& path);
std::string plan_to_string(const MixturePlan& plan);
MixturePlan load_plan(const std::filesystem::path& path);

// Stable per-entry seed used by the pipeline and the sweep so that rebuilds
// and distance variants reuse identical noise draws.
uint64_t entry_seed(uint64_t plan_seed, const std::string& mixture_name);

}  // namespace mixforge

#endif  // MIXFORGE_PLANNER_HPP_
