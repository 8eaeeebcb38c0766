#ifndef MIXFORGE_PIPELINE_HPP_
#define MIXFORGE_PIPELINE_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "mixforge/audio.hpp"
#include "mixforge/channel.hpp"
#include "mixforge/planner.hpp"

namespace mixforge {

struct ManifestEntry {
  std::string mixture_name;
  // Relative to the dataset root; empty for failed entries.
  std::string gts1_path;
  std::string gts2_path;
  std::string mix_path;
  int attempts_gts1 = 0;
  int attempts_gts2 = 0;
  int attempts_mix = 0;
  bool ok = false;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  std::string channel_config_snapshot;  // "none" when not built via simulator
  uint64_t plan_seed = 0;
  int working_rate = kWorkingRate;
};

struct BuildOptions {
  int max_attempts = 5;
  int working_rate = kWorkingRate;
  int jobs = 1;  // simulator builds only; session builds are sequential
  // Per-entry common downscale target so the 1/d gain and two-source sums
  // survive the PCM16 boundary unclipped. Never scales up.
  double peak_target = 0.98;
};

// Algorithm-1 build against an arbitrary session: per entry, resample both
// sources to the working rate, apply the plan gains, then record gts1, gts2
// and the dual-channel mixture, retrying any call whose report is not clean
// up to max_attempts. Entries that exhaust the budget are marked failed and
// write no files. Strictly sequential (hardware sessions are exclusive).
DatasetManifest build_dataset(const MixturePlan& plan, Session& session,
                              const std::filesystem::path& out_root, const BuildOptions& opts);

// Simulator build: one seeded session per entry (seed derived from the plan
// seed and the mixture name), so results are reproducible and independent of
// the processing order; parallel across entries when opts.jobs > 1.
DatasetManifest build_dataset_simulated(const MixturePlan& plan, const ChannelModel& model,
                                        const std::filesystem::path& out_root,
                                        const BuildOptions& opts);

// Synthetic counterpart: RealMix holds instantaneous (Eq.-style digital) sums
// and GTS holds the gain-scaled resampled sources, zero-padded to the mixture
// length. No session, no retries.
DatasetManifest build_dataset_synthetic(const MixturePlan& plan,
                                        const std::filesystem::path& out_root,
                                        const BuildOptions& opts);

// Zero-pads all three clips to the longest length. Rates must match.
void trim_align(AudioClip& gts1, AudioClip& gts2, AudioClip& mix);

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);
DatasetManifest load_manifest(const std::filesystem::path& path);

inline std::filesystem::path manifest_path(const std::filesystem::path& dataset_root) {
  return dataset_root / "manifest.tsv";
}

}  // namespace mixforge

#endif  // MIXFORGE_PIPELINE_HPP_
