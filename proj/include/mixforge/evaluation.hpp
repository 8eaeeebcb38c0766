#ifndef MIXFORGE_EVALUATION_HPP_
#define MIXFORGE_EVALUATION_HPP_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mixforge/channel.hpp"
#include "mixforge/masks.hpp"
#include "mixforge/pipeline.hpp"
#include "mixforge/planner.hpp"

namespace mixforge {

// One scored (mixture, mask, speaker) triple. mask "none" rows score the
// unprocessed mixture against each ground truth - the no-separation baseline.
struct ValidationRow {
  std::string mixture_name;
  std::string mask;
  int speaker = 1;  // 1 or 2
  double si_sdr_db = 0.0;
  std::optional<double> pesq;
};

struct EvalOptions {
  std::vector<MaskKind> kinds = {MaskKind::Ibm, MaskKind::Irm, MaskKind::Wfm};
  std::optional<std::string> pesq_cmd;
  bool include_baseline = true;
  int jobs = 1;
};

// Scores every ok manifest entry under dataset_root. Rows come out grouped
// by mixture in manifest order, baseline first, then the requested kinds.
std::vector<ValidationRow> validate_dataset(const std::filesystem::path& dataset_root,
                                            const EvalOptions& opts);

// CSV `mixture_name,mask,speaker,si_sdr_db,pesq` plus one aggregate row per
// mask kind (mean over all speakers and mixtures).
void write_validation_csv(const std::vector<ValidationRow>& rows, const std::filesystem::path& path);
std::string validation_csv_to_string(const std::vector<ValidationRow>& rows);

// Mean SI-SDR over all rows of one mask kind; throws if there are none.
double mean_si_sdr(const std::vector<ValidationRow>& rows, const std::string& mask);
std::optional<double> mean_pesq(const std::vector<ValidationRow>& rows, const std::string& mask);

struct SweepRow {
  double distance_m = 0.0;
  std::string mask;
  double mean_si_sdr_db = 0.0;
  std::optional<double> mean_pesq;
  int n_mixtures = 0;
  // Extra columns: summed squared direct-path gain over both channels, and
  // the unprocessed-mixture baseline at this distance.
  double direct_path_energy = 0.0;
  double mean_unprocessed_si_sdr_db = 0.0;
};

struct SweepOptions {
  std::vector<double> distances_m;
  std::vector<MaskKind> kinds = {MaskKind::Wfm};
  ChannelModel base_model;
  std::filesystem::path workdir;
  std::optional<std::string> pesq_cmd;
  int jobs = 1;
  int max_attempts = 5;
  int working_rate = kWorkingRate;
};

// Rebuilds the simulated dataset at every distance (same plan, same per-entry
// seeds; distance is the only varying factor), validates it, and aggregates.
// Rows are ordered by mask kind, then by increasing distance.
std::vector<SweepRow> run_sweep(const MixturePlan& plan, const SweepOptions& opts);

// CSV `distance_m,mask,mean_si_sdr_db,mean_pesq,n,direct_path_energy,
// mean_unprocessed_si_sdr_db`.
void write_sweep_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path);
std::string sweep_csv_to_string(const std::vector<SweepRow>& rows);

double direct_path_energy(const ChannelModel& model);

}  // namespace mixforge

#endif  // MIXFORGE_EVALUATION_HPP_
