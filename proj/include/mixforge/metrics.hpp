#ifndef MIXFORGE_METRICS_HPP_
#define MIXFORGE_METRICS_HPP_

#include <optional>
#include <string>
#include <utility>

#include "mixforge/audio.hpp"

namespace mixforge {

// SI-SDR is mathematically unbounded; exact reconstructions are reported at
// +kSiSdrCap and fully orthogonal estimates at -kSiSdrCap so aggregates stay
// finite.
inline constexpr double kSiSdrCap = 120.0;

enum class Permutation { Identity, Swapped };

struct EvalResult {
  double si_sdr_db = 0.0;
  Permutation permutation = Permutation::Identity;
  std::optional<double> pesq;
};

// Instantaneous (sample-wise) mixing after per-source dB gains; the shorter
// clip is zero-padded to the longer.
AudioClip mix_synthetic(const AudioClip& s1, const AudioClip& s2,
                        std::pair<double, double> gains_db = {0.0, 0.0});

// Scale-invariant signal-to-distortion ratio in dB. Both signals are
// mean-subtracted; the estimate is projected onto the reference before the
// error is measured.
double si_sdr(const AudioClip& reference, const AudioClip& estimate);

struct PermutationResult {
  EvalResult first;
  EvalResult second;
  Permutation chosen = Permutation::Identity;
};

// Evaluates both output-to-reference assignments and keeps the one with the
// higher mean SI-SDR; ties resolve to identity.
PermutationResult best_permutation(const AudioClip& ref1, const AudioClip& ref2,
                                   const AudioClip& est1, const AudioClip& est2);

// Runs an external PESQ tool. The template must contain {ref} and {deg}
// placeholders; the score is the last float token on stdout. A missing or
// failing tool yields an empty result, never an abort.
std::optional<double> pesq_external(const std::filesystem::path& reference_path,
                                    const std::filesystem::path& estimate_path,
                                    const std::string& command_template);

}  // namespace mixforge

#endif  // MIXFORGE_METRICS_HPP_
