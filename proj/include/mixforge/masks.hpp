#ifndef MIXFORGE_MASKS_HPP_
#define MIXFORGE_MASKS_HPP_

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mixforge/audio.hpp"
#include "mixforge/spectral.hpp"

namespace mixforge {

enum class MaskKind { Ibm, Irm, Wfm, Soft };

std::string mask_kind_name(MaskKind kind);
MaskKind mask_kind_from_name(const std::string& name);

// Real-valued T-F mask in [0, 1], same shape and storage order as its
// reference spectrogram.
struct Mask {
  std::vector<double> values;
  int n_bins = 0;
  int n_frames = 0;
  MaskKind kind = MaskKind::Soft;

  double& at(int f, int t) { return values[static_cast<size_t>(t) * n_bins + f]; }
  double at(int f, int t) const { return values[static_cast<size_t>(t) * n_bins + f]; }
};

// Ideal binary masks. Strict inequality per speaker: ties leave both masks
// zero at that bin.
std::pair<Mask, Mask> ibm(const Spectrogram& s1, const Spectrogram& s2);

// Ideal ratio masks |S_i| / (|S_1| + |S_2|); a zero denominator yields 1/2
// for both speakers so the pair still sums to one.
std::pair<Mask, Mask> irm(const Spectrogram& s1, const Spectrogram& s2);

// Wiener-filter-like masks |S_i|^2 / (|S_1|^2 + |S_2|^2); same zero
// convention as irm.
std::pair<Mask, Mask> wfm(const Spectrogram& s1, const Spectrogram& s2);

// istft(recombine(|M| .* mask, angle(M))), truncated to the mixture's
// original length.
AudioClip apply_and_reconstruct(const Spectrogram& mix, const Mask& mask);

struct ValidationRecord {
  double si_sdr_db[2] = {0.0, 0.0};
  std::optional<double> pesq[2];
};

// External PESQ hook configuration; see metrics::pesq_external for the
// template contract.
struct PesqHook {
  std::string command_template;
};

// Ground-truth quality check: builds masks of the requested kind from the
// ground-truth spectrograms, reconstructs each speaker from the mixture, and
// scores the estimates against the ground truths. Clips must already be
// aligned and equal length (pipeline trim_align).
ValidationRecord validate_ground_truths(const AudioClip& gts1, const AudioClip& gts2,
                                        const AudioClip& mix, MaskKind kind,
                                        const PesqHook* pesq_hook = nullptr);

}  // namespace mixforge

#endif  // MIXFORGE_MASKS_HPP_
