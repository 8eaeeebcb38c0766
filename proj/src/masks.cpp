#include "mixforge/masks.hpp"

#include <unistd.h>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "mixforge/errors.hpp"
#include "mixforge/metrics.hpp"
#include "mixforge/util.hpp"

namespace mixforge {

namespace {

void check_shapes(const Spectrogram& s1, const Spectrogram& s2, const char* op) {
  if (!s1.same_shape(s2)) throw InvalidArgument(std::string(op) + ": shape mismatch");
}

std::pair<Mask, Mask> make_pair_like(const Spectrogram& s, MaskKind kind) {
  Mask m;
  m.n_bins = s.n_bins;
  m.n_frames = s.n_frames;
  m.kind = kind;
  m.values.assign(s.bins.size(), 0.0);
  return {m, m};
}

bool all_zero(const AudioClip& c) {
  for (double v : c.samples)
    if (v != 0.0) return false;
  return true;
}

}  // namespace

std::string mask_kind_name(MaskKind kind) {
  switch (kind) {
    case MaskKind::Ibm: return "ibm";
    case MaskKind::Irm: return "irm";
    case MaskKind::Wfm: return "wfm";
    case MaskKind::Soft: return "soft";
  }
  return "unknown";
}

MaskKind mask_kind_from_name(const std::string& name) {
  if (name == "ibm") return MaskKind::Ibm;
  if (name == "irm") return MaskKind::Irm;
  if (name == "wfm") return MaskKind::Wfm;
  if (name == "soft") return MaskKind::Soft;
  throw InvalidArgument("unknown mask kind: " + name);
}

std::pair<Mask, Mask> ibm(const Spectrogram& s1, const Spectrogram& s2) {
  check_shapes(s1, s2, "ibm");
  auto [m1, m2] = make_pair_like(s1, MaskKind::Ibm);
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < static_cast<long long>(s1.bins.size()); ++i) {
    const size_t k = static_cast<size_t>(i);
    const double a = std::abs(s1.bins[k]);
    const double b = std::abs(s2.bins[k]);
    m1.values[k] = a > b ? 1.0 : 0.0;
    m2.values[k] = b > a ? 1.0 : 0.0;
  }
  return {std::move(m1), std::move(m2)};
}

std::pair<Mask, Mask> irm(const Spectrogram& s1, const Spectrogram& s2) {
  check_shapes(s1, s2, "irm");
  auto [m1, m2] = make_pair_like(s1, MaskKind::Irm);
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < static_cast<long long>(s1.bins.size()); ++i) {
    const size_t k = static_cast<size_t>(i);
    const double a = std::abs(s1.bins[k]);
    const double b = std::abs(s2.bins[k]);
    const double denom = a + b;
    m1.values[k] = denom > 0.0 ? a / denom : 0.5;
    m2.values[k] = denom > 0.0 ? b / denom : 0.5;
  }
  return {std::move(m1), std::move(m2)};
}

std::pair<Mask, Mask> wfm(const Spectrogram& s1, const Spectrogram& s2) {
  check_shapes(s1, s2, "wfm");
  auto [m1, m2] = make_pair_like(s1, MaskKind::Wfm);
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < static_cast<long long>(s1.bins.size()); ++i) {
    const size_t k = static_cast<size_t>(i);
    const double a = std::abs(s1.bins[k]);
    const double b = std::abs(s2.bins[k]);
    const double denom = a * a + b * b;
    m1.values[k] = denom > 0.0 ? a * a / denom : 0.5;
    m2.values[k] = denom > 0.0 ? b * b / denom : 0.5;
  }
  return {std::move(m1), std::move(m2)};
}

AudioClip apply_and_reconstruct(const Spectrogram& mix, const Mask& mask) {
  if (mask.n_bins != mix.n_bins || mask.n_frames != mix.n_frames)
    throw InvalidArgument("apply_and_reconstruct: mask shape does not match mixture");
  std::vector<double> masked = mix.magnitude();
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < static_cast<long long>(masked.size()); ++i)
    masked[static_cast<size_t>(i)] *= mask.values[static_cast<size_t>(i)];
  return istft(recombine(masked, mix));
}

ValidationRecord validate_ground_truths(const AudioClip& gts1, const AudioClip& gts2,
                                        const AudioClip& mix, MaskKind kind,
                                        const PesqHook* pesq_hook) {
  if (gts1.sample_rate != mix.sample_rate || gts2.sample_rate != mix.sample_rate)
    throw InvalidArgument("validate_ground_truths: sample rate mismatch");
  if (gts1.size() != mix.size() || gts2.size() != mix.size())
    throw InvalidArgument("validate_ground_truths: clips must be trim-aligned to equal length");
  if (gts1.empty()) throw DegenerateInput("validate_ground_truths: empty clips");
  if (all_zero(gts1) || all_zero(gts2))
    throw DegenerateInput("validate_ground_truths: all-zero ground truth");

  const StftConfig cfg = StftConfig::for_rate(mix.sample_rate);
  const Spectrogram s1 = stft(gts1, cfg);
  const Spectrogram s2 = stft(gts2, cfg);
  const Spectrogram m = stft(mix, cfg);

  std::pair<Mask, Mask> masks = [&] {
    switch (kind) {
      case MaskKind::Ibm: return ibm(s1, s2);
      case MaskKind::Irm: return irm(s1, s2);
      case MaskKind::Wfm: return wfm(s1, s2);
      default: throw InvalidArgument("validate_ground_truths: mask kind must be ibm/irm/wfm");
    }
  }();

  const AudioClip est1 = apply_and_reconstruct(m, masks.first);
  const AudioClip est2 = apply_and_reconstruct(m, masks.second);

  ValidationRecord rec;
  rec.si_sdr_db[0] = si_sdr(gts1, est1);
  rec.si_sdr_db[1] = si_sdr(gts2, est2);

  if (pesq_hook != nullptr && !pesq_hook->command_template.empty()) {
    namespace fs = std::filesystem;
    const fs::path tmp = fs::temp_directory_path();
    static std::atomic<uint64_t> counter{0};
    const uint64_t id = mix64(counter.fetch_add(1), static_cast<uint64_t>(::getpid()));
    const fs::path ref1 = tmp / ("mixforge_pesq_" + std::to_string(id) + "_r1.wav");
    const fs::path ref2 = tmp / ("mixforge_pesq_" + std::to_string(id) + "_r2.wav");
    const fs::path deg1 = tmp / ("mixforge_pesq_" + std::to_string(id) + "_d1.wav");
    const fs::path deg2 = tmp / ("mixforge_pesq_" + std::to_string(id) + "_d2.wav");
    write_wav(gts1, ref1);
    write_wav(gts2, ref2);
    write_wav(est1, deg1);
    write_wav(est2, deg2);
    rec.pesq[0] = pesq_external(ref1, deg1, pesq_hook->command_template);
    rec.pesq[1] = pesq_external(ref2, deg2, pesq_hook->command_template);
    std::error_code ec;
    fs::remove(ref1, ec);
    fs::remove(ref2, ec);
    fs::remove(deg1, ec);
    fs::remove(deg2, ec);
  }
  return rec;
}

}  // namespace mixforge
