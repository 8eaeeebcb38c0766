#include "mixforge/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "mixforge/errors.hpp"

namespace mixforge {

AudioClip mix_synthetic(const AudioClip& s1, const AudioClip& s2,
                        std::pair<double, double> gains_db) {
  if (s1.sample_rate != s2.sample_rate)
    throw InvalidArgument("mix_synthetic: sample rate mismatch");
  const double a1 = std::pow(10.0, gains_db.first / 20.0);
  const double a2 = std::pow(10.0, gains_db.second / 20.0);
  AudioClip out;
  out.sample_rate = s1.sample_rate;
  out.samples.resize(std::max(s1.samples.size(), s2.samples.size()), 0.0);
  for (size_t i = 0; i < out.samples.size(); ++i) {
    double v = 0.0;
    if (i < s1.samples.size()) v += a1 * s1.samples[i];
    if (i < s2.samples.size()) v += a2 * s2.samples[i];
    out.samples[i] = v;
  }
  return out;
}

double si_sdr(const AudioClip& reference, const AudioClip& estimate) {
  if (reference.size() != estimate.size())
    throw InvalidArgument("si_sdr: length mismatch");
  const size_t n = reference.samples.size();
  if (n == 0) throw InvalidArgument("si_sdr: empty signals");

  double ref_mean = 0.0, est_mean = 0.0;
  for (size_t i = 0; i < n; ++i) {
    ref_mean += reference.samples[i];
    est_mean += estimate.samples[i];
  }
  ref_mean /= static_cast<double>(n);
  est_mean /= static_cast<double>(n);

  double rr = 0.0, er = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double r = reference.samples[i] - ref_mean;
    const double e = estimate.samples[i] - est_mean;
    rr += r * r;
    er += e * r;
  }
  if (rr == 0.0) throw DegenerateInput("si_sdr: zero reference after mean removal");

  const double alpha = er / rr;
  const double target_energy = alpha * alpha * rr;
  double err_energy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double r = reference.samples[i] - ref_mean;
    const double e = estimate.samples[i] - est_mean;
    const double d = alpha * r - e;
    err_energy += d * d;
  }

  if (err_energy == 0.0) return kSiSdrCap;
  if (target_energy == 0.0) return -kSiSdrCap;
  return std::clamp(10.0 * std::log10(target_energy / err_energy), -kSiSdrCap, kSiSdrCap);
}

PermutationResult best_permutation(const AudioClip& ref1, const AudioClip& ref2,
                                   const AudioClip& est1, const AudioClip& est2) {
  const double s11 = si_sdr(ref1, est1);
  const double s22 = si_sdr(ref2, est2);
  const double s12 = si_sdr(ref1, est2);
  const double s21 = si_sdr(ref2, est1);

  PermutationResult out;
  if (s11 + s22 >= s12 + s21) {
    out.chosen = Permutation::Identity;
    out.first = {s11, Permutation::Identity, std::nullopt};
    out.second = {s22, Permutation::Identity, std::nullopt};
  } else {
    out.chosen = Permutation::Swapped;
    out.first = {s12, Permutation::Swapped, std::nullopt};
    out.second = {s21, Permutation::Swapped, std::nullopt};
  }
  return out;
}

std::optional<double> pesq_external(const std::filesystem::path& reference_path,
                                    const std::filesystem::path& estimate_path,
                                    const std::string& command_template) {
  const size_t ref_pos = command_template.find("{ref}");
  const size_t deg_pos = command_template.find("{deg}");
  if (ref_pos == std::string::npos || deg_pos == std::string::npos)
    throw InvalidArgument("pesq_external: template must contain {ref} and {deg}");

  std::string cmd = command_template;
  cmd.replace(cmd.find("{ref}"), 5, reference_path.string());
  cmd.replace(cmd.find("{deg}"), 5, estimate_path.string());

  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return std::nullopt;
  std::string output;
  char buf[512];
  while (fgets(buf, sizeof(buf), pipe) != nullptr) output += buf;
  const int status = pclose(pipe);
  if (status != 0) return std::nullopt;

  // Last whitespace-separated token that fully parses as a float wins.
  std::optional<double> score;
  size_t pos = 0;
  while (pos < output.size()) {
    while (pos < output.size() && std::isspace(static_cast<unsigned char>(output[pos]))) ++pos;
    size_t end = pos;
    while (end < output.size() && !std::isspace(static_cast<unsigned char>(output[end]))) ++end;
    if (end > pos) {
      const std::string token = output.substr(pos, end - pos);
      char* parse_end = nullptr;
      const double v = std::strtod(token.c_str(), &parse_end);
      if (parse_end == token.c_str() + token.size()) score = v;
    }
    pos = end;
  }
  return score;
}

}  // namespace mixforge
