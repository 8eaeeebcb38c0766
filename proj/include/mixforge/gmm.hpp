#ifndef MIXFORGE_GMM_HPP_
#define MIXFORGE_GMM_HPP_

#include <cstdint>
#include <utility>
#include <vector>

#include "mixforge/audio.hpp"

namespace mixforge {

// Diagonal-covariance Gaussian mixture. means/variances are K x D row-major.
struct GmmModel {
  int k = 0;
  int d = 0;
  std::vector<double> weights;
  std::vector<double> means;
  std::vector<double> variances;
};

struct EmOptions {
  uint64_t seed = 0;
  double tol = 1e-8;  // relative log-likelihood improvement
  int max_iter = 200;
  double variance_floor = 1e-6;
};

struct EmResult {
  GmmModel model;
  // Total log-likelihood at each iteration, evaluated before that
  // iteration's M-step; non-decreasing by EM's ascent property.
  std::vector<double> loglik_trace;
};

// Seeded k-means++ initialization, then diagonal-covariance EM. Runs
// single-threaded so the accumulation order (and therefore the result) is
// reproducible; independent fits may run in parallel.
EmResult fit_em(const std::vector<double>& features, int n, int d, int k, const EmOptions& opts);

// Posterior component probabilities, log-space for stability; N x K row-major
// with rows on the simplex.
std::vector<double> responsibilities(const GmmModel& model, const std::vector<double>& features,
                                     int n);

struct SeparateOptions {
  uint64_t seed = 0;
  double log_floor_db = -80.0;  // floor for log|M| after per-utterance max normalization
  double salience_db = -25.0;   // EM fits on bins at least this loud re the max
  int restarts = 16;            // seeded EM restarts; the best useful log-likelihood wins
  EmOptions em;
};

// Neural-network-free baseline separator: clusters per-bin features
// [floored log-magnitude, normalized frequency, normalized time, 3x3
// neighborhood mean log-magnitude] with a K=2 GMM and uses the posteriors as
// soft masks. Outputs are unordered.
std::pair<AudioClip, AudioClip> separate_gmm(const AudioClip& mix, const SeparateOptions& opts);

}  // namespace mixforge

#endif  // MIXFORGE_GMM_HPP_
