#include "mixforge/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "mixforge/errors.hpp"
#include "mixforge/masks.hpp"
#include "mixforge/spectral.hpp"
#include "mixforge/util.hpp"

namespace mixforge {

namespace {

// log N(x | mu, diag(var)) for one row.
double log_gauss(const double* x, const double* mu, const double* var, int d) {
  double acc = 0.0;
  for (int j = 0; j < d; ++j) {
    const double diff = x[j] - mu[j];
    acc += -0.5 * std::log(2.0 * std::numbers::pi * var[j]) - diff * diff / (2.0 * var[j]);
  }
  return acc;
}

std::vector<double> kmeanspp_centers(const std::vector<double>& x, int n, int d, int k,
                                     std::mt19937_64& rng) {
  std::vector<double> centers(static_cast<size_t>(k) * d);
  std::uniform_int_distribution<int> first(0, n - 1);
  const int c0 = first(rng);
  std::copy_n(&x[static_cast<size_t>(c0) * d], d, centers.begin());

  std::vector<double> dist2(static_cast<size_t>(n), std::numeric_limits<double>::max());
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      double sq = 0.0;
      for (int j = 0; j < d; ++j) {
        const double diff = x[static_cast<size_t>(i) * d + j] -
                            centers[static_cast<size_t>(c - 1) * d + j];
        sq += diff * diff;
      }
      dist2[static_cast<size_t>(i)] = std::min(dist2[static_cast<size_t>(i)], sq);
      total += dist2[static_cast<size_t>(i)];
    }
    int chosen = n - 1;
    if (total > 0.0) {
      std::uniform_real_distribution<double> pick(0.0, total);
      double target = pick(rng);
      for (int i = 0; i < n; ++i) {
        target -= dist2[static_cast<size_t>(i)];
        if (target <= 0.0) {
          chosen = i;
          break;
        }
      }
    } else {
      chosen = first(rng);
    }
    std::copy_n(&x[static_cast<size_t>(chosen) * d], d, &centers[static_cast<size_t>(c) * d]);
  }
  return centers;
}

}  // namespace

EmResult fit_em(const std::vector<double>& features, int n, int d, int k, const EmOptions& opts) {
  if (n < 1 || d < 1 || k < 1) throw InvalidArgument("fit_em: n, d, k must be positive");
  if (n < k) throw InvalidArgument("fit_em: need at least K rows (N >= K)");
  if (features.size() != static_cast<size_t>(n) * d)
    throw InvalidArgument("fit_em: feature storage does not match n x d");
  for (double v : features)
    if (!std::isfinite(v)) throw InvalidArgument("fit_em: non-finite feature value");

  std::mt19937_64 rng(opts.seed);

  EmResult result;
  GmmModel& m = result.model;
  m.k = k;
  m.d = d;
  m.weights.assign(static_cast<size_t>(k), 1.0 / k);
  m.means = kmeanspp_centers(features, n, d, k, rng);
  m.variances.assign(static_cast<size_t>(k) * d, 0.0);

  // Start every component at the (floored) global per-dimension variance.
  std::vector<double> global_mean(static_cast<size_t>(d), 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) global_mean[static_cast<size_t>(j)] += features[static_cast<size_t>(i) * d + j];
  for (int j = 0; j < d; ++j) global_mean[static_cast<size_t>(j)] /= n;
  std::vector<double> global_var(static_cast<size_t>(d), 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) {
      const double diff = features[static_cast<size_t>(i) * d + j] - global_mean[static_cast<size_t>(j)];
      global_var[static_cast<size_t>(j)] += diff * diff;
    }
  for (int j = 0; j < d; ++j)
    global_var[static_cast<size_t>(j)] = std::max(global_var[static_cast<size_t>(j)] / n, opts.variance_floor);
  for (int c = 0; c < k; ++c)
    std::copy_n(global_var.begin(), d, m.variances.begin() + static_cast<size_t>(c) * d);

  std::vector<double> resp(static_cast<size_t>(n) * k);
  std::vector<double> logp(static_cast<size_t>(k));

  for (int iter = 0; iter < opts.max_iter; ++iter) {
    // E step and total log-likelihood under the current parameters.
    double loglik = 0.0;
    for (int i = 0; i < n; ++i) {
      const double* x = &features[static_cast<size_t>(i) * d];
      double mx = -std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        logp[static_cast<size_t>(c)] = std::log(m.weights[static_cast<size_t>(c)]) +
                                       log_gauss(x, &m.means[static_cast<size_t>(c) * d],
                                                 &m.variances[static_cast<size_t>(c) * d], d);
        mx = std::max(mx, logp[static_cast<size_t>(c)]);
      }
      double sum = 0.0;
      for (int c = 0; c < k; ++c) sum += std::exp(logp[static_cast<size_t>(c)] - mx);
      loglik += mx + std::log(sum);
      // Normalizing by the computed sum keeps each row exactly on the simplex.
      for (int c = 0; c < k; ++c)
        resp[static_cast<size_t>(i) * k + c] = std::exp(logp[static_cast<size_t>(c)] - mx) / sum;
    }
    result.loglik_trace.push_back(loglik);

    if (result.loglik_trace.size() >= 2) {
      const double prev = result.loglik_trace[result.loglik_trace.size() - 2];
      if (loglik - prev < opts.tol * std::abs(prev)) break;
    }

    // M step.
    for (int c = 0; c < k; ++c) {
      double nk = 0.0;
      for (int i = 0; i < n; ++i) nk += resp[static_cast<size_t>(i) * k + c];
      nk = std::max(nk, 1e-300);
      m.weights[static_cast<size_t>(c)] = nk / n;

      double* mu = &m.means[static_cast<size_t>(c) * d];
      double* var = &m.variances[static_cast<size_t>(c) * d];
      std::fill_n(mu, d, 0.0);
      for (int i = 0; i < n; ++i) {
        const double r = resp[static_cast<size_t>(i) * k + c];
        const double* x = &features[static_cast<size_t>(i) * d];
        for (int j = 0; j < d; ++j) mu[j] += r * x[j];
      }
      for (int j = 0; j < d; ++j) mu[j] /= nk;

      std::fill_n(var, d, 0.0);
      for (int i = 0; i < n; ++i) {
        const double r = resp[static_cast<size_t>(i) * k + c];
        const double* x = &features[static_cast<size_t>(i) * d];
        for (int j = 0; j < d; ++j) {
          const double diff = x[j] - mu[j];
          var[j] += r * diff * diff;
        }
      }
      for (int j = 0; j < d; ++j) var[j] = std::max(var[j] / nk, opts.variance_floor);
    }
    // Keep the weight simplex exact after the nk guards.
    double wsum = 0.0;
    for (int c = 0; c < k; ++c) wsum += m.weights[static_cast<size_t>(c)];
    for (int c = 0; c < k; ++c) m.weights[static_cast<size_t>(c)] /= wsum;
  }
  return result;
}

std::vector<double> responsibilities(const GmmModel& model, const std::vector<double>& features,
                                     int n) {
  if (model.k < 1 || model.d < 1) throw InvalidArgument("responsibilities: empty model");
  if (features.size() != static_cast<size_t>(n) * model.d)
    throw InvalidArgument("responsibilities: feature storage does not match n x d");

  const int k = model.k;
  const int d = model.d;
  std::vector<double> resp(static_cast<size_t>(n) * k);
#pragma omp parallel
  {
    std::vector<double> logp(static_cast<size_t>(k));
#pragma omp for schedule(static)
    for (int i = 0; i < n; ++i) {
      const double* x = &features[static_cast<size_t>(i) * d];
      double mx = -std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        logp[static_cast<size_t>(c)] = std::log(model.weights[static_cast<size_t>(c)]) +
                                       log_gauss(x, &model.means[static_cast<size_t>(c) * d],
                                                 &model.variances[static_cast<size_t>(c) * d], d);
        mx = std::max(mx, logp[static_cast<size_t>(c)]);
      }
      double sum = 0.0;
      for (int c = 0; c < k; ++c) sum += std::exp(logp[static_cast<size_t>(c)] - mx);
      for (int c = 0; c < k; ++c)
        resp[static_cast<size_t>(i) * k + c] = std::exp(logp[static_cast<size_t>(c)] - mx) / sum;
    }
  }
  return resp;
}

std::pair<AudioClip, AudioClip> separate_gmm(const AudioClip& mix, const SeparateOptions& opts) {
  if (mix.empty()) throw DegenerateInput("separate_gmm: empty mixture");

  const StftConfig cfg = StftConfig::for_rate(mix.sample_rate);
  const Spectrogram spec = stft(mix, cfg);
  const std::vector<double> mag = spec.magnitude();

  double max_mag = 0.0;
  for (double v : mag) max_mag = std::max(max_mag, v);
  if (max_mag <= 0.0) throw DegenerateInput("separate_gmm: silent mixture");

  const int f_bins = spec.n_bins;
  const int t_frames = spec.n_frames;
  const long long n = static_cast<long long>(mag.size());

  // Per-bin features: floored max-normalized log magnitude, normalized
  // frequency and time coordinates, 3x3 neighborhood mean log magnitude.
  std::vector<double> logmag(mag.size());
  for (size_t i = 0; i < mag.size(); ++i)
    logmag[i] = std::max(20.0 * std::log10(mag[i] / max_mag + 1e-300), opts.log_floor_db);

  constexpr int kDims = 4;
  std::vector<double> feats(static_cast<size_t>(n) * kDims);
  for (int t = 0; t < t_frames; ++t) {
    for (int f = 0; f < f_bins; ++f) {
      const size_t idx = static_cast<size_t>(t) * f_bins + f;
      double neigh = 0.0;
      int count = 0;
      for (int dt = -1; dt <= 1; ++dt)
        for (int df = -1; df <= 1; ++df) {
          const int tt = t + dt;
          const int ff = f + df;
          if (tt < 0 || tt >= t_frames || ff < 0 || ff >= f_bins) continue;
          neigh += logmag[static_cast<size_t>(tt) * f_bins + ff];
          ++count;
        }
      double* row = &feats[idx * kDims];
      row[0] = logmag[idx];
      row[1] = f_bins > 1 ? static_cast<double>(f) / (f_bins - 1) : 0.0;
      row[2] = t_frames > 1 ? static_cast<double>(t) / (t_frames - 1) : 0.0;
      row[3] = neigh / count;
    }
  }

  // Fit on salient bins only: with every silent bin included, a K=2 mixture
  // splits silence vs speech instead of speaker vs speaker.
  std::vector<long long> salient;
  for (long long i = 0; i < n; ++i)
    if (logmag[static_cast<size_t>(i)] >= opts.salience_db) salient.push_back(i);
  constexpr int kClusters = 2;
  if (salient.size() < 4 * kClusters)
    for (long long i = 0; i < n && salient.size() < static_cast<size_t>(n); ++i) salient.push_back(i);

  // Standardize over the fit set so the coordinate features are commensurate
  // with the log magnitudes, then weight the dimensions for clustering:
  // frequency structure separates speakers, the raw time index does not.
  // Per-dimension scaling shifts every partition's Gaussian likelihood by the
  // same constant, so it steers which optima the seeded inits find without
  // biasing the likelihood ranking among them.
  constexpr double kDimWeight[kDims] = {1.0, 2.0, 0.5, 1.0};
  double mean[kDims] = {0.0, 0.0, 0.0, 0.0};
  double sd[kDims] = {0.0, 0.0, 0.0, 0.0};
  for (long long i : salient)
    for (int j = 0; j < kDims; ++j) mean[j] += feats[static_cast<size_t>(i) * kDims + j];
  for (int j = 0; j < kDims; ++j) mean[j] /= static_cast<double>(salient.size());
  for (long long i : salient)
    for (int j = 0; j < kDims; ++j) {
      const double diff = feats[static_cast<size_t>(i) * kDims + j] - mean[j];
      sd[j] += diff * diff;
    }
  for (int j = 0; j < kDims; ++j) {
    sd[j] = std::max(std::sqrt(sd[j] / static_cast<double>(salient.size())), 1e-9);
    sd[j] /= kDimWeight[j];
  }

  std::vector<double> fit_feats(salient.size() * kDims);
  for (size_t s = 0; s < salient.size(); ++s)
    for (int j = 0; j < kDims; ++j)
      fit_feats[s * kDims + j] =
          (feats[static_cast<size_t>(salient[s]) * kDims + j] - mean[j]) / sd[j];

  std::vector<double> all_feats(static_cast<size_t>(n) * kDims);
  for (long long i = 0; i < n; ++i)
    for (int j = 0; j < kDims; ++j)
      all_feats[static_cast<size_t>(i) * kDims + j] =
          (feats[static_cast<size_t>(i) * kDims + j] - mean[j]) / sd[j];

  // EM lands in local optima. Candidate solutions that put essentially all
  // salient magnitude behind one mask amount to (mixture, silence) output;
  // among the useful candidates the best final log-likelihood wins.
  std::vector<double> resp;
  double best_loglik = 0.0, best_degenerate_loglik = 0.0;
  std::vector<double> degenerate_resp;
  for (int r = 0; r < std::max(1, opts.restarts); ++r) {
    EmOptions em = opts.em;
    em.seed = mix64(opts.seed, 0x73657061ull + static_cast<uint64_t>(r));
    const EmResult cand =
        fit_em(fit_feats, static_cast<int>(salient.size()), kDims, kClusters, em);
    std::vector<double> cand_resp =
        responsibilities(cand.model, all_feats, static_cast<int>(n));

    double mass = 0.0, mass1 = 0.0;
    for (long long i : salient) {
      const size_t k = static_cast<size_t>(i);
      mass += mag[k];
      mass1 += mag[k] * cand_resp[k * kClusters];
    }
    const double share = mass > 0.0 ? mass1 / mass : 0.5;
    const double loglik = cand.loglik_trace.back();
    if (share > 0.05 && share < 0.95) {
      if (resp.empty() || loglik > best_loglik) {
        best_loglik = loglik;
        resp = std::move(cand_resp);
      }
    } else if (degenerate_resp.empty() || loglik > best_degenerate_loglik) {
      best_degenerate_loglik = loglik;
      degenerate_resp = std::move(cand_resp);
    }
  }
  if (resp.empty()) resp = std::move(degenerate_resp);

  Mask mask1, mask2;
  mask1.n_bins = mask2.n_bins = f_bins;
  mask1.n_frames = mask2.n_frames = t_frames;
  mask1.kind = mask2.kind = MaskKind::Soft;
  mask1.values.resize(static_cast<size_t>(n));
  mask2.values.resize(static_cast<size_t>(n));
  for (long long i = 0; i < n; ++i) {
    const double r = resp[static_cast<size_t>(i) * kClusters];
    mask1.values[static_cast<size_t>(i)] = r;
    mask2.values[static_cast<size_t>(i)] = 1.0 - r;  // exact complement
  }

  return {apply_and_reconstruct(spec, mask1), apply_and_reconstruct(spec, mask2)};
}

}  // namespace mixforge
