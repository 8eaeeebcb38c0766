#include <doctest.h>

#include <cmath>
#include <random>

#include "mixforge/errors.hpp"
#include "mixforge/gmm.hpp"
#include "mixforge/metrics.hpp"
#include "mixforge/spectral.hpp"
#include "reference.hpp"

using namespace mixforge;

namespace {

// N samples from K 1-D Gaussians; returns features and true labels.
std::pair<std::vector<double>, std::vector<int>> two_cluster_data(int n, double mu0, double mu1,
                                                                  double sigma, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g0(mu0, sigma), g1(mu1, sigma);
  std::vector<double> x(static_cast<size_t>(n));
  std::vector<int> labels(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    labels[static_cast<size_t>(i)] = i % 2;
    x[static_cast<size_t>(i)] = i % 2 == 0 ? g0(rng) : g1(rng);
  }
  return {x, labels};
}

}  // namespace

TEST_CASE("em recovers two well-separated 1-D clusters") {
  auto [x, labels] = two_cluster_data(2000, -5.0, 5.0, 1.0, 501);
  (void)labels;
  EmOptions opts;
  opts.seed = 7;
  const EmResult res = fit_em(x, 2000, 1, 2, opts);
  const double lo = std::min(res.model.means[0], res.model.means[1]);
  const double hi = std::max(res.model.means[0], res.model.means[1]);
  CHECK(std::abs(lo - -5.0) < 0.3);
  CHECK(std::abs(hi - 5.0) < 0.3);
  CHECK(res.model.weights[0] == doctest::Approx(0.5).epsilon(0.1));
}

TEST_CASE("k = 1 reduces to the sample mean and variance in one m-step") {
  std::mt19937_64 rng(502);
  std::normal_distribution<double> g(2.0, 3.0);
  const int n = 500;
  std::vector<double> x(static_cast<size_t>(n) * 2);
  for (double& v : x) v = g(rng);

  double mean0 = 0.0, mean1 = 0.0;
  for (int i = 0; i < n; ++i) {
    mean0 += x[static_cast<size_t>(i) * 2];
    mean1 += x[static_cast<size_t>(i) * 2 + 1];
  }
  mean0 /= n;
  mean1 /= n;
  double var0 = 0.0, var1 = 0.0;
  for (int i = 0; i < n; ++i) {
    var0 += (x[static_cast<size_t>(i) * 2] - mean0) * (x[static_cast<size_t>(i) * 2] - mean0);
    var1 += (x[static_cast<size_t>(i) * 2 + 1] - mean1) * (x[static_cast<size_t>(i) * 2 + 1] - mean1);
  }
  var0 /= n;
  var1 /= n;

  EmOptions opts;
  opts.max_iter = 3;
  const EmResult res = fit_em(x, n, 2, 1, opts);
  CHECK(res.model.weights[0] == 1.0);
  CHECK(res.model.means[0] == doctest::Approx(mean0).epsilon(1e-12));
  CHECK(res.model.means[1] == doctest::Approx(mean1).epsilon(1e-12));
  CHECK(res.model.variances[0] == doctest::Approx(var0).epsilon(1e-9));
  CHECK(res.model.variances[1] == doctest::Approx(var1).epsilon(1e-9));
}

TEST_CASE("log-likelihood trace is non-decreasing on random data") {
  std::mt19937_64 rng(503);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    const int n = 300;
    const int d = 3;
    std::vector<double> x(static_cast<size_t>(n) * d);
    for (double& v : x) v = u(rng);
    EmOptions opts;
    opts.seed = rng();
    opts.max_iter = 50;
    const EmResult res = fit_em(x, n, d, 3, opts);
    REQUIRE(res.loglik_trace.size() >= 2);
    for (size_t i = 1; i < res.loglik_trace.size(); ++i)
      CHECK(res.loglik_trace[i] >= res.loglik_trace[i - 1] - 1e-9);
  }
}

TEST_CASE("fit_em is deterministic given the seed") {
  auto [x, labels] = two_cluster_data(400, -2.0, 2.0, 1.0, 504);
  (void)labels;
  EmOptions opts;
  opts.seed = 11;
  const EmResult a = fit_em(x, 400, 1, 2, opts);
  const EmResult b = fit_em(x, 400, 1, 2, opts);
  CHECK(a.model.means == b.model.means);
  CHECK(a.model.variances == b.model.variances);
  CHECK(a.loglik_trace == b.loglik_trace);
}

TEST_CASE("fit_em rejects degenerate input") {
  EmOptions opts;
  CHECK_THROWS_AS(fit_em({1.0, 2.0}, 2, 1, 3, opts), InvalidArgument);  // N < K
  std::vector<double> bad = {1.0, std::nan(""), 2.0};
  CHECK_THROWS_AS(fit_em(bad, 3, 1, 2, opts), InvalidArgument);
}

TEST_CASE("responsibilities: simplex rows, symmetry, certainty at a far mean") {
  GmmModel model;
  model.k = 2;
  model.d = 1;
  model.weights = {0.5, 0.5};
  model.means = {-10.0, 10.0};
  model.variances = {1.0, 1.0};

  const std::vector<double> x = {-10.0, 10.0, 0.0};
  const std::vector<double> r = responsibilities(model, x, 3);
  CHECK(r[0] > 0.99);                     // at the first mean
  CHECK(r[1 * 2 + 1] > 0.99);             // at the second mean
  CHECK(r[2 * 2] == doctest::Approx(0.5));  // equidistant
  for (int i = 0; i < 3; ++i) CHECK(r[i * 2] + r[i * 2 + 1] == doctest::Approx(1.0).epsilon(1e-15));

  GmmModel one;
  one.k = 1;
  one.d = 1;
  one.weights = {1.0};
  one.means = {0.0};
  one.variances = {1.0};
  const std::vector<double> r1 = responsibilities(one, x, 3);
  for (double v : r1) CHECK(v == 1.0);

  GmmModel twins = model;
  twins.means = {3.0, 3.0};  // identical components
  const std::vector<double> rt = responsibilities(twins, x, 3);
  for (double v : rt) CHECK(v == 0.5);

  CHECK_THROWS_AS(responsibilities(model, x, 2), InvalidArgument);  // n mismatch
}

TEST_CASE("cluster agreement is at least 95% at 6 sigma separation") {
  auto [x, labels] = two_cluster_data(2000, 0.0, 6.0, 1.0, 505);
  EmOptions opts;
  opts.seed = 3;
  const EmResult res = fit_em(x, 2000, 1, 2, opts);
  const std::vector<double> r = responsibilities(res.model, x, 2000);

  int agree_id = 0, agree_sw = 0;
  for (int i = 0; i < 2000; ++i) {
    const int predicted = r[static_cast<size_t>(i) * 2] > 0.5 ? 0 : 1;
    if (predicted == labels[static_cast<size_t>(i)]) ++agree_id;
    else ++agree_sw;
  }
  const double agreement = std::max(agree_id, agree_sw) / 2000.0;
  CHECK(agreement >= 0.95);
}

TEST_CASE("separate_gmm splits a disjoint-band two-tone mixture") {
  const AudioClip t1 = ref::tone(400.0, 2.0, 8000, 0.4);
  const AudioClip t2 = ref::tone(1800.0, 2.0, 8000, 0.4);
  const AudioClip mix = mix_synthetic(t1, t2);

  SeparateOptions opts;
  opts.seed = 21;
  auto [e1, e2] = separate_gmm(mix, opts);
  const PermutationResult perm = best_permutation(t1, t2, e1, e2);
  CHECK((perm.first.si_sdr_db + perm.second.si_sdr_db) / 2.0 >= 10.0);

  // Soft masks sum to one, so the two estimates sum to the mixture
  // reconstruction.
  const AudioClip whole = istft(stft(mix));
  std::vector<double> sum(e1.samples.size());
  for (size_t i = 0; i < sum.size(); ++i) sum[i] = e1.samples[i] + e2.samples[i];
  CHECK(ref::rel_l2_diff(whole.samples, sum) < 1e-6);
}

TEST_CASE("separate_gmm is deterministic and rejects silence") {
  const AudioClip t1 = ref::tone(500.0, 1.0, 8000, 0.4);
  const AudioClip t2 = ref::tone(1500.0, 1.0, 8000, 0.4);
  const AudioClip mix = mix_synthetic(t1, t2);
  SeparateOptions opts;
  opts.seed = 8;
  auto [a1, a2] = separate_gmm(mix, opts);
  auto [b1, b2] = separate_gmm(mix, opts);
  CHECK(a1.samples == b1.samples);
  CHECK(a2.samples == b2.samples);

  AudioClip silent;
  silent.sample_rate = 8000;
  silent.samples.assign(8000, 0.0);
  CHECK_THROWS_AS(separate_gmm(silent, opts), DegenerateInput);
  AudioClip empty;
  empty.sample_rate = 8000;
  CHECK_THROWS_AS(separate_gmm(empty, opts), DegenerateInput);
}
