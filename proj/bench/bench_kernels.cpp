// Serial-reference vs OpenMP kernel benchmark.
//
//   mixforge_bench [reps]
//
// Compares the production kernels against the serial reference
// implementations used by the tests and reports timings, speedups and the
// worst absolute deviation between the two paths.

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <vector>

#include "mixforge/kernels.hpp"
#include "mixforge/masks.hpp"
#include "mixforge/spectral.hpp"
#include "reference.hpp"

using namespace mixforge;

namespace {

struct BenchResult {
  double serial_s = 0.0;
  double parallel_s = 0.0;
  double max_abs_err = 0.0;
};

void print_row(const char* name, const BenchResult& r) {
  std::printf("%-28s serial %8.2f ms   openmp %8.2f ms   speedup %5.2fx   max|err| %.3g\n",
              name, r.serial_s * 1e3, r.parallel_s * 1e3, r.serial_s / r.parallel_s,
              r.max_abs_err);
}

BenchResult bench_conv(int reps) {
  const AudioClip x = ref::random_clip(24000, 8000, 900, 0.5);
  const AudioClip h = ref::random_clip(2400, 8000, 901, 0.5);

  BenchResult r;
  std::vector<double> serial_out, parallel_out;
  double t0 = omp_get_wtime();
  for (int i = 0; i < reps; ++i) serial_out = ref::conv_full_serial(x.samples, h.samples);
  r.serial_s = (omp_get_wtime() - t0) / reps;
  t0 = omp_get_wtime();
  for (int i = 0; i < reps; ++i) parallel_out = kernels::conv_full(x.samples, h.samples);
  r.parallel_s = (omp_get_wtime() - t0) / reps;
  for (size_t i = 0; i < serial_out.size(); ++i)
    r.max_abs_err = std::max(r.max_abs_err, std::abs(serial_out[i] - parallel_out[i]));
  return r;
}

BenchResult bench_stft(int reps) {
  const AudioClip x = ref::random_clip(4 * 8000, 8000, 902, 0.5);
  const StftConfig cfg = StftConfig::for_rate(8000);

  BenchResult r;
  Spectrogram serial_spec, parallel_spec;
  double t0 = omp_get_wtime();
  for (int i = 0; i < reps; ++i) serial_spec = ref::stft_serial(x, cfg);
  r.serial_s = (omp_get_wtime() - t0) / reps;
  t0 = omp_get_wtime();
  for (int i = 0; i < reps; ++i) parallel_spec = stft(x, cfg);
  r.parallel_s = (omp_get_wtime() - t0) / reps;
  for (size_t i = 0; i < serial_spec.bins.size(); ++i)
    r.max_abs_err = std::max(r.max_abs_err, std::abs(serial_spec.bins[i] - parallel_spec.bins[i]));
  return r;
}

BenchResult bench_istft(int reps) {
  const AudioClip x = ref::random_clip(4 * 8000, 8000, 903, 0.5);
  const Spectrogram spec = stft(x);

  BenchResult r;
  AudioClip serial_out, parallel_out;
  double t0 = omp_get_wtime();
  for (int i = 0; i < reps; ++i) serial_out = ref::istft_serial(spec);
  r.serial_s = (omp_get_wtime() - t0) / reps;
  t0 = omp_get_wtime();
  for (int i = 0; i < reps; ++i) parallel_out = istft(spec);
  r.parallel_s = (omp_get_wtime() - t0) / reps;
  for (size_t i = 0; i < serial_out.samples.size(); ++i)
    r.max_abs_err =
        std::max(r.max_abs_err, std::abs(serial_out.samples[i] - parallel_out.samples[i]));
  return r;
}

BenchResult bench_masks(int reps) {
  const Spectrogram s1 = stft(ref::random_clip(8 * 8000, 8000, 904, 0.5));
  const Spectrogram s2 = stft(ref::random_clip(8 * 8000, 8000, 905, 0.5));

  BenchResult r;
  std::vector<double> o1, o2;
  std::pair<Mask, Mask> masks;
  double t0 = omp_get_wtime();
  for (int i = 0; i < reps; ++i) {
    // Magnitude extraction is part of the work, serial here by intent.
    std::vector<double> a(s1.bins.size()), b(s2.bins.size());
    for (size_t k = 0; k < a.size(); ++k) a[k] = std::abs(s1.bins[k]);
    for (size_t k = 0; k < b.size(); ++k) b[k] = std::abs(s2.bins[k]);
    ref::wfm_oracle(a, b, o1, o2);
  }
  r.serial_s = (omp_get_wtime() - t0) / reps;
  t0 = omp_get_wtime();
  for (int i = 0; i < reps; ++i) masks = wfm(s1, s2);
  r.parallel_s = (omp_get_wtime() - t0) / reps;
  for (size_t i = 0; i < o1.size(); ++i)
    r.max_abs_err = std::max(r.max_abs_err, std::abs(o1[i] - masks.first.values[i]));
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  const int reps = argc > 1 ? std::max(1, std::atoi(argv[1])) : 3;
  std::printf("threads: %d, reps: %d\n", omp_get_max_threads(), reps);
  print_row("conv_full 24000x2400", bench_conv(reps));
  print_row("stft 4 s (naive-DFT ref)", bench_stft(reps));
  print_row("istft 4 s (naive-DFT ref)", bench_istft(reps));
  print_row("wfm masks 8 s", bench_masks(reps));
  return 0;
}
