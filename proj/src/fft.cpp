#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <vector>

#include "mixforge/errors.hpp"

namespace mixforge::detail {

namespace {

struct PlanPair {
  fftw_plan fwd = nullptr;
  fftw_plan inv = nullptr;
};

std::mutex g_plan_mutex;

// Plan creation is not thread-safe in FFTW; executing a cached plan on new
// arrays is. FFTW_UNALIGNED lifts the SIMD alignment requirement so any
// buffer may be passed to the execute functions.
PlanPair plans_for(int n) {
  static std::map<int, PlanPair> cache;
  std::lock_guard<std::mutex> lock(g_plan_mutex);
  PlanPair& p = cache[n];
  if (p.fwd == nullptr) {
    std::vector<double> re(static_cast<size_t>(n));
    std::vector<std::complex<double>> cx(static_cast<size_t>(n) / 2 + 1);
    auto* c = reinterpret_cast<fftw_complex*>(cx.data());
    p.fwd = fftw_plan_dft_r2c_1d(n, re.data(), c, FFTW_ESTIMATE | FFTW_UNALIGNED);
    p.inv = fftw_plan_dft_c2r_1d(n, c, re.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (p.fwd == nullptr || p.inv == nullptr) throw Error("fftw: plan creation failed");
  }
  return p;
}

}  // namespace

void rfft(const double* in, std::complex<double>* out, int n) {
  const PlanPair p = plans_for(n);
  // Out-of-place r2c transforms leave the input intact.
  fftw_execute_dft_r2c(p.fwd, const_cast<double*>(in),
                       reinterpret_cast<fftw_complex*>(out));
}

void irfft(const std::complex<double>* in, double* out, int n) {
  const PlanPair p = plans_for(n);
  // c2r destroys its input, so run it on a scratch copy.
  std::vector<std::complex<double>> tmp(in, in + n / 2 + 1);
  fftw_execute_dft_c2r(p.inv, reinterpret_cast<fftw_complex*>(tmp.data()), out);
  const double inv_n = 1.0 / n;
  for (int i = 0; i < n; ++i) out[i] *= inv_n;
}

}  // namespace mixforge::detail
