#include "mixforge/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace mixforge::kernels {

std::vector<double> conv_full(std::span<const double> x, std::span<const double> h) {
  if (x.empty() || h.empty()) return {};
  const long long nx = static_cast<long long>(x.size());
  const long long nh = static_cast<long long>(h.size());
  const long long ny = nx + nh - 1;
  std::vector<double> y(static_cast<size_t>(ny));
#pragma omp parallel for schedule(static)
  for (long long n = 0; n < ny; ++n) {
    const long long k_lo = std::max<long long>(0, n - nx + 1);
    const long long k_hi = std::min<long long>(nh - 1, n);
    double acc = 0.0;
    for (long long k = k_lo; k <= k_hi; ++k) acc += h[static_cast<size_t>(k)] * x[static_cast<size_t>(n - k)];
    y[static_cast<size_t>(n)] = acc;
  }
  return y;
}

double rms(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return std::sqrt(acc / static_cast<double>(x.size()));
}

double peak_abs(std::span<const double> x) {
  double p = 0.0;
  for (double v : x) p = std::max(p, std::abs(v));
  return p;
}

}  // namespace mixforge::kernels
