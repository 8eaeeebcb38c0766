#ifndef MIXFORGE_KERNELS_HPP_
#define MIXFORGE_KERNELS_HPP_

#include <span>
#include <vector>

namespace mixforge::kernels {

// Full linear convolution; output length x.size() + h.size() - 1.
// Parallel over output samples. Each output is a serial dot product, so the
// result is bit-identical for any thread count.
std::vector<double> conv_full(std::span<const double> x, std::span<const double> h);

double rms(std::span<const double> x);
double peak_abs(std::span<const double> x);

}  // namespace mixforge::kernels

#endif  // MIXFORGE_KERNELS_HPP_
