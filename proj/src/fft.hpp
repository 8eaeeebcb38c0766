#ifndef MIXFORGE_SRC_FFT_HPP_
#define MIXFORGE_SRC_FFT_HPP_

#include <complex>

namespace mixforge::detail {

// Real-to-complex DFT, one-sided: out has n/2 + 1 bins. Thread-safe.
void rfft(const double* in, std::complex<double>* out, int n);

// Inverse of rfft, normalized by 1/n. Thread-safe; does not modify `in`.
void irfft(const std::complex<double>* in, double* out, int n);

}  // namespace mixforge::detail

#endif  // MIXFORGE_SRC_FFT_HPP_
