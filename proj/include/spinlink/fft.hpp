#ifndef SPINLINK_FFT_HPP
#define SPINLINK_FFT_HPP

#include <complex>
#include <vector>

namespace spinlink {

// In-place radix-2 complex FFT. Size must be a power of two.
// Forward transform uses exp(-2*pi*i*j*m/N); the inverse includes the 1/N factor.
void fft_inplace(std::vector<std::complex<double>>& data, bool inverse);

bool is_power_of_two(std::size_t n);
std::size_t next_power_of_two(std::size_t n);

}  // namespace spinlink

#endif
