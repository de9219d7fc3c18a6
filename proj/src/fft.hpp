#pragma once

#include <complex>
#include <span>

namespace gnls::detail {

enum class FftDirection { forward, backward };

/// In-place unnormalized DFT of an m^dim array. forward uses e^{-i}, backward
/// e^{+i}. Plans are cached per (dim, m, direction) and safe to share across
/// threads.
void fft_inplace(std::span<std::complex<double>> data, int dim, int m, FftDirection dir);

}  // namespace gnls::detail
