#pragma once

#include <span>
#include <utility>
#include <vector>

#include "ecg/common.hpp"

namespace ecg::wavelet {

enum class WaveletFamily : int { daubechies = 0 };

/// Daubechies multilevel analysis setup. `order` counts vanishing moments
/// (db1 = Haar, 2 taps; dbP has 2P taps).
struct WaveletSpec {
  WaveletFamily family = WaveletFamily::daubechies;
  int order = 4;
  int levels = 4;
};

/// Output of a multilevel decomposition. `details` is ordered deepest-first:
/// details[0] = CD_levels, details[levels-1] = CD1.
struct WaveletCoeffs {
  std::vector<double> approx;
  std::vector<std::vector<double>> details;
  WaveletSpec spec;
  int original_length = 0;
};

/// Orthonormal analysis pair for dbN, N in 1..8. Lowpass sums to sqrt(2);
/// highpass is the quadrature mirror of the lowpass.
std::pair<std::vector<double>, std::vector<double>> daubechies_filters(
    int order);

/// Per-level band length: floor((n + filter_len - 1) / 2).
int dwt_band_length(int n, int filter_len);

/// Multilevel DWT with half-sample symmetric extension at every level.
WaveletCoeffs dwt_decompose(std::span<const double> signal,
                            const WaveletSpec& spec);

/// Inverse of dwt_decompose; exact to ~1e-11 for all supported inputs.
std::vector<double> dwt_reconstruct(const WaveletCoeffs& coeffs);

/// Decompose, zero the detail bands listed in `zero_levels` (1 = finest, CD1),
/// reconstruct. Output length equals input length.
std::vector<double> denoise(std::span<const double> signal,
                            const WaveletSpec& spec,
                            const std::vector<int>& zero_levels);

}  // namespace ecg::wavelet
