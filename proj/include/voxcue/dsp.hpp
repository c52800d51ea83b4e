#pragma once

// Small signal-processing kernels shared by segmentation and acoustics.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace voxcue::dsp {

inline constexpr double kSilenceDb = -120.0;

std::size_t next_pow2(std::size_t n);

// In-place iterative radix-2 FFT; size must be a power of two.
void fft(std::vector<std::complex<double>>& data);

// |X_k|^2 for k = 0..nfft/2 of the zero-padded input.
std::vector<double> power_spectrum(std::span<const double> x, std::size_t nfft);

std::vector<double> hamming(std::size_t n);

// y[0] = x[0], y[n] = x[n] - coef * x[n-1].
std::vector<double> pre_emphasis(std::span<const double> x, double coef);

// 10 log10(mean square), floored at kSilenceDb.
double mean_square_db(std::span<const double> x);

// Normalized autocorrelation of the mean-removed signal for lags
// [min_lag, max_lag]. Each lag is normalized by the energies of its two
// overlapping segments, so values lie in [-1, 1]. Entry i is lag min_lag + i.
std::vector<double> normalized_autocorrelation(std::span<const double> x, std::size_t min_lag,
                                               std::size_t max_lag);

struct Peak {
  double position;  // fractional index
  double value;
};

// Parabolic refinement of a local maximum at index i (0 < i < size - 1).
Peak parabolic_peak(std::span<const double> y, std::size_t i);

}  // namespace voxcue::dsp
