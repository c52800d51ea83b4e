#pragma once

// Per-window acoustic measurements: F0, intensity, cycle marks,
// jitter/shimmer, harmonicity, LPC formants and MFCCs.

#include <array>
#include <optional>
#include <span>
#include <vector>

namespace voxcue {

struct PitchParams {
  double floor = 75.0;    // Hz
  double ceiling = 500.0; // Hz
  double voicing_threshold = 0.45;
  double subframe_length = 0.025;  // s
  double subframe_hop = 0.010;     // s
};

struct PitchEstimate {
  double f0 = 0.0;        // Hz
  double strength = 0.0;  // normalized autocorrelation at the chosen lag
};

/// Single-frame pitch: the shortest-lag autocorrelation peak within 5% of the
/// best peak, parabolically refined. Absent when unvoiced or out of range.
std::optional<PitchEstimate> estimate_frame_pitch(std::span<const double> frame, double rate,
                                                  const PitchParams& params = {});

/// F0 per subframe across a window (absent entries are unvoiced subframes).
/// Throws Error(InvalidArgument) unless 0 < floor < ceiling < rate / 2.
std::vector<std::optional<double>> estimate_f0(std::span<const double> window, double rate,
                                               const PitchParams& params = {});

/// Mean intensity in dB relative to full scale, -120 dB floor.
double intensity_db(std::span<const double> window);

struct CycleMarks {
  std::vector<double> periods;     // seconds, consecutive mark differences
  std::vector<double> amplitudes;  // peak value at each mark (periods.size() + 1)
};

/// Places one mark per glottal cycle at the waveform peak nearest each expected
/// period. Absent when fewer than two periods can be marked.
std::optional<CycleMarks> mark_cycles(std::span<const double> window, double rate, double f0);

struct Perturbation {
  std::optional<double> jitter_local;
  std::optional<double> jitter_ppq5;
  std::optional<double> shimmer_local;
  std::optional<double> shimmer_apq5;
};

/// Local measures need two values, five-point quotients need five.
Perturbation jitter_shimmer(std::span<const double> periods, std::span<const double> amplitudes);

inline constexpr double kHnrMinDb = -20.0;
inline constexpr double kHnrMaxDb = 40.0;

/// 10 log10(r / (1 - r)) with r the normalized autocorrelation at the pitch lag,
/// clamped to [-20, 40] dB. Absent without an F0 estimate.
std::optional<double> harmonicity_db(std::span<const double> window, double rate,
                                     std::optional<double> f0);

struct FormantParams {
  int order = 12;
  double pre_emphasis = 0.97;
  double edge_margin = 50.0;     // Hz kept clear of 0 and Nyquist
  double max_bandwidth = 700.0;  // Hz
};

struct Formants {
  std::array<std::optional<double>, 3> frequency;  // F1..F3, Hz
  std::array<std::optional<double>, 3> bandwidth;  // B1..B3, Hz
};

/// Autocorrelation LPC (Hamming window, Levinson-Durbin) followed by root
/// solving of the predictor polynomial.
Formants lpc_formants(std::span<const double> window, double rate, const FormantParams& params = {});

/// Levinson-Durbin recursion. Returns a[0..order] with a[0] = 1 for the
/// predictor polynomial 1 + sum a_k z^-k; empty when r[0] is zero.
std::vector<double> levinson_durbin(std::span<const double> autocorr, int order);

struct MfccConfig {
  double pre_emphasis = 0.97;
  int filters = 26;
  int coefficients = 8;    // c1..c8, c0 excluded
  double log_floor = 1e-10;
};

/// Pre-emphasis, Hamming window, power FFT, triangular mel filters spanning
/// 0 Hz to Nyquist, log energies, orthonormal DCT-II.
std::vector<double> mfcc(std::span<const double> window, double rate, const MfccConfig& config = {});

double hz_to_mel(double hz);
double mel_to_hz(double mel);

}  // namespace voxcue
