#pragma once

// Signal builders and small oracles shared by the unit tests. Deliberately
// written without calling into the library's DSP code.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace testsupport {

inline constexpr double kPi = std::numbers::pi;

inline std::vector<double> sine(double f, double seconds, double rate, double amp = 0.5, double phase = 0.0) {
  std::vector<double> x(static_cast<std::size_t>(std::llround(seconds * rate)));
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = amp * std::sin(2 * kPi * f * static_cast<double>(i) / rate + phase);
  return x;
}

inline std::vector<double> sawtooth(double f, double seconds, double rate, double amp = 0.5) {
  std::vector<double> x(static_cast<std::size_t>(std::llround(seconds * rate)));
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double ph = std::fmod(f * static_cast<double>(i) / rate, 1.0);
    x[i] = amp * (2.0 * ph - 1.0);
  }
  return x;
}

inline std::vector<double> white_noise(std::size_t n, double sd, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::normal_distribution<double> d(0.0, sd);
  std::vector<double> x(n);
  for (auto& v : x) v = d(g);
  return x;
}

// Two-pole resonator with unit DC gain, applied in cascade.
inline std::vector<double> resonate(std::vector<double> x, double f, double bw, double rate) {
  const double r = std::exp(-kPi * bw / rate);
  const double b1 = 2 * r * std::cos(2 * kPi * f / rate), b2 = -r * r;
  const double g = 1 - b1 - b2;
  double y1 = 0, y2 = 0;
  for (auto& v : x) {
    const double y = g * v + b1 * y1 + b2 * y2;
    y2 = y1;
    y1 = y;
    v = y;
  }
  return x;
}

inline std::vector<double> impulse_train(double f0, double seconds, double rate) {
  std::vector<double> x(static_cast<std::size_t>(std::llround(seconds * rate)), 0.0);
  const double period = rate / f0;
  for (double t = 0; t < static_cast<double>(x.size()); t += period) x[static_cast<std::size_t>(t)] = 1.0;
  return x;
}

// Band-limited pulse train: equal-amplitude cosine harmonics up to Nyquist, so
// the period is exact even when rate / f0 is not an integer.
inline std::vector<double> harmonic_train(double f0, double seconds, double rate) {
  std::vector<double> x(static_cast<std::size_t>(std::llround(seconds * rate)), 0.0);
  for (int k = 1; k * f0 < 0.5 * rate; ++k)
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += std::cos(2 * kPi * k * f0 * static_cast<double>(i) / rate);
  return x;
}

inline std::vector<double> harmonic_vowel(double f0, std::vector<std::pair<double, double>> formants, double seconds,
                                          double rate, double peak = 0.5) {
  auto x = harmonic_train(f0, seconds, rate);
  for (auto [f, bw] : formants) x = resonate(std::move(x), f, bw, rate);
  double m = 0;
  for (double v : x) m = std::max(m, std::abs(v));
  for (auto& v : x) v *= peak / m;
  return x;
}

// Pulse train through three cascade resonators, normalized to a peak of `peak`.
inline std::vector<double> vowel(double f0, std::vector<std::pair<double, double>> formants, double seconds, double rate,
                                 double peak = 0.5) {
  auto x = impulse_train(f0, seconds, rate);
  for (auto [f, bw] : formants) x = resonate(std::move(x), f, bw, rate);
  double m = 0;
  for (double v : x) m = std::max(m, std::abs(v));
  for (auto& v : x) v *= peak / m;
  return x;
}

inline void append(std::vector<double>& dst, const std::vector<double>& src) { dst.insert(dst.end(), src.begin(), src.end()); }
inline void append_silence(std::vector<double>& dst, double seconds, double rate) {
  dst.insert(dst.end(), static_cast<std::size_t>(std::llround(seconds * rate)), 0.0);
}

// Direct O(n^2) DFT magnitudes, bins 0..n/2.
inline std::vector<double> dft_magnitude(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<double> mag(n / 2 + 1);
  for (std::size_t k = 0; k <= n / 2; ++k) {
    std::complex<double> acc{};
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * std::polar(1.0, -2 * kPi * double(k) * double(i) / double(n));
    mag[k] = std::abs(acc);
  }
  return mag;
}

// Minimal RIFF/WAVE writer for building decoder inputs byte by byte.
inline std::vector<std::uint8_t> wav_bytes(std::uint16_t format, std::uint16_t channels, std::uint32_t rate,
                                           std::uint16_t bits, const std::vector<std::uint8_t>& data,
                                           bool extensible = false) {
  std::vector<std::uint8_t> b;
  auto put = [&](std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  };
  auto tag = [&](const char* s) { b.insert(b.end(), s, s + 4); };
  const std::uint32_t fmt_size = extensible ? 40 : 16;
  tag("RIFF");
  put(4 + 8 + fmt_size + 8 + data.size(), 4);
  tag("WAVE");
  tag("fmt ");
  put(fmt_size, 4);
  put(extensible ? 0xFFFE : format, 2);
  put(channels, 2);
  put(rate, 4);
  put(rate * channels * (bits / 8), 4);
  put(channels * (bits / 8), 2);
  put(bits, 2);
  if (extensible) {
    put(22, 2);
    put(bits, 2);
    put(0, 4);
    put(format, 2);  // first two bytes of the subformat GUID
    const std::uint8_t guid_tail[14] = {0x00, 0x00, 0x00, 0x00, 0x10, 0x00, 0x80, 0x00, 0x00, 0xAA, 0x00, 0x38, 0x9B, 0x71};
    b.insert(b.end(), guid_tail, guid_tail + 14);
  }
  tag("data");
  put(data.size(), 4);
  b.insert(b.end(), data.begin(), data.end());
  return b;
}

inline std::vector<std::uint8_t> pcm16(const std::vector<std::int16_t>& v) {
  std::vector<std::uint8_t> d;
  for (auto s : v) {
    d.push_back(static_cast<std::uint8_t>(s & 0xFF));
    d.push_back(static_cast<std::uint8_t>((s >> 8) & 0xFF));
  }
  return d;
}

// MFCC written from the textbook recipe with a direct DFT, for comparison.
inline std::vector<double> reference_mfcc(const std::vector<double>& window, double rate) {
  const std::size_t n = window.size();
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double emph = i ? window[i] - 0.97 * window[i - 1] : window[i];
    x[i] = emph * (0.54 - 0.46 * std::cos(2 * kPi * double(i) / double(n - 1)));
  }
  std::size_t nfft = 1;
  while (nfft < n) nfft *= 2;
  std::vector<double> pw(nfft / 2 + 1);
  for (std::size_t k = 0; k < pw.size(); ++k) {
    double re = 0, im = 0;
    for (std::size_t i = 0; i < n; ++i) {
      re += x[i] * std::cos(2 * kPi * double(k * i) / double(nfft));
      im -= x[i] * std::sin(2 * kPi * double(k * i) / double(nfft));
    }
    pw[k] = re * re + im * im;
  }
  auto mel = [](double f) { return 1127.0 * std::log(1.0 + f / 700.0); };  // same scale as 2595 log10
  auto hz = [](double m) { return 700.0 * (std::exp(m / 1127.0) - 1.0); };
  const int M = 26;
  std::vector<double> logs(M);
  for (int m = 0; m < M; ++m) {
    const double lo = hz(mel(rate / 2) * m / (M + 1)), c = hz(mel(rate / 2) * (m + 1) / (M + 1)),
                 hi = hz(mel(rate / 2) * (m + 2) / (M + 1));
    double e = 0;
    for (std::size_t k = 0; k < pw.size(); ++k) {
      const double f = double(k) * rate / double(nfft);
      const double w = std::max(0.0, std::min((f - lo) / (c - lo), (hi - f) / (hi - c)));
      e += w * pw[k];
    }
    logs[m] = std::log(std::max(e, 1e-10));
  }
  std::vector<double> out;
  for (int k = 1; k <= 8; ++k) {
    double acc = 0;
    for (int m = 0; m < M; ++m) acc += logs[m] * std::cos(kPi * k * (m + 0.5) / M);
    out.push_back(std::sqrt(2.0 / M) * acc);
  }
  return out;
}

// Two-sided Student-t tail by Simpson integration of the density.
inline double t_two_sided_oracle(double t, double nu) {
  const double c = std::exp(std::lgamma((nu + 1) / 2) - std::lgamma(nu / 2)) / std::sqrt(nu * kPi);
  auto f = [&](double x) { return c * std::pow(1 + x * x / nu, -(nu + 1) / 2); };
  const int n = 20000;
  const double h = std::abs(t) / n;
  double s = f(0) + f(std::abs(t));
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4 : 2) * f(i * h);
  return 1.0 - 2.0 * s * h / 3.0;
}

struct Brute {
  double w_plus;
  double p;
};

// Signed-rank statistic and two-sided p by listing every sign assignment.
inline Brute wilcoxon_brute(const std::vector<double>& diffs) {
  std::vector<double> d;
  for (double v : diffs)
    if (v != 0) d.push_back(v);
  const std::size_t n = d.size();
  std::vector<double> rank(n);
  for (std::size_t i = 0; i < n; ++i) {
    double below = 0, equal = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (std::abs(d[j]) < std::abs(d[i])) ++below;
      if (std::abs(d[j]) == std::abs(d[i])) ++equal;
    }
    rank[i] = below + (equal + 1) / 2;
  }
  double w = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (d[i] > 0) w += rank[i];
  double le = 0, ge = 0;
  for (std::uint64_t mask = 0; mask < (1ULL << n); ++mask) {
    double s = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (mask >> i & 1) s += rank[i];
    if (s <= w + 1e-9) ++le;
    if (s >= w - 1e-9) ++ge;
  }
  const double total = std::ldexp(1.0, static_cast<int>(n));
  return {w, std::min(1.0, 2 * std::min(le, ge) / total)};
}

}  // namespace testsupport
