#include "voxcue/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace voxcue::dsp {

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

void fft(std::vector<std::complex<double>>& data) {
  const std::size_t n = data.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const auto u = data[i + k];
        const auto v = data[i + k + len / 2] * w;
        data[i + k] = u + v;
        data[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

std::vector<double> power_spectrum(std::span<const double> x, std::size_t nfft) {
  std::vector<std::complex<double>> buf(nfft);
  for (std::size_t i = 0; i < x.size() && i < nfft; ++i) buf[i] = x[i];
  fft(buf);
  std::vector<double> out(nfft / 2 + 1);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = std::norm(buf[k]);
  return out;
}

std::vector<double> hamming(std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (n < 2) return w;
  for (std::size_t i = 0; i < n; ++i)
    w[i] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                  static_cast<double>(n - 1));
  return w;
}

std::vector<double> pre_emphasis(std::span<const double> x, double coef) {
  std::vector<double> y(x.size());
  if (x.empty()) return y;
  y[0] = x[0];
  for (std::size_t i = 1; i < x.size(); ++i) y[i] = x[i] - coef * x[i - 1];
  return y;
}

double mean_square_db(std::span<const double> x) {
  if (x.empty()) return kSilenceDb;
  double ss = 0.0;
  for (double v : x) ss += v * v;
  const double ms = ss / static_cast<double>(x.size());
  if (ms <= 0.0) return kSilenceDb;
  return std::max(kSilenceDb, 10.0 * std::log10(ms));
}

std::vector<double> normalized_autocorrelation(std::span<const double> x, std::size_t min_lag,
                                               std::size_t max_lag) {
  std::vector<double> r;
  if (max_lag < min_lag) return r;
  r.assign(max_lag - min_lag + 1, 0.0);
  const std::size_t n = x.size();
  if (n < 2) return r;

  double m = 0.0;
  for (double v : x) m += v;
  m /= static_cast<double>(n);
  std::vector<double> c(n);
  for (std::size_t i = 0; i < n; ++i) c[i] = x[i] - m;

  // prefix[i] = sum of c[0..i-1]^2
  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + c[i] * c[i];

  for (std::size_t lag = min_lag; lag <= max_lag; ++lag) {
    if (lag >= n) break;
    const std::size_t len = n - lag;
    double num = 0.0;
    for (std::size_t i = 0; i < len; ++i) num += c[i] * c[i + lag];
    const double e0 = prefix[len];
    const double e1 = prefix[n] - prefix[lag];
    const double den = std::sqrt(e0 * e1);
    if (den > 1e-300) r[lag - min_lag] = std::clamp(num / den, -1.0, 1.0);
  }
  return r;
}

Peak parabolic_peak(std::span<const double> y, std::size_t i) {
  if (i == 0 || i + 1 >= y.size()) return {static_cast<double>(i), y[i]};
  const double a = y[i - 1];
  const double b = y[i];
  const double c = y[i + 1];
  const double denom = a - 2.0 * b + c;
  if (std::abs(denom) < 1e-300) return {static_cast<double>(i), b};
  double delta = 0.5 * (a - c) / denom;
  delta = std::clamp(delta, -0.5, 0.5);
  return {static_cast<double>(i) + delta, b - 0.25 * (a - c) * delta};
}

}  // namespace voxcue::dsp
