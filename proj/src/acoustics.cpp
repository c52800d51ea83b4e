#include "voxcue/acoustics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "voxcue/dsp.hpp"
#include "voxcue/error.hpp"

namespace voxcue {

namespace {

constexpr double kOctaveTolerance = 0.95;
constexpr double kCycleSearch = 0.2;  // fraction of a period searched around each expected mark

void check_pitch_range(double rate, const PitchParams& p) {
  if (!(p.floor > 0.0) || !(p.floor < p.ceiling) || !(p.ceiling < rate / 2.0))
    throw Error(ErrorCode::InvalidArgument, "pitch range requires 0 < floor < ceiling < rate/2");
}

}  // namespace

std::optional<PitchEstimate> estimate_frame_pitch(std::span<const double> frame, double rate,
                                                  const PitchParams& params) {
  check_pitch_range(rate, params);
  const auto lo = static_cast<std::size_t>(std::ceil(rate / params.ceiling));
  auto hi = static_cast<std::size_t>(std::floor(rate / params.floor));
  if (frame.size() < 4) return std::nullopt;
  hi = std::min(hi, frame.size() - 3);
  if (lo < 2 || hi <= lo) return std::nullopt;

  // r[i] is lag lo - 1 + i, so both neighbours of every candidate are available.
  const auto r = dsp::normalized_autocorrelation(frame, lo - 1, hi + 1);
  double best = 0.0;
  for (std::size_t i = 1; i + 1 < r.size(); ++i)
    if (r[i] >= r[i - 1] && r[i] >= r[i + 1]) best = std::max(best, r[i]);
  if (best < params.voicing_threshold) return std::nullopt;

  for (std::size_t i = 1; i + 1 < r.size(); ++i) {
    if (!(r[i] >= r[i - 1] && r[i] >= r[i + 1]) || r[i] < kOctaveTolerance * best) continue;
    const auto peak = dsp::parabolic_peak(r, i);
    const double lag = static_cast<double>(lo - 1) + peak.position;
    const double strength = std::clamp(peak.value, 0.0, 1.0);
    const double f0 = rate / lag;
    if (strength < params.voicing_threshold || f0 < params.floor || f0 > params.ceiling) return std::nullopt;
    return PitchEstimate{f0, strength};
  }
  return std::nullopt;
}

std::vector<std::optional<double>> estimate_f0(std::span<const double> window, double rate,
                                               const PitchParams& params) {
  check_pitch_range(rate, params);
  const auto len = static_cast<std::size_t>(std::lround(params.subframe_length * rate));
  const auto hop = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(params.subframe_hop * rate)));
  std::vector<std::optional<double>> out;
  if (window.empty()) return out;
  if (window.size() <= len) {
    auto p = estimate_frame_pitch(window, rate, params);
    out.push_back(p ? std::optional<double>(p->f0) : std::nullopt);
    return out;
  }
  const std::size_t count = (window.size() - len) / hop + 1;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    auto p = estimate_frame_pitch(window.subspan(i * hop, len), rate, params);
    out.push_back(p ? std::optional<double>(p->f0) : std::nullopt);
  }
  return out;
}

double intensity_db(std::span<const double> window) { return dsp::mean_square_db(window); }

std::optional<CycleMarks> mark_cycles(std::span<const double> window, double rate, double f0) {
  if (!(f0 > 0.0) || window.size() < 3) return std::nullopt;
  const double period = rate / f0;
  const auto n = static_cast<long>(window.size());

  auto peak_in = [&](long from, long to) -> std::optional<dsp::Peak> {
    from = std::max(from, 0L);
    to = std::min(to, n - 1);
    if (to < from) return std::nullopt;
    long best = from;
    for (long i = from + 1; i <= to; ++i)
      if (window[static_cast<std::size_t>(i)] > window[static_cast<std::size_t>(best)]) best = i;
    if (!(window[static_cast<std::size_t>(best)] > 0.0)) return std::nullopt;
    return dsp::parabolic_peak(window, static_cast<std::size_t>(best));
  };

  std::vector<dsp::Peak> marks;
  auto first = peak_in(0, static_cast<long>(std::ceil(period)) - 1);
  if (!first) return std::nullopt;
  marks.push_back(*first);
  for (;;) {
    const double expected = marks.back().position + period;
    const auto from = static_cast<long>(std::ceil(expected - kCycleSearch * period));
    const auto to = static_cast<long>(std::floor(expected + kCycleSearch * period));
    if (to > n - 1) break;
    auto next = peak_in(from, to);
    if (!next || next->position <= marks.back().position) break;
    marks.push_back(*next);
  }
  if (marks.size() < 3) return std::nullopt;

  CycleMarks out;
  for (std::size_t i = 1; i < marks.size(); ++i)
    out.periods.push_back((marks[i].position - marks[i - 1].position) / rate);
  for (const auto& m : marks) out.amplitudes.push_back(m.value);
  return out;
}

namespace {

std::optional<double> local_perturbation(std::span<const double> v) {
  if (v.size() < 2) return std::nullopt;
  double diff = 0.0, total = 0.0;
  for (std::size_t i = 1; i < v.size(); ++i) diff += std::abs(v[i] - v[i - 1]);
  for (double x : v) total += x;
  const double m = total / static_cast<double>(v.size());
  if (!(m > 0.0)) return std::nullopt;
  return (diff / static_cast<double>(v.size() - 1)) / m;
}

std::optional<double> five_point_quotient(std::span<const double> v) {
  if (v.size() < 5) return std::nullopt;
  double dev = 0.0, total = 0.0;
  for (double x : v) total += x;
  const double m = total / static_cast<double>(v.size());
  if (!(m > 0.0)) return std::nullopt;
  for (std::size_t i = 2; i + 2 < v.size(); ++i) {
    const double local = (v[i - 2] + v[i - 1] + v[i] + v[i + 1] + v[i + 2]) / 5.0;
    dev += std::abs(v[i] - local);
  }
  return (dev / static_cast<double>(v.size() - 4)) / m;
}

}  // namespace

Perturbation jitter_shimmer(std::span<const double> periods, std::span<const double> amplitudes) {
  return {local_perturbation(periods), five_point_quotient(periods), local_perturbation(amplitudes),
          five_point_quotient(amplitudes)};
}

std::optional<double> harmonicity_db(std::span<const double> window, double rate, std::optional<double> f0) {
  if (!f0 || !(*f0 > 0.0)) return std::nullopt;
  const double lag = rate / *f0;
  const auto centre = static_cast<long>(std::lround(lag));
  const long lo = std::max(2L, centre - 2);
  const long hi = centre + 2;
  if (hi + 2 >= static_cast<long>(window.size())) return std::nullopt;
  const auto r = dsp::normalized_autocorrelation(window, static_cast<std::size_t>(lo - 1),
                                                 static_cast<std::size_t>(hi + 1));
  std::size_t best = 1;
  for (std::size_t i = 2; i + 1 < r.size(); ++i)
    if (r[i] > r[best]) best = i;
  const double value = dsp::parabolic_peak(r, best).value;
  if (value <= 0.0) return kHnrMinDb;
  if (value >= 1.0) return kHnrMaxDb;
  return std::clamp(10.0 * std::log10(value / (1.0 - value)), kHnrMinDb, kHnrMaxDb);
}

std::vector<double> levinson_durbin(std::span<const double> r, int order) {
  if (r.empty() || !(r[0] > 0.0) || order < 1 || static_cast<int>(r.size()) <= order) return {};
  std::vector<double> a(static_cast<std::size_t>(order) + 1, 0.0), prev;
  a[0] = 1.0;
  double err = r[0];
  for (int i = 1; i <= order; ++i) {
    double acc = r[static_cast<std::size_t>(i)];
    for (int j = 1; j < i; ++j) acc += a[static_cast<std::size_t>(j)] * r[static_cast<std::size_t>(i - j)];
    const double k = -acc / err;
    prev = a;
    for (int j = 1; j < i; ++j)
      a[static_cast<std::size_t>(j)] = prev[static_cast<std::size_t>(j)] + k * prev[static_cast<std::size_t>(i - j)];
    a[static_cast<std::size_t>(i)] = k;
    err *= (1.0 - k * k);
    if (!(err > 0.0)) break;
  }
  return a;
}

Formants lpc_formants(std::span<const double> window, double rate, const FormantParams& params) {
  Formants out;
  if (window.size() <= static_cast<std::size_t>(params.order)) return out;
  auto x = dsp::pre_emphasis(window, params.pre_emphasis);
  const auto w = dsp::hamming(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] *= w[i];

  std::vector<double> r(static_cast<std::size_t>(params.order) + 1, 0.0);
  for (std::size_t lag = 0; lag < r.size(); ++lag)
    for (std::size_t i = 0; i + lag < x.size(); ++i) r[lag] += x[i] * x[i + lag];
  const auto a = levinson_durbin(r, params.order);
  if (a.empty()) return out;

  const int p = params.order;
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(p, p);
  for (int j = 0; j < p; ++j) companion(0, j) = -a[static_cast<std::size_t>(j) + 1];
  for (int i = 1; i < p; ++i) companion(i, i - 1) = 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  if (solver.info() != Eigen::Success) return out;

  const double nyquist = rate / 2.0;
  std::vector<std::pair<double, double>> candidates;
  for (const auto& z : solver.eigenvalues()) {
    if (z.imag() <= 0.0) continue;
    const double radius = std::abs(z);
    if (!(radius > 0.0) || radius >= 1.0) continue;
    const double freq = std::atan2(z.imag(), z.real()) * rate / (2.0 * std::numbers::pi);
    const double bw = -(rate / std::numbers::pi) * std::log(radius);
    if (freq > params.edge_margin && freq < nyquist - params.edge_margin && bw > 0.0 && bw < params.max_bandwidth)
      candidates.emplace_back(freq, bw);
  }
  std::sort(candidates.begin(), candidates.end());
  for (std::size_t k = 0; k < 3 && k < candidates.size(); ++k) {
    out.frequency[k] = candidates[k].first;
    out.bandwidth[k] = candidates[k].second;
  }
  return out;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

std::vector<double> mfcc(std::span<const double> window, double rate, const MfccConfig& config) {
  const auto m = static_cast<std::size_t>(config.filters);
  std::vector<double> out(static_cast<std::size_t>(config.coefficients), 0.0);
  if (window.empty() || m == 0) return out;

  auto x = dsp::pre_emphasis(window, config.pre_emphasis);
  const auto w = dsp::hamming(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] *= w[i];
  const std::size_t nfft = dsp::next_pow2(x.size());
  const auto power = dsp::power_spectrum(x, nfft);

  const double mel_top = hz_to_mel(rate / 2.0);
  std::vector<double> edges(m + 2);
  for (std::size_t i = 0; i < edges.size(); ++i)
    edges[i] = mel_to_hz(mel_top * static_cast<double>(i) / static_cast<double>(m + 1));

  std::vector<double> log_energy(m);
  for (std::size_t f = 0; f < m; ++f) {
    const double left = edges[f], centre = edges[f + 1], right = edges[f + 2];
    double e = 0.0;
    for (std::size_t k = 0; k < power.size(); ++k) {
      const double hz = static_cast<double>(k) * rate / static_cast<double>(nfft);
      double weight = 0.0;
      if (hz >= left && hz <= centre) weight = (hz - left) / (centre - left);
      else if (hz > centre && hz <= right) weight = (right - hz) / (right - centre);
      e += weight * power[k];
    }
    log_energy[f] = std::log(std::max(e, config.log_floor));
  }

  const double scale = std::sqrt(2.0 / static_cast<double>(m));
  for (std::size_t c = 1; c <= out.size(); ++c) {
    double acc = 0.0;
    for (std::size_t f = 0; f < m; ++f)
      acc += log_energy[f] * std::cos(std::numbers::pi * static_cast<double>(c) * (static_cast<double>(f) + 0.5) /
                                      static_cast<double>(m));
    out[c - 1] = scale * acc;
  }
  return out;
}

}  // namespace voxcue
