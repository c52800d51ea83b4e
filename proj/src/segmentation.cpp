#include "voxcue/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "voxcue/dsp.hpp"
#include "voxcue/error.hpp"

namespace voxcue {

FrameTrack analyze_frames(const AudioClip& clip, const SegmentationParams& params) {
  if (!(params.frame_length > 0.0) || !(params.hop > 0.0))
    throw Error(ErrorCode::InvalidArgument, "frame length and hop must be positive");
  if (!(params.f0_floor > 0.0) || !(params.f0_floor < params.f0_ceiling))
    throw Error(ErrorCode::InvalidArgument, "f0 floor must be positive and below the ceiling");

  FrameTrack track;
  track.sample_rate = clip.sample_rate();
  track.frame_samples = static_cast<std::size_t>(std::lround(params.frame_length * clip.sample_rate()));
  track.hop_samples = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(params.hop * clip.sample_rate())));
  track.frame_length = static_cast<double>(track.frame_samples) / clip.sample_rate();
  track.hop = static_cast<double>(track.hop_samples) / clip.sample_rate();
  track.duration = clip.duration();

  const auto x = clip.samples();
  if (track.frame_samples == 0 || x.size() < track.frame_samples)
    throw Error(ErrorCode::InvalidArgument, "clip shorter than one analysis frame");

  const std::size_t count = (x.size() - track.frame_samples) / track.hop_samples + 1;
  const auto min_lag = static_cast<std::size_t>(std::floor(clip.sample_rate() / params.f0_ceiling));
  const auto max_lag = std::min(track.frame_samples - 2,
                                static_cast<std::size_t>(std::ceil(clip.sample_rate() / params.f0_floor)));

  track.energy_db.resize(count);
  track.voicing.resize(count);
  track.voiced.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto frame = x.subspan(i * track.hop_samples, track.frame_samples);
    const double e = dsp::mean_square_db(frame);
    double strength = 0.0;
    if (e > params.silence_db) {
      const auto r = dsp::normalized_autocorrelation(frame, std::max<std::size_t>(1, min_lag), max_lag);
      for (double v : r) strength = std::max(strength, v);
    }
    track.energy_db[i] = e;
    track.voicing[i] = std::clamp(strength, 0.0, 1.0);
    track.voiced[i] = e > params.silence_db && strength >= params.voicing_threshold;
  }

  track.block_samples = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(params.boundary_resolution * clip.sample_rate())));
  track.block = static_cast<double>(track.block_samples) / clip.sample_rate();
  track.block_energy_db.resize(x.size() / track.block_samples);
  for (std::size_t b = 0; b < track.block_energy_db.size(); ++b)
    track.block_energy_db[b] = dsp::mean_square_db(x.subspan(b * track.block_samples, track.block_samples));
  return track;
}

std::vector<VowelSegment> detect_vowels(const FrameTrack& track, const SegmentationParams& params) {
  const std::size_t n = track.size();
  std::vector<std::size_t> nuclei_candidates;
  for (std::size_t i = 0; i < n; ++i) {
    if (!track.voiced[i]) continue;
    const double e = track.energy_db[i];
    const bool left_ok = i == 0 || e >= track.energy_db[i - 1];
    const bool right_ok = i + 1 == n || e >= track.energy_db[i + 1];
    if (left_ok && right_ok) nuclei_candidates.push_back(i);
  }
  std::stable_sort(nuclei_candidates.begin(), nuclei_candidates.end(),
                   [&](std::size_t a, std::size_t b) { return track.energy_db[a] > track.energy_db[b]; });

  std::vector<bool> consumed(n, false);
  std::vector<double> accepted_centers;
  std::vector<VowelSegment> vowels;
  for (std::size_t nucleus : nuclei_candidates) {
    if (consumed[nucleus]) continue;
    const double c = track.frame_center(nucleus);
    const bool too_close = std::any_of(accepted_centers.begin(), accepted_centers.end(), [&](double other) {
      return std::abs(other - c) < params.min_nucleus_gap - 1e-12;
    });
    if (too_close) continue;

    const double floor_db = track.energy_db[nucleus] - params.nucleus_drop_db;
    auto inside = [&](std::size_t i) { return track.voiced[i] && !consumed[i] && track.energy_db[i] >= floor_db; };
    std::size_t first = nucleus, last = nucleus;
    while (first > 0 && inside(first - 1)) --first;
    while (last + 1 < n && inside(last + 1)) ++last;
    for (std::size_t i = first; i <= last; ++i) consumed[i] = true;

    VowelSegment v{track.run_start(first), track.run_end(last), false};
    if (v.duration() + 1e-12 < params.min_vowel) continue;
    accepted_centers.push_back(c);
    vowels.push_back(v);
  }
  std::sort(vowels.begin(), vowels.end(), [](const VowelSegment& a, const VowelSegment& b) { return a.start < b.start; });
  return vowels;
}

std::vector<VowelSegment> select_stressed(std::vector<VowelSegment> vowels) {
  std::vector<std::size_t> order(vowels.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (vowels[a].duration() != vowels[b].duration()) return vowels[a].duration() > vowels[b].duration();
    return vowels[a].start < vowels[b].start;
  });
  const std::size_t keep = (vowels.size() + 1) / 2;
  for (auto& v : vowels) v.stressed = false;
  for (std::size_t k = 0; k < keep; ++k) vowels[order[k]].stressed = true;
  return vowels;
}

std::vector<PauseSegment> detect_pauses(const FrameTrack& track, double clip_duration,
                                        const SegmentationParams& params) {
  std::vector<double> voiced_energy;
  for (std::size_t i = 0; i < track.size(); ++i)
    if (track.voiced[i]) voiced_energy.push_back(track.energy_db[i]);

  double speech_floor = std::numeric_limits<double>::infinity();
  if (!voiced_energy.empty()) {
    const std::size_t mid = voiced_energy.size() / 2;
    std::nth_element(voiced_energy.begin(), voiced_energy.begin() + static_cast<std::ptrdiff_t>(mid), voiced_energy.end());
    double median = voiced_energy[mid];
    if (voiced_energy.size() % 2 == 0) {
      const double lower = *std::max_element(voiced_energy.begin(), voiced_energy.begin() + static_cast<std::ptrdiff_t>(mid));
      median = 0.5 * (median + lower);
    }
    speech_floor = median - params.speech_floor_drop_db;
  }

  std::vector<PauseSegment> pauses;
  const std::size_t n = track.size();
  const auto blocks = static_cast<long>(track.block_energy_db.size());
  auto quiet_block = [&](long b) { return b >= 0 && b < blocks && track.block_energy_db[static_cast<std::size_t>(b)] < speech_floor; };
  std::size_t i = 0;
  while (i < n) {
    auto non_voice = [&](std::size_t k) { return !track.voiced[k] && track.energy_db[k] < speech_floor; };
    if (!non_voice(i)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < n && non_voice(j + 1)) ++j;

    // Frame runs are a frame length too coarse at each edge; walk outwards
    // over quiet blocks, never back into an earlier pause.
    double start = 0.0;
    if (i > 0) {
      start = track.run_start(i);
      const double lo = pauses.empty() ? 0.0 : pauses.back().end;
      for (long b = static_cast<long>(std::floor(start / track.block)) - 1;
           quiet_block(b) && static_cast<double>(b) * track.block >= lo - 1e-12; --b)
        start = static_cast<double>(b) * track.block;
    }
    double end = std::max(clip_duration, track.run_end(j));
    if (j + 1 < n) {
      end = track.run_end(j);
      for (long b = static_cast<long>(std::ceil(end / track.block)); quiet_block(b); ++b)
        end = static_cast<double>(b + 1) * track.block;
    }
    if (end - start >= params.min_pause - 1e-9) pauses.push_back({start, end});
    i = j + 1;
  }
  return pauses;
}

std::vector<VowelSegment> SegmentationResult::stressed() const {
  std::vector<VowelSegment> out;
  for (const auto& v : vowels)
    if (v.stressed) out.push_back(v);
  return out;
}

SegmentationResult segment(const AudioClip& clip, const SegmentationParams& params) {
  const FrameTrack track = analyze_frames(clip, params);
  SegmentationResult result;
  result.pauses = detect_pauses(track, clip.duration(), params);
  // Vowel edges come from whole frames; trim them where a refined pause edge cuts in.
  std::vector<VowelSegment> vowels;
  for (auto v : detect_vowels(track, params)) {
    for (const auto& p : result.pauses) {
      if (p.start <= v.start && v.start < p.end) v.start = p.end;
      if (p.start < v.end && v.end <= p.end) v.end = p.start;
    }
    if (v.end > v.start) vowels.push_back(v);
  }
  result.vowels = select_stressed(std::move(vowels));
  result.total_duration = clip.duration();
  double paused = 0.0;
  for (const auto& p : result.pauses) paused += p.duration();
  result.total_speech = std::max(0.0, result.total_duration - paused);
  return result;
}

void write_segmentation_csv(std::ostream& out, const SegmentationResult& result) {
  const auto old_precision = out.precision(17);
  out << "kind,start_s,end_s,stressed\n";
  for (const auto& v : result.vowels)
    out << "vowel," << v.start << ',' << v.end << ',' << (v.stressed ? 1 : 0) << '\n';
  for (const auto& p : result.pauses) out << "pause," << p.start << ',' << p.end << ",0\n";
  out.precision(old_precision);
}

}  // namespace voxcue
