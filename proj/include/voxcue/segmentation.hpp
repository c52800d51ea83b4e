#pragma once

// Frame-level voicing analysis, vowel-nucleus detection and discourse-pause
// detection.

#include <iosfwd>
#include <span>
#include <vector>

#include "voxcue/audio.hpp"

namespace voxcue {

struct SegmentationParams {
  double frame_length = 0.025;      // s
  double hop = 0.010;               // s
  double f0_floor = 75.0;           // Hz, bounds the voicing lag search
  double f0_ceiling = 500.0;
  double voicing_threshold = 0.45;  // on the normalized autocorrelation peak
  double silence_db = -60.0;        // frames at or below this are never voiced
  double nucleus_drop_db = 6.0;     // vowel extent around its nucleus
  double min_vowel = 0.03;          // s
  double min_nucleus_gap = 0.06;    // s between accepted nuclei
  double speech_floor_drop_db = 20.0;  // non-voice: below median voiced energy minus this
  double min_pause = 0.400;         // s
  double boundary_resolution = 0.002;  // s, block size for refining pause edges
};

struct FrameTrack {
  double sample_rate = kCanonicalRate;
  std::size_t frame_samples = 0;
  std::size_t hop_samples = 0;
  double frame_length = 0.0;  // frame_samples / sample_rate
  double hop = 0.0;           // hop_samples / sample_rate
  double duration = 0.0;      // of the analyzed clip
  std::vector<double> energy_db;
  std::vector<double> voicing;  // in [0, 1]
  std::vector<bool> voiced;
  // Short non-overlapping blocks used to place pause edges inside a frame.
  std::size_t block_samples = 0;
  double block = 0.0;
  std::vector<double> block_energy_db;

  std::size_t size() const noexcept { return energy_db.size(); }
  double frame_start(std::size_t i) const { return static_cast<double>(i) * hop; }
  double frame_center(std::size_t i) const { return frame_start(i) + 0.5 * frame_length; }
  // A run of frames [first, last] spans [center(first) - hop/2, center(last) + hop/2],
  // so adjacent runs tile the time axis without overlap.
  double run_start(std::size_t first) const { return frame_center(first) - 0.5 * hop; }
  double run_end(std::size_t last) const { return frame_center(last) + 0.5 * hop; }
};

struct VowelSegment {
  double start = 0.0;
  double end = 0.0;
  bool stressed = false;

  double duration() const noexcept { return end - start; }
  double center() const noexcept { return 0.5 * (start + end); }
};

struct PauseSegment {
  double start = 0.0;
  double end = 0.0;
  double duration() const noexcept { return end - start; }
};

struct SegmentationResult {
  std::vector<VowelSegment> vowels;  // sorted by start, stressed flags set
  std::vector<PauseSegment> pauses;
  double total_duration = 0.0;
  double total_speech = 0.0;  // total_duration minus summed pause time

  std::vector<VowelSegment> stressed() const;
};

/// Throws Error(InvalidArgument) when the clip is shorter than one frame.
FrameTrack analyze_frames(const AudioClip& clip, const SegmentationParams& params = {});

std::vector<VowelSegment> detect_vowels(const FrameTrack& track, const SegmentationParams& params = {});

/// Flags the ceil(n/2) longest vowels as stressed (ties go to the earlier start);
/// input order is preserved.
std::vector<VowelSegment> select_stressed(std::vector<VowelSegment> vowels);

std::vector<PauseSegment> detect_pauses(const FrameTrack& track, double clip_duration,
                                        const SegmentationParams& params = {});

SegmentationResult segment(const AudioClip& clip, const SegmentationParams& params = {});

/// CSV dump: kind,start_s,end_s,stressed
void write_segmentation_csv(std::ostream& out, const SegmentationResult& result);

}  // namespace voxcue
