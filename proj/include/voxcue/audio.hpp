#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace voxcue {

inline constexpr double kCanonicalRate = 11025.0;

/// Mono audio with samples normalized to [-1, 1]. Immutable once built.
class AudioClip {
public:
  AudioClip() = default;
  /// Throws Error(InvalidArgument) on a non-positive rate or samples outside [-1, 1].
  AudioClip(std::vector<double> samples, double sample_rate, std::string source_id = {},
            double original_rate = 0.0);

  std::span<const double> samples() const noexcept { return samples_; }
  std::size_t size() const noexcept { return samples_.size(); }
  double sample_rate() const noexcept { return sample_rate_; }
  /// Rate of the file the clip was decoded from, before any resampling.
  double original_rate() const noexcept { return original_rate_; }
  double duration() const noexcept {
    return sample_rate_ > 0.0 ? static_cast<double>(samples_.size()) / sample_rate_ : 0.0;
  }
  const std::string& source_id() const noexcept { return source_id_; }

private:
  std::vector<double> samples_;
  double sample_rate_ = kCanonicalRate;
  double original_rate_ = kCanonicalRate;
  std::string source_id_;
};

/// Decodes RIFF/WAVE linear PCM (8/16/24/32-bit, any channel count).
/// Channels are averaged. Integer samples are scaled by 2^(bits-1), so 16-bit
/// values divide by 32768 and 8-bit unsigned values map as (v - 128) / 128.
/// Errors: Io (unreadable), Format (not RIFF/WAVE), UnsupportedEncoding
/// (non-PCM), EmptyAudio (no sample frames).
AudioClip load_wav(const std::filesystem::path& path);
AudioClip decode_wav(std::span<const std::uint8_t> bytes, std::string source_id = {});

/// 16-bit PCM mono encoding; samples are rounded to the nearest step of 1/32768.
std::vector<std::uint8_t> encode_wav16(const AudioClip& clip);
void write_wav16(const AudioClip& clip, const std::filesystem::path& path);

/// Band-limited resampling with a Kaiser-windowed sinc (cutoff 0.45 x the
/// lower of the two rates). Returns the clip unchanged when rates match.
AudioClip resample(const AudioClip& clip, double target_rate);

/// load_wav followed by resample to `rate`.
AudioClip load_canonical(const std::filesystem::path& path, double rate = kCanonicalRate);

}  // namespace voxcue
