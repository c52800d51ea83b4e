#pragma once

// Synthetic interview corpus with known ground truth: formant-synthesized
// syllable sequences whose pause structure, pitch and spectral tilt follow a
// latent per-speaker attitude, plus ratings drawn from the same latent.

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "voxcue/audio.hpp"
#include "voxcue/pipeline.hpp"
#include "voxcue/regression.hpp"

namespace voxcue {

struct SynthParams {
  std::size_t speakers = 20;
  double session_seconds = 20.0;
  double sample_rate = 11025.0;
  std::uint64_t seed = 42;
  double rating_noise = 0.45;     // P ratings, in rating points
  double sa_rating_noise = 1.0;   // SA ratings
};

struct SynthSpeaker {
  std::string id;
  double attitude = 0.0;  // latent, N(0, 1)
  double f0_base = 120.0;
  double tract_scale = 1.0;
  double gain = 0.1;
  double pause_length = 0.8;  // s, mean discourse pause
  double articulation = 1.0;  // syllable duration scale
};

/// DV names with the sign of their dependence on the latent attitude.
const std::vector<std::pair<std::string, double>>& synth_dvs();

std::vector<SynthSpeaker> synth_speakers(const SynthParams& p);

/// One session recording; deterministic in (seed, speaker index, session).
AudioClip synth_session(const SynthSpeaker& speaker, std::size_t speaker_index, Session session,
                        const SynthParams& p);

RatingTable synth_ratings(const std::vector<SynthSpeaker>& speakers, const SynthParams& p);

struct SynthCorpus {
  std::vector<SynthSpeaker> speakers;
  std::vector<ManifestEntry> manifest;
  RatingTable ratings;
};

/// Writes wav/<speaker>_<session>.wav, manifest.csv, ratings.csv and
/// latents.csv under out_dir. The manifest file uses paths relative to
/// out_dir; the returned entries carry them joined onto out_dir.
SynthCorpus write_synth_corpus(const std::filesystem::path& out_dir, const SynthParams& p);

}  // namespace voxcue
