#pragma once

// Batch operations over manifests and tables: parallel feature extraction,
// topic comparison and reference-model scoring.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "voxcue/config.hpp"
#include "voxcue/features.hpp"
#include "voxcue/models.hpp"
#include "voxcue/stats.hpp"

namespace voxcue {

struct ManifestEntry {
  std::filesystem::path path;
  std::string speaker_id;
  Session session = Session::S1;
};

/// Manifest CSV: path,speaker_id,session. Relative paths are resolved
/// against the manifest's directory.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);
std::vector<ManifestEntry> read_manifest(std::istream& in, const std::filesystem::path& base = {});
void write_manifest(std::ostream& out, const std::vector<ManifestEntry>& entries);

struct ExtractionReport {
  FeatureTable table;
  std::vector<std::string> warnings;  // manifest order
  std::size_t failed = 0;
};

/// Decodes (resampling to config.sample_rate) and analyzes every entry on a
/// worker pool. Unreadable files become warnings; rows keep manifest order.
/// Duplicate (speaker, session) keys throw DuplicateKey.
ExtractionReport extract_manifest(const std::vector<ManifestEntry>& entries, const RunConfig& config);

struct ScoreRow {
  std::string speaker_id;
  Session session = Session::S1;
  std::string dv;
  Session model_session = Session::S1;
  std::optional<ScoreReport> report;
  std::string error;  // why report is missing
};

/// Scores every table row against every registry model.
std::vector<ScoreRow> score_table(const FeatureTable& table, const ReferenceStats& stats);
/// speaker_id,session,dv,model_session,score,text_uncertain,top_terms
void write_score_csv(std::ostream& out, const std::vector<ScoreRow>& rows, std::size_t top_terms = 3);

}  // namespace voxcue
