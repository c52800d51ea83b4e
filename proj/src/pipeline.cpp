#include "voxcue/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <thread>

#include "voxcue/audio.hpp"
#include "voxcue/csv.hpp"
#include "voxcue/error.hpp"

namespace voxcue {

std::vector<ManifestEntry> read_manifest(std::istream& in, const std::filesystem::path& base) {
  std::vector<std::string> f;
  std::size_t line = 0;
  std::vector<ManifestEntry> out;
  if (!csv::next_record(in, f, line)) return out;
  if (f.size() != 3 || csv::trim(f[0]) != "path" || csv::trim(f[1]) != "speaker_id" || csv::trim(f[2]) != "session")
    throw Error(ErrorCode::Format, "manifest: header must be path,speaker_id,session");
  while (csv::next_record(in, f, line)) {
    if (f.size() != 3) throw Error(ErrorCode::Format, "manifest line " + std::to_string(line) + ": expected 3 fields");
    ManifestEntry e;
    e.path = csv::trim(f[0]);
    if (e.path.is_relative() && !base.empty()) e.path = base / e.path;
    e.speaker_id = csv::trim(f[1]);
    if (e.speaker_id.empty()) throw Error(ErrorCode::Format, "manifest line " + std::to_string(line) + ": empty speaker_id");
    try {
      e.session = parse_session(f[2]);
    } catch (const Error& err) {
      throw Error(ErrorCode::Format, "manifest line " + std::to_string(line) + ": " + err.what());
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open manifest '" + path.string() + "'");
  return read_manifest(in, path.parent_path());
}

void write_manifest(std::ostream& out, const std::vector<ManifestEntry>& entries) {
  out << "path,speaker_id,session\n";
  for (const auto& e : entries)
    out << csv::quote(e.path.generic_string()) << ',' << csv::quote(e.speaker_id) << ',' << to_string(e.session) << '\n';
}

ExtractionReport extract_manifest(const std::vector<ManifestEntry>& entries, const RunConfig& config) {
  config.validate();
  const auto params = config.analysis();
  struct Slot {
    std::optional<FeatureVector> features;
    std::string warning;
  };
  std::vector<Slot> slots(entries.size());
  std::atomic<std::size_t> next{0};

  auto work = [&] {
    for (std::size_t i = next++; i < entries.size(); i = next++) {
      const auto& e = entries[i];
      try {
        const auto clip = load_canonical(e.path, config.sample_rate);
        auto fv = extract_features(clip, params);
        std::string absent;
        for (std::size_t k = 0; k < kFeatureCount; ++k)
          if (!fv.at(k)) absent += (absent.empty() ? "" : ",") + std::string(feature_names()[k]);
        if (!absent.empty()) slots[i].warning = e.path.string() + ": absent features: " + absent;
        slots[i].features = std::move(fv);
      } catch (const std::exception& ex) {
        slots[i].warning = e.path.string() + ": skipped: " + ex.what();
      }
    }
  };

  unsigned n = config.workers ? config.workers : std::max(1u, std::thread::hardware_concurrency());
  n = static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(entries.size(), 1)));
  if (n <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  ExtractionReport rep;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (!slots[i].warning.empty()) rep.warnings.push_back(slots[i].warning);
    if (!slots[i].features) {
      ++rep.failed;
      continue;
    }
    rep.table.add({entries[i].speaker_id, entries[i].session, *slots[i].features});
  }
  return rep;
}

std::vector<ScoreRow> score_table(const FeatureTable& table, const ReferenceStats& stats) {
  std::vector<ScoreRow> out;
  for (const auto& row : table.rows()) {
    for (const auto& model : registry()) {
      ScoreRow r{row.speaker_id, row.session, model.dv, model.session, std::nullopt, {}};
      std::vector<Feature> needed;
      for (const auto& t : model.terms) needed.push_back(t.feature);
      try {
        r.report = score(model, standardize_against(row.features, stats, needed));
      } catch (const Error& e) {
        r.error = e.what();
      }
      out.push_back(std::move(r));
    }
  }
  return out;
}

void write_score_csv(std::ostream& out, const std::vector<ScoreRow>& rows, std::size_t top_terms) {
  out << "# score = sum(coefficient * z); coefficients read as standardized betas; standardized units\n";
  out << "speaker_id,session,dv,model_session,score,text_uncertain,top_terms\n";
  for (const auto& r : rows) {
    out << csv::quote(r.speaker_id) << ',' << to_string(r.session) << ',' << r.dv << ',' << to_string(r.model_session)
        << ',';
    if (!r.report) {
      out << ",," << csv::quote("unscored: " + r.error) << '\n';
      continue;
    }
    auto terms = r.report->terms;
    std::stable_sort(terms.begin(), terms.end(),
                     [](const ScoreTerm& a, const ScoreTerm& b) { return std::abs(a.product) > std::abs(b.product); });
    std::string top;
    for (std::size_t i = 0; i < std::min(top_terms, terms.size()); ++i) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%+.4f", terms[i].product);
      top += (i ? ";" : "") + std::string(feature_name(terms[i].feature)) + ":" + buf;
    }
    out << csv::format_double(r.report->score) << ',' << (r.report->text_uncertain ? "1" : "0") << ','
        << csv::quote(top) << '\n';
  }
}

}  // namespace voxcue
