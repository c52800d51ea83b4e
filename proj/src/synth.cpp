#include "voxcue/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "voxcue/csv.hpp"
#include "voxcue/error.hpp"

namespace voxcue {

namespace {

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return std::mt19937_64(mix(mix(mix(seed) ^ a) ^ (b << 32)));
}

double uniform(std::mt19937_64& g, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(g); }
double normal(std::mt19937_64& g, double sd = 1.0) { return std::normal_distribution<double>(0.0, sd)(g); }

struct Vowel {
  double f1, f2, f3, f4;
};
constexpr Vowel kVowels[] = {
    {700, 1200, 2600, 3400}, {300, 2300, 3000, 3600}, {350, 800, 2400, 3300}, {500, 1800, 2600, 3500}, {500, 900, 2500, 3400}};

// Session-level topic effects shared by all speakers.
struct Topic {
  double f0_scale, pause_scale, syllable_scale, loudness_spread;
};
Topic topic(Session s) {
  switch (s) {
    case Session::S1: return {1.00, 1.00, 1.00, 0.20};
    case Session::S2: return {1.06, 0.95, 0.96, 0.30};
    case Session::S3: return {0.97, 1.12, 1.06, 0.20};
  }
  return {1, 1, 1, 0.2};
}

class Resonator {
public:
  Resonator(double f, double bw, double rate) {
    const double t = 1.0 / rate;
    c_ = -std::exp(-2.0 * std::numbers::pi * bw * t);
    b_ = 2.0 * std::exp(-std::numbers::pi * bw * t) * std::cos(2.0 * std::numbers::pi * f * t);
    a_ = 1.0 - b_ - c_;
  }
  double operator()(double x) {
    const double y = a_ * x + b_ * y1_ + c_ * y2_;
    y2_ = y1_;
    y1_ = y;
    return y;
  }

private:
  double a_, b_, c_, y1_ = 0.0, y2_ = 0.0;
};

void add_vowel(std::vector<double>& out, std::size_t at, std::size_t n, double f0, const Vowel& v, double scale,
               double tilt, double amp, double rate, std::mt19937_64& g) {
  std::vector<double> y(n);
  Resonator r1(v.f1 * scale, 80, rate), r2(v.f2 * scale, 100, rate), r3(v.f3 * scale, 140, rate),
      r4(std::min(v.f4 * scale, 0.45 * rate), 200, rate);
  double phase = 1.0, lp = 0.0, period_jitter = 1.0;
  const double glide = uniform(g, -0.06, 0.06);
  for (std::size_t i = 0; i < n; ++i) {
    const double frac = static_cast<double>(i) / static_cast<double>(n);
    const double f = f0 * (1.0 + glide * (frac - 0.5)) * period_jitter;
    double x = 0.0;
    phase += f / rate;
    if (phase >= 1.0) {
      phase -= 1.0;
      x = 1.0 + normal(g, 0.02);
      period_jitter = 1.0 + normal(g, 0.003);
    }
    x += normal(g, 0.002);  // aspiration
    lp = x + tilt * lp;
    y[i] = r4(r3(r2(r1(lp))));
  }
  double ss = 0.0;
  for (double s : y) ss += s * s;
  const double rms = std::sqrt(ss / static_cast<double>(n));
  const std::size_t ramp = std::min<std::size_t>(n / 4, static_cast<std::size_t>(0.015 * rate));
  for (std::size_t i = 0; i < n; ++i) {
    double env = 1.0;
    if (i < ramp) env = 0.5 - 0.5 * std::cos(std::numbers::pi * static_cast<double>(i) / static_cast<double>(ramp));
    if (n - 1 - i < ramp)
      env = 0.5 - 0.5 * std::cos(std::numbers::pi * static_cast<double>(n - 1 - i) / static_cast<double>(ramp));
    out[at + i] += amp * env * y[i] / (rms > 0 ? rms : 1.0);
  }
}

}  // namespace

const std::vector<std::pair<std::string, double>>& synth_dvs() {
  static const std::vector<std::pair<std::string, double>> dvs = {
      {"cooperative", 1.0}, {"practical_solution", 1.0}, {"serene", 1.0},
      {"determined", 1.0},  {"answered_properly", 1.0},  {"hesitant", -1.0}};
  return dvs;
}

std::vector<SynthSpeaker> synth_speakers(const SynthParams& p) {
  std::vector<SynthSpeaker> out;
  for (std::size_t i = 0; i < p.speakers; ++i) {
    auto g = stream(p.seed, i, 0);
    SynthSpeaker s;
    char id[32];
    std::snprintf(id, sizeof id, "spk%03zu", i + 1);
    s.id = id;
    s.attitude = normal(g);
    const bool high = uniform(g, 0, 1) < 0.5;
    s.f0_base = (high ? 205.0 : 115.0) * (1.0 + normal(g, 0.06)) + 5.0 * s.attitude;
    s.tract_scale = (high ? 1.08 : 0.96) * (1.0 + normal(g, 0.02));
    s.gain = 0.08 * std::pow(10.0, normal(g, 2.0) / 20.0);
    s.pause_length = uniform(g, 0.55, 1.3);
    s.articulation = uniform(g, 0.7, 1.4);
    out.push_back(s);
  }
  return out;
}

AudioClip synth_session(const SynthSpeaker& sp, std::size_t speaker_index, Session session, const SynthParams& p) {
  auto g = stream(p.seed, speaker_index, static_cast<std::uint64_t>(session));
  const double rate = p.sample_rate;
  const Topic tp = topic(session);
  const double a = sp.attitude;

  // The attitude sets the pause-to-speech proportion; how it splits into
  // pause length and pause frequency is a speaker habit independent of it.
  const double target_ratio = 0.55 * std::exp(-0.35 * a);
  const double pause_mean = sp.pause_length * tp.pause_scale;
  const double phrase_mean = std::clamp(sp.pause_length / target_ratio, 0.5, 5.0);
  const double tilt = std::clamp(0.90 + 0.025 * a, 0.80, 0.97);
  const double f0 = sp.f0_base * tp.f0_scale;

  const auto total = static_cast<std::size_t>(p.session_seconds * rate);
  std::vector<double> out(total + static_cast<std::size_t>(4.0 * rate), 0.0);
  double t = 0.25;
  while (t < p.session_seconds - 0.5) {
    const double phrase_end = t + phrase_mean * uniform(g, 0.85, 1.15);
    while (t < phrase_end) {
      const double dur = uniform(g, 0.09, 0.20) * tp.syllable_scale * sp.articulation;
      const auto at = static_cast<std::size_t>(t * rate);
      const auto n = static_cast<std::size_t>(dur * rate);
      if (at + n >= out.size()) break;
      const Vowel& v = kVowels[std::uniform_int_distribution<int>(0, 4)(g)];
      const double amp = sp.gain * std::pow(10.0, uniform(g, -tp.loudness_spread, tp.loudness_spread) * 0.5);
      add_vowel(out, at, n, f0 * (1.0 + uniform(g, -0.08, 0.08)), v, sp.tract_scale, tilt, amp, rate, g);
      t += dur;
      // Unvoiced consonant cluster between nuclei.
      const double gap = uniform(g, 0.05, 0.11) * sp.articulation;
      const auto g0 = static_cast<std::size_t>(t * rate), g1 = static_cast<std::size_t>((t + gap) * rate);
      for (std::size_t i = g0; i < std::min(g1, out.size()); ++i) out[i] += normal(g, 0.004);
      t += gap;
    }
    t += pause_mean * uniform(g, 0.92, 1.08);
  }
  out.resize(std::min(out.size(), static_cast<std::size_t>((t + 0.2) * rate)));
  for (double& s : out) s = std::clamp(s + normal(g, 2e-4), -0.99, 0.99);
  char id[64];
  std::snprintf(id, sizeof id, "%s_%s", sp.id.c_str(), std::string(to_string(session)).c_str());
  return AudioClip(std::move(out), rate, id);
}

RatingTable synth_ratings(const std::vector<SynthSpeaker>& speakers, const SynthParams& p) {
  RatingTable t;
  for (std::size_t i = 0; i < speakers.size(); ++i) {
    auto g = stream(p.seed, i, 99);
    for (const auto& [dv, sign] : synth_dvs()) {
      for (const auto rater : {RaterType::P, RaterType::SA}) {
        const double noise = rater == RaterType::P ? p.rating_noise : p.sa_rating_noise;
        const double v = 4.0 + sign * 1.3 * speakers[i].attitude + normal(g, noise);
        t.add(speakers[i].id, dv, rater, static_cast<int>(std::clamp(std::lround(v), 1L, 7L)));
      }
    }
  }
  return t;
}

SynthCorpus write_synth_corpus(const std::filesystem::path& out_dir, const SynthParams& p) {
  if (p.speakers == 0) throw Error(ErrorCode::InvalidArgument, "synthetic corpus needs at least one speaker");
  if (!(p.session_seconds >= 2.0)) throw Error(ErrorCode::InvalidArgument, "session length must be at least 2 s");
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "wav", ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create '" + (out_dir / "wav").string() + "': " + ec.message());

  SynthCorpus c;
  c.speakers = synth_speakers(p);
  for (std::size_t i = 0; i < c.speakers.size(); ++i) {
    for (auto s : {Session::S1, Session::S2, Session::S3}) {
      const auto clip = synth_session(c.speakers[i], i, s, p);
      const auto rel = std::filesystem::path("wav") / (clip.source_id() + ".wav");
      write_wav16(clip, out_dir / rel);
      c.manifest.push_back({rel, c.speakers[i].id, s});
    }
  }
  c.ratings = synth_ratings(c.speakers, p);

  auto open = [&](const char* name) {
    std::ofstream f(out_dir / name);
    if (!f) throw Error(ErrorCode::Io, "cannot write '" + (out_dir / name).string() + "'");
    return f;
  };
  {
    auto f = open("manifest.csv");
    write_manifest(f, c.manifest);
  }
  for (auto& e : c.manifest) e.path = out_dir / e.path;
  {
    auto f = open("ratings.csv");
    write_ratings_csv(f, c.ratings);
  }
  {
    auto f = open("latents.csv");
    f << "speaker_id,attitude,f0_base,tract_scale,gain,pause_length,articulation\n";
    for (const auto& s : c.speakers)
      f << s.id << ',' << csv::format_double(s.attitude) << ',' << csv::format_double(s.f0_base) << ','
        << csv::format_double(s.tract_scale) << ',' << csv::format_double(s.gain) << ','
        << csv::format_double(s.pause_length) << ',' << csv::format_double(s.articulation) << '\n';
  }
  return c;
}

}  // namespace voxcue
