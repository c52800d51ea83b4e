#include "voxcue/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "voxcue/csv.hpp"
#include "voxcue/error.hpp"

namespace voxcue {

namespace {

double number(std::string_view key, std::string_view value, double lo, double hi, bool lo_open, bool hi_open) {
  const auto v = csv::parse_double(value);
  const std::string k(key);
  if (!v) throw Error(ErrorCode::InvalidArgument, "config '" + k + "': '" + std::string(value) + "' is not a number");
  const bool ok = (lo_open ? *v > lo : *v >= lo) && (hi_open ? *v < hi : *v <= hi);
  if (!ok) {
    std::ostringstream msg;
    msg << "config '" << k << "' = " << *v << " outside " << (lo_open ? '(' : '[') << lo << ", " << hi
        << (hi_open ? ')' : ']');
    throw Error(ErrorCode::InvalidArgument, msg.str());
  }
  return *v;
}

std::uint64_t unsigned_int(std::string_view key, std::string_view value) {
  const auto t = csv::trim(value);
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty())
    throw Error(ErrorCode::InvalidArgument, "config '" + std::string(key) + "': '" + t + "' is not an unsigned integer");
  return out;
}

}  // namespace

std::vector<std::string> RunConfig::keys() {
  return {"sample_rate",        "f0_floor",          "f0_ceiling",         "pause_threshold",    "voicing_threshold",
          "stepwise_enter_p",   "stepwise_remove_p", "max_absent_fraction", "stability_fraction", "stability_ratio",
          "alpha_levels",       "seed",              "workers"};
}

void RunConfig::set(std::string_view key_in, std::string_view value) {
  const auto key = csv::trim(key_in);
  if (key == "sample_rate") sample_rate = number(key, value, 1000.0, 192000.0, false, false);
  else if (key == "f0_floor") f0_floor = number(key, value, 0.0, 2000.0, true, false);
  else if (key == "f0_ceiling") f0_ceiling = number(key, value, 0.0, 4000.0, true, false);
  else if (key == "pause_threshold") pause_threshold = number(key, value, 0.0, 10.0, true, false);
  else if (key == "voicing_threshold") voicing_threshold = number(key, value, 0.0, 1.0, true, true);
  else if (key == "stepwise_enter_p") stepwise_enter_p = number(key, value, 0.0, 1.0, true, true);
  else if (key == "stepwise_remove_p") stepwise_remove_p = number(key, value, 0.0, 1.0, true, false);
  else if (key == "max_absent_fraction") max_absent_fraction = number(key, value, 0.0, 1.0, false, true);
  else if (key == "stability_fraction") stability_fraction = number(key, value, 0.0, 1.0, true, false);
  else if (key == "stability_ratio") stability_ratio = number(key, value, 0.0, 1.0, true, false);
  else if (key == "alpha_levels") {
    std::vector<double> levels;
    for (const auto& part : csv::split_line(value)) levels.push_back(number(key, part, 0.0, 1.0, true, true));
    if (levels.empty()) throw Error(ErrorCode::InvalidArgument, "config 'alpha_levels' is empty");
    alpha_levels = std::move(levels);
  } else if (key == "seed") seed = unsigned_int(key, value);
  else if (key == "workers") {
    const auto w = unsigned_int(key, value);
    if (w > 256) throw Error(ErrorCode::InvalidArgument, "config 'workers' must be at most 256");
    workers = static_cast<unsigned>(w);
  } else
    throw Error(ErrorCode::InvalidArgument, "unknown config key '" + key + "'");
}

void RunConfig::apply_override(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos)
    throw Error(ErrorCode::InvalidArgument, "override '" + std::string(assignment) + "' is not key=value");
  set(assignment.substr(0, eq), assignment.substr(eq + 1));
}

void RunConfig::validate() const {
  if (!(f0_floor < f0_ceiling))
    throw Error(ErrorCode::InvalidArgument, "config: f0_floor must be below f0_ceiling");
  if (!(f0_ceiling < sample_rate / 2.0))
    throw Error(ErrorCode::InvalidArgument, "config: f0_ceiling must be below half the sample rate");
  if (!(stepwise_enter_p <= stepwise_remove_p))
    throw Error(ErrorCode::InvalidArgument, "config: stepwise_enter_p must not exceed stepwise_remove_p");
}

std::string RunConfig::to_text() const {
  std::ostringstream o;
  o << "sample_rate = " << csv::format_double(sample_rate) << '\n'
    << "f0_floor = " << csv::format_double(f0_floor) << '\n'
    << "f0_ceiling = " << csv::format_double(f0_ceiling) << '\n'
    << "pause_threshold = " << csv::format_double(pause_threshold) << '\n'
    << "voicing_threshold = " << csv::format_double(voicing_threshold) << '\n'
    << "stepwise_enter_p = " << csv::format_double(stepwise_enter_p) << '\n'
    << "stepwise_remove_p = " << csv::format_double(stepwise_remove_p) << '\n'
    << "max_absent_fraction = " << csv::format_double(max_absent_fraction) << '\n'
    << "stability_fraction = " << csv::format_double(stability_fraction) << '\n'
    << "stability_ratio = " << csv::format_double(stability_ratio) << '\n'
    << "alpha_levels = ";
  for (std::size_t i = 0; i < alpha_levels.size(); ++i) o << (i ? "," : "") << csv::format_double(alpha_levels[i]);
  o << '\n' << "seed = " << seed << '\n' << "workers = " << workers << '\n';
  return o.str();
}

AnalysisParams RunConfig::analysis() const {
  AnalysisParams p;
  p.segmentation.f0_floor = f0_floor;
  p.segmentation.f0_ceiling = f0_ceiling;
  p.segmentation.voicing_threshold = voicing_threshold;
  p.segmentation.min_pause = pause_threshold;
  p.pitch.floor = f0_floor;
  p.pitch.ceiling = f0_ceiling;
  p.pitch.voicing_threshold = voicing_threshold;
  return p;
}

StepwiseConfig RunConfig::stepwise() const { return {stepwise_enter_p, stepwise_remove_p, max_absent_fraction}; }

StabilityThresholds RunConfig::stability() const { return {stability_fraction, stability_ratio}; }

RunConfig parse_config(std::string_view text) {
  RunConfig cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto t = csv::trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::InvalidArgument, "config line " + std::to_string(no) + ": expected key = value");
    cfg.set(t.substr(0, eq), t.substr(eq + 1));
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace voxcue
