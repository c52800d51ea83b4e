#include "voxcue/audio.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>
#include <numeric>

#include "voxcue/error.hpp"

namespace voxcue {

AudioClip::AudioClip(std::vector<double> samples, double sample_rate, std::string source_id,
                     double original_rate)
    : samples_(std::move(samples)),
      sample_rate_(sample_rate),
      original_rate_(original_rate > 0.0 ? original_rate : sample_rate),
      source_id_(std::move(source_id)) {
  if (!(sample_rate_ > 0.0) || !std::isfinite(sample_rate_))
    throw Error(ErrorCode::InvalidArgument, "sample rate must be positive");
  for (double v : samples_) {
    if (!(v >= -1.0 && v <= 1.0))
      throw Error(ErrorCode::InvalidArgument, "sample outside [-1, 1] in clip '" + source_id_ + "'");
  }
}

namespace {

constexpr std::uint16_t kFormatPcm = 0x0001;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint32_t read_u32(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) |
         (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

std::uint16_t read_u16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

bool tag_is(std::span<const std::uint8_t> b, std::size_t at, const char* tag) {
  return std::equal(tag, tag + 4, b.begin() + static_cast<std::ptrdiff_t>(at),
                    [](char c, std::uint8_t u) { return static_cast<std::uint8_t>(c) == u; });
}

double decode_sample(const std::uint8_t* p, int bits) {
  switch (bits) {
    case 8: return (static_cast<double>(p[0]) - 128.0) / 128.0;
    case 16: {
      const auto v = static_cast<std::int16_t>(p[0] | (p[1] << 8));
      return static_cast<double>(v) / 32768.0;
    }
    case 24: {
      std::int32_t v = p[0] | (p[1] << 8) | (p[2] << 16);
      if (v & 0x800000) v -= 0x1000000;
      return static_cast<double>(v) / 8388608.0;
    }
    case 32: {
      const auto v = static_cast<std::int32_t>(static_cast<std::uint32_t>(p[0]) |
                                               (static_cast<std::uint32_t>(p[1]) << 8) |
                                               (static_cast<std::uint32_t>(p[2]) << 16) |
                                               (static_cast<std::uint32_t>(p[3]) << 24));
      return static_cast<double>(v) / 2147483648.0;
    }
  }
  return 0.0;
}

}  // namespace

AudioClip decode_wav(std::span<const std::uint8_t> bytes, std::string source_id) {
  const std::string who = source_id.empty() ? std::string("<memory>") : source_id;
  if (bytes.size() < 12 || !tag_is(bytes, 0, "RIFF") || !tag_is(bytes, 8, "WAVE"))
    throw Error(ErrorCode::Format, who + ": not a RIFF/WAVE file");

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  std::span<const std::uint8_t> data;
  bool have_data = false;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint32_t chunk_size = read_u32(bytes, pos + 4);
    const std::size_t body = pos + 8;
    const std::size_t avail = bytes.size() - body;
    const std::size_t len = std::min<std::size_t>(chunk_size, avail);
    if (tag_is(bytes, pos, "fmt ")) {
      if (len < 16) throw Error(ErrorCode::Format, who + ": truncated fmt chunk");
      format = read_u16(bytes, body);
      channels = read_u16(bytes, body + 2);
      rate = read_u32(bytes, body + 4);
      bits = read_u16(bytes, body + 14);
      if (format == kFormatExtensible) {
        if (len < 40) throw Error(ErrorCode::Format, who + ": truncated extensible fmt chunk");
        format = read_u16(bytes, body + 24);  // first two bytes of the subformat GUID
      }
      have_fmt = true;
    } else if (tag_is(bytes, pos, "data")) {
      data = bytes.subspan(body, len);
      have_data = true;
    }
    pos = body + chunk_size + (chunk_size & 1u);
  }

  if (!have_fmt) throw Error(ErrorCode::Format, who + ": missing fmt chunk");
  if (format != kFormatPcm)
    throw Error(ErrorCode::UnsupportedEncoding,
                who + ": WAV format tag " + std::to_string(format) + " is not linear PCM");
  if (bits != 8 && bits != 16 && bits != 24 && bits != 32)
    throw Error(ErrorCode::UnsupportedEncoding, who + ": unsupported bit depth " + std::to_string(bits));
  if (channels == 0 || rate == 0) throw Error(ErrorCode::Format, who + ": invalid channel count or rate");
  if (!have_data) throw Error(ErrorCode::Format, who + ": missing data chunk");

  const std::size_t frame_bytes = static_cast<std::size_t>(channels) * (bits / 8);
  const std::size_t frames = data.size() / frame_bytes;
  if (frames == 0) throw Error(ErrorCode::EmptyAudio, who + ": zero-length audio");

  std::vector<double> mono(frames);
  for (std::size_t f = 0; f < frames; ++f) {
    double acc = 0.0;
    for (std::size_t c = 0; c < channels; ++c)
      acc += decode_sample(data.data() + f * frame_bytes + c * (bits / 8), bits);
    mono[f] = acc / static_cast<double>(channels);
  }
  return AudioClip(std::move(mono), static_cast<double>(rate), std::move(source_id),
                   static_cast<double>(rate));
}

AudioClip load_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorCode::Io, "cannot read '" + path.string() + "'");
  return decode_wav(bytes, path.string());
}

std::vector<std::uint8_t> encode_wav16(const AudioClip& clip) {
  const auto n = static_cast<std::uint32_t>(clip.size());
  const std::uint32_t rate = static_cast<std::uint32_t>(std::lround(clip.sample_rate()));
  std::vector<std::uint8_t> out;
  out.reserve(44 + 2 * static_cast<std::size_t>(n));
  auto put_tag = [&](const char* t) { out.insert(out.end(), t, t + 4); };
  auto put_u32 = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  };
  auto put_u16 = [&](std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
  };
  put_tag("RIFF");
  put_u32(36 + 2 * n);
  put_tag("WAVE");
  put_tag("fmt ");
  put_u32(16);
  put_u16(kFormatPcm);
  put_u16(1);
  put_u32(rate);
  put_u32(rate * 2);
  put_u16(2);
  put_u16(16);
  put_tag("data");
  put_u32(2 * n);
  for (double v : clip.samples()) {
    const long q = std::clamp(std::lround(v * 32768.0), -32768L, 32767L);
    put_u16(static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
  }
  return out;
}

void write_wav16(const AudioClip& clip, const std::filesystem::path& path) {
  const auto bytes = encode_wav16(clip);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::Io, "short write to '" + path.string() + "'");
}

namespace {

constexpr double kKaiserBeta = 8.0;
constexpr double kZeroCrossings = 16.0;
constexpr double kCutoffFraction = 0.45;
constexpr std::size_t kMaxPhases = 4096;

// Zeroth-order modified Bessel function, power series.
double bessel_i0(double x) {
  double sum = 1.0, term = 1.0;
  const double q = x * x / 4.0;
  for (int k = 1; k < 60; ++k) {
    term *= q / (static_cast<double>(k) * static_cast<double>(k));
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return sum;
}

class SincKernel {
public:
  SincKernel(double in_rate, double out_rate) {
    const double cutoff = kCutoffFraction * std::min(in_rate, out_rate);
    norm_cutoff_ = 2.0 * cutoff / in_rate;  // cycles per input sample x2
    half_width_ = kZeroCrossings / norm_cutoff_;
    i0_beta_ = bessel_i0(kKaiserBeta);
  }

  // Kernel value at an offset measured in input samples.
  double operator()(double t) const {
    const double u = t / half_width_;
    if (std::abs(u) >= 1.0) return 0.0;
    const double arg = norm_cutoff_ * t;
    const double sinc = std::abs(arg) < 1e-12 ? 1.0 : std::sin(std::numbers::pi * arg) / (std::numbers::pi * arg);
    const double win = bessel_i0(kKaiserBeta * std::sqrt(1.0 - u * u)) / i0_beta_;
    return norm_cutoff_ * sinc * win;
  }

  double half_width() const { return half_width_; }

private:
  double norm_cutoff_ = 1.0;
  double half_width_ = 1.0;
  double i0_beta_ = 1.0;
};

// Taps for one fractional input position, normalized to unit DC gain.
struct PhaseTaps {
  long first = 0;  // offset of taps[0] relative to floor(position)
  std::vector<double> taps;
};

PhaseTaps make_taps(const SincKernel& kernel, double frac) {
  const long reach = static_cast<long>(std::ceil(kernel.half_width()));
  PhaseTaps p;
  p.first = -reach + 1;
  p.taps.reserve(static_cast<std::size_t>(2 * reach));
  double sum = 0.0;
  for (long k = p.first; k <= reach; ++k) {
    const double h = kernel(static_cast<double>(k) - frac);
    p.taps.push_back(h);
    sum += h;
  }
  if (sum != 0.0)
    for (double& h : p.taps) h /= sum;
  return p;
}

bool integral(double v) { return v == std::floor(v) && v < 1e12; }

}  // namespace

AudioClip resample(const AudioClip& clip, double target_rate) {
  if (!(target_rate > 0.0) || !std::isfinite(target_rate))
    throw Error(ErrorCode::InvalidArgument, "target rate must be positive");
  const double in_rate = clip.sample_rate();
  if (target_rate == in_rate) return clip;

  const auto x = clip.samples();
  const auto n_in = static_cast<long>(x.size());
  const auto n_out = static_cast<std::size_t>(std::llround(static_cast<double>(x.size()) * target_rate / in_rate));
  SincKernel kernel(in_rate, target_rate);

  // Rational rates use a precomputed polyphase table: output m sits at input
  // position m * M / L, phase (m * M) mod L.
  std::uint64_t up = 0, down = 0;
  if (integral(in_rate) && integral(target_rate)) {
    const auto a = static_cast<std::uint64_t>(target_rate);
    const auto b = static_cast<std::uint64_t>(in_rate);
    const std::uint64_t g = std::gcd(a, b);
    up = a / g;
    down = b / g;
  }
  std::vector<PhaseTaps> table;
  if (up > 0 && up <= kMaxPhases) {
    table.reserve(up);
    for (std::uint64_t p = 0; p < up; ++p)
      table.push_back(make_taps(kernel, static_cast<double>(p) / static_cast<double>(up)));
  }

  std::vector<double> y(n_out, 0.0);
  for (std::size_t m = 0; m < n_out; ++m) {
    long base;
    PhaseTaps local;
    const PhaseTaps* taps;
    if (!table.empty()) {
      const std::uint64_t pos = m * down;
      base = static_cast<long>(pos / up);
      taps = &table[pos % up];
    } else {
      const double pos = static_cast<double>(m) * in_rate / target_rate;
      base = static_cast<long>(std::floor(pos));
      local = make_taps(kernel, pos - static_cast<double>(base));
      taps = &local;
    }
    double acc = 0.0;
    for (std::size_t k = 0; k < taps->taps.size(); ++k) {
      const long idx = base + taps->first + static_cast<long>(k);
      if (idx >= 0 && idx < n_in) acc += taps->taps[k] * x[static_cast<std::size_t>(idx)];
    }
    y[m] = std::clamp(acc, -1.0, 1.0);
  }
  return AudioClip(std::move(y), target_rate, clip.source_id(), clip.original_rate());
}

AudioClip load_canonical(const std::filesystem::path& path, double rate) {
  return resample(load_wav(path), rate);
}

}  // namespace voxcue
