#include "mixforge/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>
#include <numeric>

#include "mixforge/errors.hpp"

namespace mixforge {

namespace {

constexpr double kQuantScale = 32768.0;

uint32_t read_u32(const unsigned char* p) {
  return static_cast<uint32_t>(p[0]) | static_cast<uint32_t>(p[1]) << 8 |
         static_cast<uint32_t>(p[2]) << 16 | static_cast<uint32_t>(p[3]) << 24;
}

uint16_t read_u16(const unsigned char* p) {
  return static_cast<uint16_t>(p[0] | p[1] << 8);
}

struct WavHeader {
  uint16_t format = 0;
  uint16_t channels = 0;
  uint32_t sample_rate = 0;
  uint16_t bits = 0;
  uint32_t data_size = 0;
  std::streamoff data_offset = 0;
};

// Walks the RIFF chunk list up to the data chunk. fmt must precede data.
WavHeader parse_header(std::ifstream& f, const std::filesystem::path& path) {
  unsigned char riff[12];
  if (!f.read(reinterpret_cast<char*>(riff), 12))
    throw FormatError("wav: truncated RIFF header: " + path.string());
  if (std::memcmp(riff, "RIFF", 4) != 0 || std::memcmp(riff + 8, "WAVE", 4) != 0)
    throw FormatError("wav: not a RIFF/WAVE file: " + path.string());

  WavHeader hdr;
  bool have_fmt = false;
  while (true) {
    unsigned char chunk[8];
    if (!f.read(reinterpret_cast<char*>(chunk), 8))
      throw FormatError("wav: no data chunk: " + path.string());
    const uint32_t size = read_u32(chunk + 4);
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16) throw FormatError("wav: short fmt chunk: " + path.string());
      unsigned char fmt[16];
      if (!f.read(reinterpret_cast<char*>(fmt), 16))
        throw FormatError("wav: truncated fmt chunk: " + path.string());
      hdr.format = read_u16(fmt);
      hdr.channels = read_u16(fmt + 2);
      hdr.sample_rate = read_u32(fmt + 4);
      hdr.bits = read_u16(fmt + 14);
      f.seekg(size - 16 + (size & 1), std::ios::cur);
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (!have_fmt) throw FormatError("wav: data chunk before fmt: " + path.string());
      hdr.data_size = size;
      hdr.data_offset = f.tellg();
      break;
    } else {
      f.seekg(size + (size & 1), std::ios::cur);
      if (!f) throw FormatError("wav: truncated chunk list: " + path.string());
    }
  }

  if (hdr.format != 1)
    throw UnsupportedError("wav: only PCM (format tag 1) is supported: " + path.string());
  if (hdr.channels != 1)
    throw UnsupportedError("wav: only mono is supported: " + path.string());
  if (hdr.bits != 16)
    throw UnsupportedError("wav: only 16-bit samples are supported: " + path.string());
  if (hdr.sample_rate == 0)
    throw FormatError("wav: zero sample rate: " + path.string());
  if (hdr.data_size % 2 != 0)
    throw FormatError("wav: odd data chunk size: " + path.string());

  // The declared data length must actually be present in the file.
  f.seekg(0, std::ios::end);
  const std::streamoff file_end = f.tellg();
  if (hdr.data_offset + static_cast<std::streamoff>(hdr.data_size) > file_end)
    throw FormatError("wav: data chunk length exceeds file size: " + path.string());
  return hdr;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("wav: cannot open file: " + path.string());
  return f;
}

}  // namespace

AudioClip read_wav(const std::filesystem::path& path) {
  std::ifstream f = open_input(path);
  const WavHeader hdr = parse_header(f, path);

  AudioClip clip;
  clip.sample_rate = static_cast<int>(hdr.sample_rate);
  const size_t frames = hdr.data_size / 2;
  clip.samples.resize(frames);
  f.seekg(hdr.data_offset);
  std::vector<unsigned char> raw(hdr.data_size);
  if (!f.read(reinterpret_cast<char*>(raw.data()), hdr.data_size))
    throw FormatError("wav: truncated data chunk: " + path.string());
  for (size_t i = 0; i < frames; ++i) {
    const int16_t s = static_cast<int16_t>(raw[2 * i] | raw[2 * i + 1] << 8);
    clip.samples[i] = s / kQuantScale;
  }
  return clip;
}

WavInfo read_wav_info(const std::filesystem::path& path) {
  std::ifstream f = open_input(path);
  const WavHeader hdr = parse_header(f, path);
  return WavInfo{static_cast<int>(hdr.sample_rate), static_cast<long long>(hdr.data_size / 2)};
}

void write_wav(const AudioClip& clip, const std::filesystem::path& path) {
  if (clip.empty()) throw InvalidArgument("write_wav: empty clip");
  if (clip.sample_rate <= 0) throw InvalidArgument("write_wav: non-positive sample rate");
  for (double v : clip.samples)
    if (!std::isfinite(v)) throw InvalidArgument("write_wav: non-finite sample");

  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("wav: cannot open for writing: " + path.string());

  const uint32_t data_size = static_cast<uint32_t>(clip.samples.size() * 2);
  const uint32_t riff_size = 36 + data_size;
  const uint32_t rate = static_cast<uint32_t>(clip.sample_rate);
  const uint32_t byte_rate = rate * 2;

  unsigned char hdr[44];
  std::memcpy(hdr, "RIFF", 4);
  hdr[4] = riff_size & 0xff; hdr[5] = riff_size >> 8 & 0xff;
  hdr[6] = riff_size >> 16 & 0xff; hdr[7] = riff_size >> 24 & 0xff;
  std::memcpy(hdr + 8, "WAVEfmt ", 8);
  const unsigned char fmt_tail[] = {16, 0, 0, 0, 1, 0, 1, 0};
  std::memcpy(hdr + 16, fmt_tail, 8);
  hdr[24] = rate & 0xff; hdr[25] = rate >> 8 & 0xff;
  hdr[26] = rate >> 16 & 0xff; hdr[27] = rate >> 24 & 0xff;
  hdr[28] = byte_rate & 0xff; hdr[29] = byte_rate >> 8 & 0xff;
  hdr[30] = byte_rate >> 16 & 0xff; hdr[31] = byte_rate >> 24 & 0xff;
  hdr[32] = 2; hdr[33] = 0; hdr[34] = 16; hdr[35] = 0;
  std::memcpy(hdr + 36, "data", 4);
  hdr[40] = data_size & 0xff; hdr[41] = data_size >> 8 & 0xff;
  hdr[42] = data_size >> 16 & 0xff; hdr[43] = data_size >> 24 & 0xff;
  f.write(reinterpret_cast<const char*>(hdr), 44);

  std::vector<unsigned char> raw(data_size);
  for (size_t i = 0; i < clip.samples.size(); ++i) {
    const double v = std::clamp(clip.samples[i], -1.0, 1.0);
    const long code = std::clamp(std::lround(v * kQuantScale), -32768l, 32767l);
    const uint16_t u = static_cast<uint16_t>(static_cast<int16_t>(code));
    raw[2 * i] = u & 0xff;
    raw[2 * i + 1] = u >> 8 & 0xff;
  }
  f.write(reinterpret_cast<const char*>(raw.data()), data_size);
  if (!f) throw IoError("wav: write failed: " + path.string());
}

namespace {

double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

double blackman(double v) {  // v in [-1, 1], zero at the edges
  return 0.42 + 0.5 * std::cos(std::numbers::pi * v) + 0.08 * std::cos(2.0 * std::numbers::pi * v);
}

}  // namespace

AudioClip resample(const AudioClip& clip, int target_rate) {
  if (target_rate <= 0) throw InvalidArgument("resample: target rate must be positive");
  if (clip.sample_rate <= 0) throw InvalidArgument("resample: clip has no sample rate");
  if (target_rate == clip.sample_rate) return clip;

  const long long src = clip.sample_rate;
  const long long dst = target_rate;
  const long long g = std::gcd(src, dst);
  const long long up = dst / g;
  const long long down = src / g;
  const long long in_len = clip.size();
  const long long out_len = (in_len * dst + src / 2) / src;

  constexpr int kTaps = 64;
  constexpr int kHalf = kTaps / 2;
  const double cutoff = std::min(1.0, static_cast<double>(dst) / static_cast<double>(src));

  // One DC-normalized kernel per fractional phase p/up.
  std::vector<double> kern(static_cast<size_t>(up) * kTaps);
  for (long long p = 0; p < up; ++p) {
    const double frac = static_cast<double>(p) / static_cast<double>(up);
    double sum = 0.0;
    for (int j = 0; j < kTaps; ++j) {
      const double u = (j - (kHalf - 1)) - frac;
      const double v = cutoff * sinc(cutoff * u) * blackman(u / kHalf);
      kern[static_cast<size_t>(p) * kTaps + j] = v;
      sum += v;
    }
    for (int j = 0; j < kTaps; ++j) kern[static_cast<size_t>(p) * kTaps + j] /= sum;
  }

  AudioClip out;
  out.sample_rate = target_rate;
  out.samples.resize(static_cast<size_t>(out_len));
#pragma omp parallel for schedule(static)
  for (long long n = 0; n < out_len; ++n) {
    const long long pos = n * down;
    const long long base = pos / up;
    const double* k = &kern[static_cast<size_t>(pos % up) * kTaps];
    double acc = 0.0;
    for (int j = 0; j < kTaps; ++j) {
      const long long idx = base - (kHalf - 1) + j;
      if (idx >= 0 && idx < in_len) acc += clip.samples[static_cast<size_t>(idx)] * k[j];
    }
    out.samples[static_cast<size_t>(n)] = acc;
  }
  return out;
}

}  // namespace mixforge
