#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "specpercept/common.hpp"
#include "specpercept/mel.hpp"

namespace specpercept {

// SGRAM binary format, little-endian, 29-byte header:
//   magic "SGRM" | version u8 = 1 | height u32 | width u32 |
//   log_lo f32 | log_hi f32 | sample_rate u32 | hop u32
// followed by height*width f32 values row-major, row 0 = lowest mel band.

namespace detail {

inline void put_u32le(std::ostream& f, uint32_t v) {
  uint8_t b[4] = {static_cast<uint8_t>(v), static_cast<uint8_t>(v >> 8),
                  static_cast<uint8_t>(v >> 16), static_cast<uint8_t>(v >> 24)};
  f.write(reinterpret_cast<const char*>(b), 4);
}

inline void put_f32le(std::ostream& f, float v) {
  uint32_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  put_u32le(f, bits);
}

inline uint32_t take_u32le(const uint8_t* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

inline float take_f32le(const uint8_t* p) {
  const uint32_t bits = take_u32le(p);
  float v;
  std::memcpy(&v, &bits, sizeof(v));
  return v;
}

}  // namespace detail

inline void save_sgram(const Spectrogram& spec, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot create SGRAM file: " + path);
  f.write("SGRM", 4);
  const uint8_t version = 1;
  f.write(reinterpret_cast<const char*>(&version), 1);
  detail::put_u32le(f, static_cast<uint32_t>(spec.values.rows));
  detail::put_u32le(f, static_cast<uint32_t>(spec.values.cols));
  detail::put_f32le(f, static_cast<float>(spec.log_lo));
  detail::put_f32le(f, static_cast<float>(spec.log_hi));
  detail::put_u32le(f, static_cast<uint32_t>(spec.params.sample_rate));
  detail::put_u32le(f, static_cast<uint32_t>(spec.params.hop));
  for (double v : spec.values.data) detail::put_f32le(f, static_cast<float>(v));
  if (!f) throw IoError("write failure on SGRAM file: " + path);
}

// Fields not stored in the file (n_fft, eps) come back as MelParams defaults;
// target_frames is set to the stored width.
inline Spectrogram load_sgram(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open SGRAM file: " + path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                             std::istreambuf_iterator<char>());
  if (f.bad()) throw IoError("read failure on SGRAM file: " + path);

  if (bytes.size() < 29) throw FormatError("SGRAM file truncated (short header): " + path);
  if (std::memcmp(bytes.data(), "SGRM", 4) != 0) {
    throw FormatError("bad SGRAM magic in: " + path);
  }
  const uint8_t version = bytes[4];
  if (version != 1) {
    throw FormatError("unsupported SGRAM version " + std::to_string(version) + " in: " + path);
  }
  const uint32_t height = detail::take_u32le(bytes.data() + 5);
  const uint32_t width = detail::take_u32le(bytes.data() + 9);
  const float log_lo = detail::take_f32le(bytes.data() + 13);
  const float log_hi = detail::take_f32le(bytes.data() + 17);
  const uint32_t sample_rate = detail::take_u32le(bytes.data() + 21);
  const uint32_t hop = detail::take_u32le(bytes.data() + 25);

  const size_t expected = 29 + 4ull * height * width;
  if (bytes.size() < expected) throw FormatError("SGRAM file truncated (short payload): " + path);

  Spectrogram spec;
  spec.values = Grid(static_cast<int>(height), static_cast<int>(width));
  for (size_t i = 0; i < static_cast<size_t>(height) * width; ++i) {
    spec.values.data[i] = static_cast<double>(detail::take_f32le(bytes.data() + 29 + 4 * i));
  }
  spec.log_lo = static_cast<double>(log_lo);
  spec.log_hi = static_cast<double>(log_hi);
  spec.params.sample_rate = static_cast<int>(sample_rate);
  spec.params.hop = static_cast<int>(hop);
  spec.params.n_mels = static_cast<int>(height);
  spec.params.target_frames = static_cast<int>(width);
  return spec;
}

}  // namespace specpercept
