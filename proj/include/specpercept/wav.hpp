#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "specpercept/common.hpp"

namespace specpercept {

// Mono waveform, amplitudes nominally in [-1,1].
struct AudioClip {
  std::vector<double> samples;
  int sample_rate = 0;
};

// Per-sample arithmetic mean across channels. Mono input comes back
// unchanged, which makes the operation idempotent.
inline std::vector<double> downmix_mean(const std::vector<std::vector<double>>& channels) {
  if (channels.empty()) return {};
  if (channels.size() == 1) return channels[0];
  const size_t n = channels[0].size();
  std::vector<double> out(n, 0.0);
  const double inv = 1.0 / static_cast<double>(channels.size());
  for (const auto& ch : channels) {
    for (size_t i = 0; i < n; ++i) out[i] += ch[i];
  }
  for (double& v : out) v *= inv;
  return out;
}

namespace detail {

inline uint16_t read_u16le(const uint8_t* p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

inline uint32_t read_u32le(const uint8_t* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

inline int32_t sign_extend_24(uint32_t v) {
  return (v & 0x800000u) ? static_cast<int32_t>(v | 0xFF000000u) : static_cast<int32_t>(v);
}

}  // namespace detail

// Decodes a RIFF/WAVE file (PCM16, PCM24 or float32; mono or stereo) into a
// mono clip. Stereo is downmixed by per-sample mean; integer PCM is scaled by
// the type's max magnitude (2^15 or 2^23).
inline AudioClip load_wav(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open WAV file: " + path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (f.bad()) throw IoError("read failure on WAV file: " + path);

  using detail::read_u16le;
  using detail::read_u32le;

  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw FormatError("not a RIFF/WAVE file: " + path);
  }

  uint16_t format_code = 0;
  uint16_t channels = 0;
  uint32_t sample_rate = 0;
  uint16_t bits = 0;
  bool have_fmt = false;
  const uint8_t* data_ptr = nullptr;
  size_t data_len = 0;

  size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const uint8_t* hdr = bytes.data() + pos;
    const uint32_t chunk_size = read_u32le(hdr + 4);
    const size_t body = pos + 8;
    if (body + chunk_size > bytes.size()) throw FormatError("truncated chunk in WAV: " + path);
    if (std::memcmp(hdr, "fmt ", 4) == 0) {
      if (chunk_size < 16) throw FormatError("fmt chunk too short in WAV: " + path);
      const uint8_t* p = bytes.data() + body;
      format_code = read_u16le(p);
      channels = read_u16le(p + 2);
      sample_rate = read_u32le(p + 4);
      bits = read_u16le(p + 14);
      if (format_code == 0xFFFE) {
        // WAVE_FORMAT_EXTENSIBLE: real code sits in the first two bytes of
        // the SubFormat GUID.
        if (chunk_size < 40) throw FormatError("extensible fmt chunk too short in WAV: " + path);
        format_code = read_u16le(p + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      data_ptr = bytes.data() + body;
      data_len = chunk_size;
    }
    pos = body + chunk_size + (chunk_size & 1);  // chunks are word-aligned
  }

  if (!have_fmt || data_ptr == nullptr) throw FormatError("missing fmt/data chunk in WAV: " + path);
  if (sample_rate == 0) throw FormatError("zero sample rate in WAV: " + path);
  if (channels != 1 && channels != 2) {
    throw UnsupportedError("unsupported channel count " + std::to_string(channels) + " in WAV: " +
                           path);
  }
  const bool pcm = format_code == 1;
  const bool ieee = format_code == 3;
  if (!(pcm && (bits == 16 || bits == 24)) && !(ieee && bits == 32)) {
    throw UnsupportedError("unsupported encoding (format " + std::to_string(format_code) +
                           ", " + std::to_string(bits) + " bit) in WAV: " + path);
  }

  const size_t bytes_per_sample = bits / 8;
  const size_t frame_size = bytes_per_sample * channels;
  const size_t frames = data_len / frame_size;
  if (frames == 0) throw FormatError("empty data chunk in WAV: " + path);

  std::vector<std::vector<double>> chans(channels, std::vector<double>(frames));
  for (size_t i = 0; i < frames; ++i) {
    for (uint16_t c = 0; c < channels; ++c) {
      const uint8_t* p = data_ptr + i * frame_size + c * bytes_per_sample;
      double v = 0.0;
      if (pcm && bits == 16) {
        v = static_cast<int16_t>(read_u16le(p)) / 32768.0;
      } else if (pcm && bits == 24) {
        const uint32_t raw = static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
                             (static_cast<uint32_t>(p[2]) << 16);
        v = detail::sign_extend_24(raw) / 8388608.0;
      } else {  // float32
        uint32_t raw = read_u32le(p);
        float fv;
        std::memcpy(&fv, &raw, sizeof(fv));
        v = static_cast<double>(fv);
      }
      chans[c][i] = v;
    }
  }

  AudioClip clip;
  clip.samples = downmix_mean(chans);
  clip.sample_rate = static_cast<int>(sample_rate);
  return clip;
}

// Writes a mono PCM16 WAV. Samples are clamped to [-1,1] and quantized on the
// reader's 1/32768 grid; full-scale positive saturates at 32767.
inline void save_wav_pcm16(const AudioClip& clip, const std::string& path) {
  if (clip.sample_rate <= 0) throw ParamError("save_wav_pcm16: sample rate must be positive");
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot create WAV file: " + path);

  const uint32_t n = static_cast<uint32_t>(clip.samples.size());
  const uint32_t data_size = n * 2;
  const uint32_t sr = static_cast<uint32_t>(clip.sample_rate);
  const uint32_t byte_rate = sr * 2;

  auto put_u32 = [&](uint32_t v) {
    uint8_t b[4] = {static_cast<uint8_t>(v), static_cast<uint8_t>(v >> 8),
                    static_cast<uint8_t>(v >> 16), static_cast<uint8_t>(v >> 24)};
    f.write(reinterpret_cast<const char*>(b), 4);
  };
  auto put_u16 = [&](uint16_t v) {
    uint8_t b[2] = {static_cast<uint8_t>(v), static_cast<uint8_t>(v >> 8)};
    f.write(reinterpret_cast<const char*>(b), 2);
  };

  f.write("RIFF", 4);
  put_u32(36 + data_size);
  f.write("WAVE", 4);
  f.write("fmt ", 4);
  put_u32(16);
  put_u16(1);  // PCM
  put_u16(1);  // mono
  put_u32(sr);
  put_u32(byte_rate);
  put_u16(2);   // block align
  put_u16(16);  // bits
  f.write("data", 4);
  put_u32(data_size);
  for (uint32_t i = 0; i < n; ++i) {
    const double v = std::clamp(clip.samples[i], -1.0, 1.0);
    const long q = std::lrint(v * 32768.0);
    const int16_t s = static_cast<int16_t>(std::clamp(q, -32768L, 32767L));
    put_u16(static_cast<uint16_t>(s));
  }
  if (!f) throw IoError("write failure on WAV file: " + path);
}

}  // namespace specpercept
