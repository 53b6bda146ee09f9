#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <vector>

#include "specpercept/wav.hpp"
#include "test_util.hpp"

using namespace specpercept;

namespace {

void push_u16(std::vector<unsigned char>& b, uint16_t v) {
  b.push_back(v & 0xff);
  b.push_back((v >> 8) & 0xff);
}

void push_u32(std::vector<unsigned char>& b, uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back((v >> (8 * i)) & 0xff);
}

// Minimal RIFF writer kept independent of the loader under test.
std::vector<unsigned char> wav_bytes(uint16_t fmt_code, uint16_t channels, uint32_t rate,
                                     uint16_t bits, const std::vector<unsigned char>& payload) {
  std::vector<unsigned char> b;
  b.insert(b.end(), {'R', 'I', 'F', 'F'});
  push_u32(b, 36 + static_cast<uint32_t>(payload.size()));
  b.insert(b.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  push_u32(b, 16);
  push_u16(b, fmt_code);
  push_u16(b, channels);
  push_u32(b, rate);
  const uint32_t block = channels * bits / 8;
  push_u32(b, rate * block);
  push_u16(b, static_cast<uint16_t>(block));
  push_u16(b, bits);
  b.insert(b.end(), {'d', 'a', 't', 'a'});
  push_u32(b, static_cast<uint32_t>(payload.size()));
  b.insert(b.end(), payload.begin(), payload.end());
  return b;
}

}  // namespace

TEST_CASE("16-bit PCM mono decodes with exact scaling") {
  std::vector<unsigned char> payload;
  for (int16_t s : {int16_t{0}, int16_t{16384}, int16_t{-16384}, int16_t{32767},
                    int16_t{-32768}}) {
    push_u16(payload, static_cast<uint16_t>(s));
  }
  const auto path = testutil::scratch_file("pcm16.wav");
  testutil::write_bytes(path, wav_bytes(1, 1, 8000, 16, payload));

  const AudioClip clip = load_wav(path);
  REQUIRE(clip.sample_rate == 8000);
  REQUIRE(clip.samples.size() == 5);
  CHECK(clip.samples[0] == 0.0);
  CHECK(clip.samples[1] == 0.5);
  CHECK(clip.samples[2] == -0.5);
  CHECK(clip.samples[3] == 32767.0 / 32768.0);
  CHECK(clip.samples[4] == -1.0);
}

TEST_CASE("24-bit PCM stereo decodes and downmixes to the channel mean") {
  auto push_s24 = [](std::vector<unsigned char>& b, int32_t v) {
    const uint32_t u = static_cast<uint32_t>(v) & 0xffffff;
    b.push_back(u & 0xff);
    b.push_back((u >> 8) & 0xff);
    b.push_back((u >> 16) & 0xff);
  };
  std::vector<unsigned char> payload;
  push_s24(payload, 4194304);   // L frame 0: +0.5
  push_s24(payload, -4194304);  // R frame 0: -0.5
  push_s24(payload, 2097152);   // L frame 1: +0.25
  push_s24(payload, 4194304);   // R frame 1: +0.5
  const auto path = testutil::scratch_file("pcm24.wav");
  testutil::write_bytes(path, wav_bytes(1, 2, 44100, 24, payload));

  const AudioClip clip = load_wav(path);
  REQUIRE(clip.sample_rate == 44100);
  REQUIRE(clip.samples.size() == 2);
  CHECK(clip.samples[0] == 0.0);
  CHECK(clip.samples[1] == 0.375);
}

TEST_CASE("float32 WAV decodes values directly") {
  std::vector<unsigned char> payload;
  for (float v : {0.25f, -1.0f, 0.0f}) {
    uint32_t u;
    std::memcpy(&u, &v, 4);
    push_u32(payload, u);
  }
  const auto path = testutil::scratch_file("f32.wav");
  testutil::write_bytes(path, wav_bytes(3, 1, 16000, 32, payload));

  const AudioClip clip = load_wav(path);
  REQUIRE(clip.samples.size() == 3);
  CHECK(clip.samples[0] == 0.25);
  CHECK(clip.samples[1] == -1.0);
  CHECK(clip.samples[2] == 0.0);
}

TEST_CASE("decode errors are typed by failure kind") {
  CHECK_THROWS_AS(load_wav(testutil::scratch_file("missing.wav")), IoError);

  auto bad_magic = wav_bytes(1, 1, 8000, 16, {0, 0});
  bad_magic[0] = 'X';
  const auto p1 = testutil::scratch_file("badmagic.wav");
  testutil::write_bytes(p1, bad_magic);
  CHECK_THROWS_AS(load_wav(p1), FormatError);

  const auto p2 = testutil::scratch_file("threechan.wav");
  testutil::write_bytes(p2, wav_bytes(1, 3, 8000, 16, std::vector<unsigned char>(6, 0)));
  CHECK_THROWS_AS(load_wav(p2), UnsupportedError);

  const auto p3 = testutil::scratch_file("mulaw.wav");
  testutil::write_bytes(p3, wav_bytes(7, 1, 8000, 8, {0x7f}));
  CHECK_THROWS_AS(load_wav(p3), UnsupportedError);

  auto truncated = wav_bytes(1, 1, 8000, 16, {0, 0, 0, 0});
  truncated.resize(truncated.size() - 2);  // data chunk promises more than present
  const auto p4 = testutil::scratch_file("trunc.wav");
  testutil::write_bytes(p4, truncated);
  CHECK_THROWS_AS(load_wav(p4), FormatError);
}

TEST_CASE("downmix of mono is the identity and repeated downmix is stable") {
  const std::vector<std::vector<double>> mono{{0.1, -0.4, 0.9}};
  CHECK(downmix_mean(mono) == mono[0]);
  const std::vector<std::vector<double>> stereo{{1.0, 0.0}, {0.0, 1.0}};
  const auto once = downmix_mean(stereo);
  CHECK(once == std::vector<double>{0.5, 0.5});
  CHECK(downmix_mean({once}) == once);
}

TEST_CASE("PCM16 save and load round trip within quantization error") {
  AudioClip clip;
  clip.sample_rate = 16000;
  for (int i = 0; i < 200; ++i) clip.samples.push_back(std::sin(0.37 * i) * 0.8);
  clip.samples.push_back(1.5);   // clamps to full scale
  clip.samples.push_back(-1.5);
  const auto path = testutil::scratch_file("roundtrip.wav");
  save_wav_pcm16(clip, path);

  const AudioClip back = load_wav(path);
  REQUIRE(back.samples.size() == clip.samples.size());
  REQUIRE(back.sample_rate == 16000);
  for (size_t i = 0; i < 200; ++i) {
    CHECK(std::fabs(back.samples[i] - clip.samples[i]) <= 1.0 / 32768.0);
  }
  CHECK(back.samples[200] == 32767.0 / 32768.0);
  CHECK(back.samples[201] == -1.0);
}
