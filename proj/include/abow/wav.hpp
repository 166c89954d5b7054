#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "abow/common.hpp"

namespace abow {

// PCM WAV reader/writer. Reader accepts 8/16/24-bit integer and 32-bit float
// encodings, mono or multichannel, including WAVE_FORMAT_EXTENSIBLE wrappers.
struct WavData {
  int sample_rate = 0;
  int channels = 0;
  std::vector<float> samples;  // interleaved, in [-1, 1]

  std::size_t frames() const {
    return channels > 0 ? samples.size() / static_cast<std::size_t>(channels) : 0;
  }
};

namespace wav_detail {

inline std::uint32_t u32(const std::uint8_t* p) {
  return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) | (std::uint32_t(p[2]) << 16) |
         (std::uint32_t(p[3]) << 24);
}

inline std::uint16_t u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8));
}

}  // namespace wav_detail

inline WavData read_wav(const std::filesystem::path& path) {
  using namespace wav_detail;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open audio file: " + path.string());
  std::vector<std::uint8_t> buf((std::istreambuf_iterator<char>(in)),
                                std::istreambuf_iterator<char>());
  if (buf.size() < 44 || std::memcmp(buf.data(), "RIFF", 4) != 0 ||
      std::memcmp(buf.data() + 8, "WAVE", 4) != 0)
    throw ValidationError("not a RIFF/WAVE file: " + path.string());

  int format_tag = 0, channels = 0, bits = 0, sample_rate = 0;
  std::size_t data_off = 0, data_len = 0;
  bool have_fmt = false;

  std::size_t pos = 12;
  while (pos + 8 <= buf.size()) {
    const char* id = reinterpret_cast<const char*>(buf.data() + pos);
    const std::uint32_t chunk_len = u32(buf.data() + pos + 4);
    const std::size_t body = pos + 8;
    if (std::memcmp(id, "fmt ", 4) == 0 && chunk_len >= 16 && body + chunk_len <= buf.size()) {
      format_tag = u16(buf.data() + body);
      channels = u16(buf.data() + body + 2);
      sample_rate = static_cast<int>(u32(buf.data() + body + 4));
      bits = u16(buf.data() + body + 14);
      if (format_tag == 0xFFFE && chunk_len >= 40) {
        // extensible: the real format tag is the first word of the sub-format GUID
        format_tag = u16(buf.data() + body + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      data_off = body;
      data_len = std::min<std::size_t>(chunk_len, buf.size() - body);
      break;  // first data chunk wins
    }
    pos = body + chunk_len + (chunk_len & 1);
  }

  if (!have_fmt || data_off == 0)
    throw ValidationError("missing fmt/data chunk: " + path.string());
  if (channels < 1 || sample_rate <= 0)
    throw ValidationError("malformed fmt chunk: " + path.string());
  const bool int_pcm = format_tag == 1 && (bits == 8 || bits == 16 || bits == 24);
  const bool float_pcm = format_tag == 3 && bits == 32;
  if (!int_pcm && !float_pcm)
    throw ValidationError("unsupported WAV encoding (format " + std::to_string(format_tag) +
                          ", " + std::to_string(bits) + "-bit): " + path.string());

  const std::size_t bytes_per_sample = static_cast<std::size_t>(bits) / 8;
  const std::size_t n_samples = data_len / bytes_per_sample;
  if (n_samples == 0) throw ValidationError("zero-length audio: " + path.string());

  WavData w;
  w.sample_rate = sample_rate;
  w.channels = channels;
  w.samples.resize(n_samples);
  const std::uint8_t* d = buf.data() + data_off;
  switch (bits) {
    case 8:
      for (std::size_t i = 0; i < n_samples; ++i)
        w.samples[i] = (static_cast<int>(d[i]) - 128) / 128.0f;
      break;
    case 16:
      for (std::size_t i = 0; i < n_samples; ++i) {
        const auto v = static_cast<std::int16_t>(u16(d + 2 * i));
        w.samples[i] = static_cast<float>(v) / 32768.0f;
      }
      break;
    case 24:
      for (std::size_t i = 0; i < n_samples; ++i) {
        std::int32_t v = std::int32_t(d[3 * i]) | (std::int32_t(d[3 * i + 1]) << 8) |
                         (std::int32_t(d[3 * i + 2]) << 16);
        if (v & 0x800000) v |= ~0xFFFFFF;  // sign-extend
        w.samples[i] = static_cast<float>(v) / 8388608.0f;
      }
      break;
    case 32:
      for (std::size_t i = 0; i < n_samples; ++i) {
        std::uint32_t raw = u32(d + 4 * i);
        float f;
        std::memcpy(&f, &raw, 4);
        w.samples[i] = f;
      }
      break;
    default:
      throw ValidationError("unreachable bit depth");
  }
  return w;
}

/// Writes a mono 16-bit PCM WAV.
inline void write_wav_pcm16(const std::filesystem::path& path, const std::vector<float>& mono,
                            int sample_rate) {
  require(!mono.empty(), "refusing to write zero-length audio: " + path.string());
  std::vector<std::uint8_t> out;
  out.reserve(44 + mono.size() * 2);
  auto push_u32 = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  };
  auto push_u16 = [&](std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
  };
  auto push_tag = [&](const char* t) { out.insert(out.end(), t, t + 4); };

  const std::uint32_t data_len = static_cast<std::uint32_t>(mono.size() * 2);
  push_tag("RIFF");
  push_u32(36 + data_len);
  push_tag("WAVE");
  push_tag("fmt ");
  push_u32(16);
  push_u16(1);  // PCM
  push_u16(1);  // mono
  push_u32(static_cast<std::uint32_t>(sample_rate));
  push_u32(static_cast<std::uint32_t>(sample_rate) * 2);
  push_u16(2);
  push_u16(16);
  push_tag("data");
  push_u32(data_len);
  for (float s : mono) {
    const float c = std::min(1.0f, std::max(-1.0f, s));
    const auto v = static_cast<std::int16_t>(std::lrintf(c * 32767.0f));
    push_u16(static_cast<std::uint16_t>(v));
  }

  std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  require(bool(f), "cannot open for writing: " + path.string());
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  require(bool(f), "write failed: " + path.string());
}

}  // namespace abow
