// sepfront/wav.hpp

// Copyright 2026  The Sepfront Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// PCM WAV I/O restricted to the toolkit's fixed front-end format:
// 16-bit signed little-endian, mono, 16 kHz. Amplitudes map to [-1, 1]
// by division by 32768; other rates/layouts are rejected, not converted.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sepfront/types.hpp"

namespace sepfront {

namespace detail {

inline std::uint32_t read_u32le(const unsigned char *p) {
  return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 |
         std::uint32_t(p[2]) << 16 | std::uint32_t(p[3]) << 24;
}

inline std::uint16_t read_u16le(const unsigned char *p) {
  return std::uint16_t(p[0] | p[1] << 8);
}

inline void put_u32le(std::string &out, std::uint32_t v) {
  out.push_back(char(v & 0xff));
  out.push_back(char((v >> 8) & 0xff));
  out.push_back(char((v >> 16) & 0xff));
  out.push_back(char((v >> 24) & 0xff));
}

inline void put_u16le(std::string &out, std::uint16_t v) {
  out.push_back(char(v & 0xff));
  out.push_back(char((v >> 8) & 0xff));
}

}  // namespace detail

/// Reads a mono 16-bit 16 kHz PCM WAV file. Throws on any other layout.
inline Waveform read_wav(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open WAV file: " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw std::runtime_error("not a RIFF/WAVE file: " + path);
  }

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char *data = nullptr;
  std::uint32_t data_len = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char *chunk = bytes.data() + pos;
    std::uint32_t chunk_len = detail::read_u32le(chunk + 4);
    std::size_t body = pos + 8;
    if (body + chunk_len > bytes.size()) {
      throw std::runtime_error("truncated WAV chunk in " + path);
    }
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (chunk_len < 16) throw std::runtime_error("malformed fmt chunk in " + path);
      format = detail::read_u16le(chunk + 8);
      channels = detail::read_u16le(chunk + 10);
      rate = detail::read_u32le(chunk + 12);
      bits = detail::read_u16le(chunk + 22);
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = chunk + 8;
      data_len = chunk_len;
    }
    pos = body + chunk_len + (chunk_len & 1);  // chunks are word-aligned
  }

  if (!have_fmt || data == nullptr) {
    throw std::runtime_error("missing fmt/data chunk in " + path);
  }
  if (format != 1 || bits != 16) {
    throw std::runtime_error("unsupported WAV encoding in " + path +
                             " (need 16-bit PCM)");
  }
  if (channels != 1) {
    throw std::runtime_error("unsupported channel count in " + path +
                             " (need mono)");
  }
  if (rate != 16000) {
    throw std::runtime_error("unsupported sample rate " + std::to_string(rate) +
                             " in " + path + " (need 16000, no resampling)");
  }

  Waveform w;
  w.sample_rate = static_cast<int>(rate);
  std::size_t n = data_len / 2;
  w.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::int16_t s = static_cast<std::int16_t>(
        detail::read_u16le(data + 2 * i));
    w.samples[i] = static_cast<double>(s) / 32768.0;
  }
  return w;
}

/// Writes a mono 16-bit PCM WAV file. Amplitudes are clipped to [-1, 1] here
/// and nowhere else in the pipeline.
inline void write_wav(const std::string &path, const Waveform &w) {
  if (w.sample_rate != 16000) {
    throw std::runtime_error("unsupported sample rate for WAV write: " +
                             std::to_string(w.sample_rate));
  }
  const std::uint32_t n = static_cast<std::uint32_t>(w.samples.size());
  const std::uint32_t data_len = n * 2;

  std::string out;
  out.reserve(44 + data_len);
  out.append("RIFF");
  detail::put_u32le(out, 36 + data_len);
  out.append("WAVE");
  out.append("fmt ");
  detail::put_u32le(out, 16);
  detail::put_u16le(out, 1);   // PCM
  detail::put_u16le(out, 1);   // mono
  detail::put_u32le(out, 16000);
  detail::put_u32le(out, 16000 * 2);  // byte rate
  detail::put_u16le(out, 2);   // block align
  detail::put_u16le(out, 16);  // bits per sample
  out.append("data");
  detail::put_u32le(out, data_len);
  for (std::uint32_t i = 0; i < n; ++i) {
    double x = std::clamp(w.samples[i], -1.0, 1.0);
    long v = std::lround(x * 32768.0);
    v = std::clamp(v, -32768L, 32767L);
    detail::put_u16le(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(v)));
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write WAV file: " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw std::runtime_error("failed writing WAV file: " + path);
}

}  // namespace sepfront
