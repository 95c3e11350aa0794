#include "sphonic/wav.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include "sphonic/errors.hpp"

namespace sphonic {

namespace {

// All fields little-endian, which matches every platform we target; static
// asserts below keep that honest.
static_assert(sizeof(float) == 4, "expects 32-bit IEEE float");

uint32_t read_u32(const unsigned char* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

uint16_t read_u16(const unsigned char* p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::string* s, uint32_t v) {
  s->push_back(static_cast<char>(v & 0xff));
  s->push_back(static_cast<char>((v >> 8) & 0xff));
  s->push_back(static_cast<char>((v >> 16) & 0xff));
  s->push_back(static_cast<char>((v >> 24) & 0xff));
}

void put_u16(std::string* s, uint16_t v) {
  s->push_back(static_cast<char>(v & 0xff));
  s->push_back(static_cast<char>((v >> 8) & 0xff));
}

}  // namespace

WavData read_wav(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("wav: cannot open " + path);
  std::string raw((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  const auto* p = reinterpret_cast<const unsigned char*>(raw.data());
  if (raw.size() < 12 || std::memcmp(p, "RIFF", 4) != 0 || std::memcmp(p + 8, "WAVE", 4) != 0)
    throw IoError("wav: not a RIFF/WAVE file: " + path);

  uint16_t format = 0, n_ch = 0, bits = 0;
  uint32_t fs = 0;
  std::size_t data_off = 0, data_len = 0;
  std::size_t off = 12;
  while (off + 8 <= raw.size()) {
    const uint32_t chunk_len = read_u32(p + off + 4);
    if (std::memcmp(p + off, "fmt ", 4) == 0) {
      if (off + 8 + 16 > raw.size()) throw IoError("wav: truncated fmt chunk: " + path);
      format = read_u16(p + off + 8);
      n_ch = read_u16(p + off + 10);
      fs = read_u32(p + off + 12);
      bits = read_u16(p + off + 22);
    } else if (std::memcmp(p + off, "data", 4) == 0) {
      data_off = off + 8;
      data_len = chunk_len;
    }
    off += 8 + chunk_len + (chunk_len & 1);
  }
  if (format == 0 || n_ch == 0) throw IoError("wav: missing fmt chunk: " + path);
  if (data_off == 0) throw IoError("wav: missing data chunk: " + path);
  if (data_off + data_len > raw.size()) throw IoError("wav: truncated data chunk: " + path);

  const std::size_t bytes_per = bits / 8;
  if (bytes_per == 0) throw IoError("wav: bad bit depth: " + path);
  const std::size_t n_frames = data_len / (bytes_per * n_ch);

  WavData out;
  out.fs = static_cast<int>(fs);
  out.channels.assign(n_ch, std::vector<double>(n_frames));
  const unsigned char* d = p + data_off;
  if (format == 1 && bits == 16) {
    for (std::size_t i = 0; i < n_frames; ++i) {
      for (uint16_t c = 0; c < n_ch; ++c) {
        const uint16_t u = read_u16(d + (i * n_ch + c) * 2);
        out.channels[c][i] = static_cast<int16_t>(u) / 32768.0;
      }
    }
  } else if (format == 3 && bits == 32) {
    for (std::size_t i = 0; i < n_frames; ++i) {
      for (uint16_t c = 0; c < n_ch; ++c) {
        const uint32_t u = read_u32(d + (i * n_ch + c) * 4);
        float v;
        std::memcpy(&v, &u, 4);
        out.channels[c][i] = v;
      }
    }
  } else {
    throw IoError("wav: unsupported format (want PCM16 or float32): " + path);
  }
  return out;
}

void write_wav(const std::string& path, const std::vector<std::vector<double>>& channels, int fs) {
  if (channels.empty()) throw IoError("wav: no channels to write");
  const std::size_t n_frames = channels.front().size();
  for (const auto& ch : channels) {
    if (ch.size() != n_frames) throw ShapeError("wav: channel lengths differ");
  }
  const uint16_t n_ch = static_cast<uint16_t>(channels.size());
  const uint32_t data_len = static_cast<uint32_t>(n_frames * n_ch * 4);

  std::string out;
  out.reserve(58 + data_len);
  out += "RIFF";
  put_u32(&out, 50 + data_len);
  out += "WAVE";
  out += "fmt ";
  put_u32(&out, 18);
  put_u16(&out, 3);  // IEEE float
  put_u16(&out, n_ch);
  put_u32(&out, static_cast<uint32_t>(fs));
  put_u32(&out, static_cast<uint32_t>(fs) * n_ch * 4);
  put_u16(&out, static_cast<uint16_t>(n_ch * 4));
  put_u16(&out, 32);
  put_u16(&out, 0);  // cbSize
  out += "fact";
  put_u32(&out, 4);
  put_u32(&out, static_cast<uint32_t>(n_frames));
  out += "data";
  put_u32(&out, data_len);
  for (std::size_t i = 0; i < n_frames; ++i) {
    for (uint16_t c = 0; c < n_ch; ++c) {
      const float v = static_cast<float>(channels[c][i]);
      uint32_t u;
      std::memcpy(&u, &v, 4);
      put_u32(&out, u);
    }
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("wav: cannot open for writing: " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("wav: write failed: " + path);
}

void write_wav_mono(const std::string& path, const std::vector<double>& samples, int fs) {
  write_wav(path, {samples}, fs);
}

}  // namespace sphonic
