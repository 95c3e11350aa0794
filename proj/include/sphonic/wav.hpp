#pragma once

#include <string>
#include <vector>

namespace sphonic {

struct WavData {
  std::vector<std::vector<double>> channels;
  int fs = 0;
};

// RIFF/WAVE, PCM16 or IEEE float32. Throws IoError on malformed files or
// unsupported formats.
WavData read_wav(const std::string& path);

// Writes IEEE float32 (format 3). Samples are stored as-is, no clipping.
void write_wav(const std::string& path, const std::vector<std::vector<double>>& channels, int fs);

void write_wav_mono(const std::string& path, const std::vector<double>& samples, int fs);

}  // namespace sphonic
