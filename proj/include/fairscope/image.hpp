#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace fairscope::image {

// Interleaved 8-bit RGB, row-major.
struct Image {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> rgb;

  Image() = default;
  Image(int h, int w, std::uint8_t fill = 0)
      : height(h), width(w), rgb(static_cast<std::size_t>(h) * w * 3, fill) {}

  std::uint8_t& at(int row, int col, int channel) {
    return rgb[(static_cast<std::size_t>(row) * width + col) * 3 + channel];
  }
  std::uint8_t at(int row, int col, int channel) const {
    return rgb[(static_cast<std::size_t>(row) * width + col) * 3 + channel];
  }

  bool operator==(const Image&) const = default;
};

struct Clip {
  std::vector<Image> frames;
  double fps = 100.0;

  // Throws kParse unless there is at least one frame and all frames share
  // their dimensions.
  void Validate() const;
  bool operator==(const Clip& o) const { return frames == o.frames; }
};

Image ReadPng(const std::filesystem::path& path);
// Written to a temporary sibling and renamed into place.
void WritePng(const std::filesystem::path& path, const Image& image);

// A clip is a directory of `%06d.png` frames; frames are ordered by name.
Clip ReadClip(const std::filesystem::path& dir);
void WriteClip(const std::filesystem::path& dir, const Clip& clip);

}  // namespace fairscope::image
