#include "fairscope/image.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <string>

#include "fairscope/error.hpp"

namespace fairscope::image {
namespace fs = std::filesystem;

namespace {

bool IsFrameName(const fs::path& p) {
  const std::string name = p.filename().string();
  if (name.size() != 10 || p.extension() != ".png") return false;
  return std::all_of(name.begin(), name.begin() + 6,
                     [](unsigned char c) { return std::isdigit(c) != 0; });
}

}  // namespace

void Clip::Validate() const {
  if (frames.empty()) throw Error(ErrorKind::kParse, "clip has no frames");
  for (const auto& f : frames) {
    if (f.height != frames.front().height || f.width != frames.front().width) {
      throw Error(ErrorKind::kParse, "clip frames differ in size");
    }
    if (f.height <= 0 || f.width <= 0 ||
        f.rgb.size() != static_cast<std::size_t>(f.height) * f.width * 3) {
      throw Error(ErrorKind::kParse, "malformed frame buffer");
    }
  }
}

Image ReadPng(const fs::path& path) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  if (png_image_begin_read_from_file(&png, path.c_str()) == 0) {
    throw Error(ErrorKind::kIo, "cannot read " + path.string() + ": " + png.message);
  }
  png.format = PNG_FORMAT_RGB;
  Image img(static_cast<int>(png.height), static_cast<int>(png.width));
  if (png_image_finish_read(&png, nullptr, img.rgb.data(), 0, nullptr) == 0) {
    png_image_free(&png);
    throw Error(ErrorKind::kIo, "cannot decode " + path.string() + ": " + png.message);
  }
  return img;
}

void WritePng(const fs::path& path, const Image& image) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.width);
  png.height = static_cast<png_uint_32>(image.height);
  png.format = PNG_FORMAT_RGB;
  const fs::path tmp = path.string() + ".tmp";
  if (png_image_write_to_file(&png, tmp.c_str(), 0, image.rgb.data(), 0, nullptr) == 0) {
    throw Error(ErrorKind::kIo, "cannot write " + path.string() + ": " + png.message);
  }
  fs::rename(tmp, path);
}

Clip ReadClip(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorKind::kIo, "not a clip directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && IsFrameName(entry.path())) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  Clip clip;
  for (const auto& f : files) clip.frames.push_back(ReadPng(f));
  clip.Validate();
  return clip;
}

void WriteClip(const fs::path& dir, const Clip& clip) {
  clip.Validate();
  fs::create_directories(dir);
  char name[16];
  for (std::size_t i = 0; i < clip.frames.size(); ++i) {
    std::snprintf(name, sizeof(name), "%06zu.png", i);
    WritePng(dir / name, clip.frames[i]);
  }
}

}  // namespace fairscope::image
