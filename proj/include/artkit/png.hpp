#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace artkit {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// 8-bit RGB raster, row-major from the top-left corner.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<Rgb> pixels;

  Image() = default;
  Image(int w, int h, Rgb fill);
  Rgb& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  const Rgb& at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

/// PNG bytes (truecolor, no interlace, fixed zlib level) so output is stable.
std::string encode_png(const Image& image);
void write_png(const std::filesystem::path& path, const Image& image);
/// Decodes the files encode_png writes (8-bit RGB or RGBA, non-interlaced).
Image decode_png(const std::string& bytes);

}  // namespace artkit
