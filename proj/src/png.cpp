#include "artkit/png.hpp"

#include <zlib.h>

#include <array>
#include <fstream>
#include <stdexcept>

namespace artkit {

Image::Image(int w, int h, Rgb fill) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {}

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v >> 24));
  out.push_back(static_cast<char>(v >> 16));
  out.push_back(static_cast<char>(v >> 8));
  out.push_back(static_cast<char>(v));
}

std::uint32_t get_u32(const std::string& s, std::size_t at) {
  if (at + 4 > s.size()) throw std::runtime_error("truncated PNG");
  return (static_cast<std::uint32_t>(static_cast<unsigned char>(s[at])) << 24) |
         (static_cast<std::uint32_t>(static_cast<unsigned char>(s[at + 1])) << 16) |
         (static_cast<std::uint32_t>(static_cast<unsigned char>(s[at + 2])) << 8) |
         static_cast<std::uint32_t>(static_cast<unsigned char>(s[at + 3]));
}

void put_chunk(std::string& out, const char* type, const std::string& data) {
  put_u32(out, static_cast<std::uint32_t>(data.size()));
  std::string body(type, 4);
  body += data;
  out += body;
  put_u32(out, static_cast<std::uint32_t>(
                   crc32(0, reinterpret_cast<const Bytef*>(body.data()), static_cast<uInt>(body.size()))));
}

constexpr std::array<unsigned char, 8> kSignature{0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

}  // namespace

std::string encode_png(const Image& image) {
  if (image.width <= 0 || image.height <= 0) throw std::invalid_argument("cannot encode an empty image");
  std::string raw;
  raw.reserve(static_cast<std::size_t>(image.height) * (1 + 3 * static_cast<std::size_t>(image.width)));
  for (int y = 0; y < image.height; ++y) {
    raw.push_back(0);  // filter: none
    for (int x = 0; x < image.width; ++x) {
      const Rgb& p = image.at(x, y);
      raw.push_back(static_cast<char>(p.r));
      raw.push_back(static_cast<char>(p.g));
      raw.push_back(static_cast<char>(p.b));
    }
  }
  uLongf packed_size = compressBound(static_cast<uLong>(raw.size()));
  std::string packed(packed_size, '\0');
  if (compress2(reinterpret_cast<Bytef*>(packed.data()), &packed_size, reinterpret_cast<const Bytef*>(raw.data()),
                static_cast<uLong>(raw.size()), 6) != Z_OK) {
    throw std::runtime_error("zlib compression failed");
  }
  packed.resize(packed_size);

  std::string out(reinterpret_cast<const char*>(kSignature.data()), kSignature.size());
  std::string ihdr;
  put_u32(ihdr, static_cast<std::uint32_t>(image.width));
  put_u32(ihdr, static_cast<std::uint32_t>(image.height));
  ihdr += std::string{8, 2, 0, 0, 0};  // 8-bit truecolor
  put_chunk(out, "IHDR", ihdr);
  put_chunk(out, "IDAT", packed);
  put_chunk(out, "IEND", "");
  return out;
}

void write_png(const std::filesystem::path& path, const Image& image) {
  const std::string bytes = encode_png(image);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

Image decode_png(const std::string& bytes) {
  if (bytes.size() < 8 || bytes.compare(0, 8, std::string(kSignature.begin(), kSignature.end())) != 0) {
    throw std::runtime_error("not a PNG file");
  }
  std::size_t at = 8;
  int width = 0, height = 0, channels = 0;
  std::string packed;
  while (at + 8 <= bytes.size()) {
    const std::uint32_t len = get_u32(bytes, at);
    const std::string type = bytes.substr(at + 4, 4);
    if (at + 12 + len > bytes.size()) throw std::runtime_error("truncated PNG chunk");
    const std::string data = bytes.substr(at + 8, len);
    at += 12 + len;
    if (type == "IHDR") {
      width = static_cast<int>(get_u32(data, 0));
      height = static_cast<int>(get_u32(data, 4));
      if (data[8] != 8 || data[12] != 0) throw std::runtime_error("unsupported PNG layout");
      if (data[9] == 2) channels = 3;
      else if (data[9] == 6) channels = 4;
      else throw std::runtime_error("unsupported PNG color type");
    } else if (type == "IDAT") {
      packed += data;
    } else if (type == "IEND") {
      break;
    }
  }
  if (width <= 0 || height <= 0) throw std::runtime_error("PNG without header");
  const std::size_t stride = static_cast<std::size_t>(width) * channels;
  std::string raw(static_cast<std::size_t>(height) * (stride + 1), '\0');
  uLongf raw_size = static_cast<uLongf>(raw.size());
  if (uncompress(reinterpret_cast<Bytef*>(raw.data()), &raw_size, reinterpret_cast<const Bytef*>(packed.data()),
                 static_cast<uLong>(packed.size())) != Z_OK ||
      raw_size != raw.size()) {
    throw std::runtime_error("corrupt PNG image data");
  }
  std::vector<unsigned char> prev(stride, 0), cur(stride);
  Image img(width, height, {});
  for (int y = 0; y < height; ++y) {
    const unsigned char filter = static_cast<unsigned char>(raw[y * (stride + 1)]);
    for (std::size_t i = 0; i < stride; ++i) {
      const unsigned char x = static_cast<unsigned char>(raw[y * (stride + 1) + 1 + i]);
      const int a = i >= static_cast<std::size_t>(channels) ? cur[i - channels] : 0;
      const int b = prev[i];
      const int c = i >= static_cast<std::size_t>(channels) ? prev[i - channels] : 0;
      int pred = 0;
      switch (filter) {
        case 0: pred = 0; break;
        case 1: pred = a; break;
        case 2: pred = b; break;
        case 3: pred = (a + b) / 2; break;
        case 4: {
          const int p = a + b - c;
          const int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
          pred = (pa <= pb && pa <= pc) ? a : (pb <= pc ? b : c);
          break;
        }
        default: throw std::runtime_error("bad PNG filter");
      }
      cur[i] = static_cast<unsigned char>(x + pred);
    }
    for (int x = 0; x < width; ++x) {
      img.at(x, y) = {cur[x * channels], cur[x * channels + 1], cur[x * channels + 2]};
    }
    prev.swap(cur);
  }
  return img;
}

}  // namespace artkit
