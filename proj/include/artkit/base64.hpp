#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace artkit {

std::string base64_encode(std::span<const std::uint8_t> bytes);
inline std::string base64_encode(std::string_view bytes) {
  return base64_encode({reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()});
}
/// Throws std::invalid_argument on characters outside the standard alphabet.
std::vector<std::uint8_t> base64_decode(std::string_view text);

/// Little-endian IEEE float32 blob, base64 encoded.
std::string encode_f32le(std::span<const float> values);
std::vector<float> decode_f32le(std::string_view base64_text);

}  // namespace artkit
