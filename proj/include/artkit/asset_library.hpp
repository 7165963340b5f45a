#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "artkit/geometry.hpp"

namespace artkit {

inline constexpr std::string_view kLibrarySchema = "artkit.asset_library/1";

class LibraryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LibraryPart {
  std::string name;
  std::string mesh;  // relative to the library root
  std::string description;
  Vec3 dimensions;
  std::vector<float> embedding;  // description embedding, unit norm
};

struct AssetEntry {
  std::string object_id;
  std::string category;
  std::string urdf;  // relative to the library root; may be empty
  std::vector<std::string> images;
  std::vector<float> embedding;  // object embedding, unit norm
  std::vector<LibraryPart> parts;
};

/// Immutable after load; safe to share across threads.
class AssetLibrary {
 public:
  AssetLibrary() = default;
  AssetLibrary(std::filesystem::path root, std::size_t embedding_dim,
               std::map<std::string, std::vector<AssetEntry>, std::less<>> categories);

  static AssetLibrary load(const std::filesystem::path& manifest);
  static AssetLibrary parse(std::string_view manifest_text, const std::filesystem::path& root);
  /// Manifest text (versioned schema, base64 float32 embeddings).
  std::string to_manifest() const;

  const std::filesystem::path& root_dir() const { return root_; }
  std::size_t embedding_dim() const { return dim_; }
  const std::map<std::string, std::vector<AssetEntry>, std::less<>>& categories() const { return categories_; }
  const AssetEntry* find_object(std::string_view object_id) const;
  std::size_t object_count() const;

 private:
  void validate() const;

  std::filesystem::path root_;
  std::size_t dim_ = 0;
  std::map<std::string, std::vector<AssetEntry>, std::less<>> categories_;
};

/// Scales `v` to unit norm (float32).
std::vector<float> unit_normalized(std::vector<float> v);

}  // namespace artkit
