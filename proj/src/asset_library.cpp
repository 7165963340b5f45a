#include "artkit/asset_library.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "artkit/base64.hpp"
#include "json.hpp"

namespace artkit {

using nlohmann::json;

AssetLibrary::AssetLibrary(std::filesystem::path root, std::size_t embedding_dim,
                           std::map<std::string, std::vector<AssetEntry>, std::less<>> categories)
    : root_(std::move(root)), dim_(embedding_dim), categories_(std::move(categories)) {
  validate();
}

namespace {

void check_embedding(const std::vector<float>& e, std::size_t dim, const std::string& owner) {
  if (e.size() != dim) {
    throw LibraryError(owner + ": embedding has dimension " + std::to_string(e.size()) + ", expected " +
                       std::to_string(dim));
  }
  double sq = 0.0;
  for (float v : e) sq += static_cast<double>(v) * v;
  if (std::abs(std::sqrt(sq) - 1.0) > 1e-6) throw LibraryError(owner + ": embedding is not unit norm");
}

Vec3 vec3_from(const json& j, const std::string& owner) {
  if (!j.is_array() || j.size() != 3) throw LibraryError(owner + ": dimensions must be [x, y, z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

void AssetLibrary::validate() const {
  if (dim_ == 0) throw LibraryError("embedding_dim must be positive");
  std::set<std::string, std::less<>> ids;
  for (const auto& [category, entries] : categories_) {
    for (const auto& e : entries) {
      if (!ids.insert(e.object_id).second) throw LibraryError("object '" + e.object_id + "' listed twice");
      check_embedding(e.embedding, dim_, "object '" + e.object_id + "'");
      for (const auto& p : e.parts) {
        const std::string owner = "part '" + e.object_id + "/" + p.name + "'";
        check_embedding(p.embedding, dim_, owner);
        if (!(p.dimensions.x > 0 && p.dimensions.y > 0 && p.dimensions.z > 0)) {
          throw LibraryError(owner + ": dimensions must be positive");
        }
      }
    }
  }
}

AssetLibrary AssetLibrary::parse(std::string_view manifest_text, const std::filesystem::path& root) {
  json doc;
  try {
    doc = json::parse(manifest_text);
  } catch (const json::exception& e) {
    throw LibraryError(std::string("manifest is not valid JSON: ") + e.what());
  }
  try {
    if (doc.value("schema", "") != kLibrarySchema) {
      throw LibraryError("unsupported manifest schema '" + doc.value("schema", "") + "'");
    }
    const auto dim = doc.at("embedding_dim").get<std::size_t>();
    std::map<std::string, std::vector<AssetEntry>, std::less<>> categories;
    for (const auto& [category, list] : doc.at("categories").items()) {
      auto& entries = categories[category];
      for (const auto& item : list) {
        AssetEntry e;
        e.object_id = item.at("object_id").get<std::string>();
        e.category = category;
        e.urdf = item.value("urdf", "");
        e.images = item.value("images", std::vector<std::string>{});
        e.embedding = decode_f32le(item.at("embedding").get<std::string>());
        for (const auto& p : item.value("parts", json::array())) {
          LibraryPart part;
          part.name = p.at("name").get<std::string>();
          part.mesh = p.at("mesh").get<std::string>();
          part.description = p.value("description", "");
          part.dimensions = vec3_from(p.at("dimensions"), "part '" + part.name + "'");
          part.embedding = decode_f32le(p.at("embedding").get<std::string>());
          e.parts.push_back(std::move(part));
        }
        entries.push_back(std::move(e));
      }
    }
    return AssetLibrary(root, dim, std::move(categories));
  } catch (const json::exception& e) {
    throw LibraryError(std::string("malformed manifest: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw LibraryError(std::string("malformed embedding blob: ") + e.what());
  }
}

AssetLibrary AssetLibrary::load(const std::filesystem::path& manifest) {
  std::ifstream in(manifest, std::ios::binary);
  if (!in) throw LibraryError("cannot open library manifest " + manifest.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), manifest.parent_path());
}

std::string AssetLibrary::to_manifest() const {
  json doc;
  doc["schema"] = kLibrarySchema;
  doc["embedding_dim"] = dim_;
  json cats = json::object();
  for (const auto& [category, entries] : categories_) {
    json list = json::array();
    for (const auto& e : entries) {
      json item;
      item["object_id"] = e.object_id;
      item["urdf"] = e.urdf;
      item["images"] = e.images;
      item["embedding"] = encode_f32le(e.embedding);
      json parts = json::array();
      for (const auto& p : e.parts) {
        parts.push_back({{"name", p.name},
                         {"mesh", p.mesh},
                         {"description", p.description},
                         {"dimensions", {p.dimensions.x, p.dimensions.y, p.dimensions.z}},
                         {"embedding", encode_f32le(p.embedding)}});
      }
      item["parts"] = parts;
      list.push_back(item);
    }
    cats[category] = list;
  }
  doc["categories"] = cats;
  return doc.dump(2) + "\n";
}

const AssetEntry* AssetLibrary::find_object(std::string_view object_id) const {
  for (const auto& [category, entries] : categories_) {
    for (const auto& e : entries) {
      if (e.object_id == object_id) return &e;
    }
  }
  return nullptr;
}

std::size_t AssetLibrary::object_count() const {
  std::size_t n = 0;
  for (const auto& [category, entries] : categories_) n += entries.size();
  return n;
}

std::vector<float> unit_normalized(std::vector<float> v) {
  double sq = 0.0;
  for (float x : v) sq += static_cast<double>(x) * x;
  const double n = std::sqrt(sq);
  if (!(n > 0.0)) throw LibraryError("cannot normalize a zero embedding");
  for (auto& x : v) x = static_cast<float>(x / n);
  return v;
}

}  // namespace artkit
