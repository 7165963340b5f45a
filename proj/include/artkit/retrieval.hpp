#pragma once

#include <functional>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "artkit/asset_library.hpp"
#include "artkit/geometry.hpp"

namespace artkit {

class RetrievalError : public std::runtime_error {
 public:
  enum class Code { dimension_mismatch, empty_library, invalid_selection, embedder_failure, degenerate_mesh, invalid_argument };
  RetrievalError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

struct RetrievalConfig {
  std::size_t top_k_categories = 3;
  std::size_t max_num_images = 4;  // tournament batch size
};

/// A part as planned from a text prompt.
struct PartSpec {
  std::string name;
  std::string description;
  Vec3 dimensions;  // meters, all > 0
};

double cosine_similarity(std::span<const float> a, std::span<const float> b);

struct CategoryScore {
  std::string category;
  double similarity = 0.0;  // max over member objects
  std::string best_object;
};

/// Categories ranked by their best member's cosine similarity to the query;
/// ties go to the lexicographically smaller name.
std::vector<CategoryScore> top_k_categories(std::span<const float> query, const AssetLibrary& library, std::size_t k);

/// Picks one id out of a batch.
using Selector = std::function<std::string(std::span<const std::string> batch)>;

struct TournamentResult {
  std::string winner;
  std::size_t selector_calls = 0;
  std::vector<std::vector<std::string>> rounds;  // survivors entering each round
};

/// Divide-and-conquer selection. Each round cuts the survivors, in order, into
/// full batches of `batch` and asks the selector for each batch's winner; a
/// trailing short batch advances unchallenged to the next round. Once no more
/// than `batch` survivors remain they form the final batch. Every call but the
/// last sees a full batch, so the selector runs ceil((n-1)/(batch-1)) times.
/// Calls within a round run on up to `max_parallel` threads.
TournamentResult tournament_select(std::span<const std::string> candidates, std::size_t batch,
                                   const Selector& selector, std::size_t max_parallel = 1);

/// Text -> embedding, e.g. a cached table or a remote endpoint.
using Embedder = std::function<std::vector<float>(const std::string& text)>;

struct PartMatch {
  std::string part;
  std::string object_id;
  std::string library_part;
  std::string mesh_ref;
  Vec3 library_dimensions;
  double similarity = 0.0;
};

/// Each planned part goes to the library part whose description embedding has
/// the highest cosine similarity with the part's embedded description. Ties
/// keep the first library part in manifest order.
std::vector<PartMatch> match_parts_by_text(std::span<const PartSpec> parts, const AssetLibrary& library,
                                           const Embedder& embedder);

/// Per-axis scale mapping the mesh's bounding box extents onto `target`.
std::pair<TriMesh, Vec3> rescale_mesh(const TriMesh& mesh, const Vec3& target);

}  // namespace artkit
