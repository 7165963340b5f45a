#include "artkit/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <set>

namespace artkit {

double cosine_similarity(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) {
    throw RetrievalError(RetrievalError::Code::dimension_mismatch,
                         "embedding dimensions differ: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  if (!(na > 0.0) || !(nb > 0.0)) return 0.0;
  return std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
}

std::vector<CategoryScore> top_k_categories(std::span<const float> query, const AssetLibrary& library, std::size_t k) {
  if (library.object_count() == 0) throw RetrievalError(RetrievalError::Code::empty_library, "library is empty");
  if (query.size() != library.embedding_dim()) {
    throw RetrievalError(RetrievalError::Code::dimension_mismatch,
                         "query has dimension " + std::to_string(query.size()) + ", library uses " +
                             std::to_string(library.embedding_dim()));
  }
  if (k == 0) throw RetrievalError(RetrievalError::Code::invalid_argument, "k must be at least 1");

  std::vector<CategoryScore> scores;
  for (const auto& [category, entries] : library.categories()) {
    if (entries.empty()) continue;
    CategoryScore s{category, -2.0, {}};
    for (const auto& e : entries) {
      const double sim = cosine_similarity(query, e.embedding);
      if (sim > s.similarity) {
        s.similarity = sim;
        s.best_object = e.object_id;
      }
    }
    scores.push_back(std::move(s));
  }
  std::stable_sort(scores.begin(), scores.end(), [](const CategoryScore& a, const CategoryScore& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return a.category < b.category;
  });
  if (scores.size() > k) scores.resize(k);
  return scores;
}

TournamentResult tournament_select(std::span<const std::string> candidates, std::size_t batch,
                                   const Selector& selector, std::size_t max_parallel) {
  if (candidates.empty()) throw RetrievalError(RetrievalError::Code::invalid_argument, "no candidates");
  if (batch < 2) throw RetrievalError(RetrievalError::Code::invalid_argument, "batch size must be at least 2");
  max_parallel = std::max<std::size_t>(1, max_parallel);

  TournamentResult result;
  std::vector<std::string> survivors(candidates.begin(), candidates.end());

  auto ask = [&](const std::vector<std::string>& group) {
    std::string pick = selector(group);
    if (std::find(group.begin(), group.end(), pick) == group.end()) {
      std::string list;
      for (const auto& g : group) list += (list.empty() ? "" : ", ") + g;
      throw RetrievalError(RetrievalError::Code::invalid_selection,
                           "selector returned '" + pick + "', which is not in the batch [" + list + "]");
    }
    return pick;
  };

  while (survivors.size() > 1) {
    result.rounds.push_back(survivors);
    std::vector<std::vector<std::string>> groups;
    std::vector<std::string> carried;
    if (survivors.size() <= batch) {
      groups.push_back(survivors);
    } else {
      std::size_t i = 0;
      for (; i + batch <= survivors.size(); i += batch) {
        groups.emplace_back(survivors.begin() + static_cast<std::ptrdiff_t>(i),
                            survivors.begin() + static_cast<std::ptrdiff_t>(i + batch));
      }
      carried.assign(survivors.begin() + static_cast<std::ptrdiff_t>(i), survivors.end());
    }

    std::vector<std::string> winners(groups.size());
    for (std::size_t start = 0; start < groups.size(); start += max_parallel) {
      const std::size_t end = std::min(groups.size(), start + max_parallel);
      if (end - start == 1) {
        winners[start] = ask(groups[start]);
      } else {
        std::vector<std::future<std::string>> pending;
        for (std::size_t g = start; g < end; ++g) {
          pending.push_back(std::async(std::launch::async, [&, g] { return ask(groups[g]); }));
        }
        for (std::size_t g = start; g < end; ++g) winners[g] = pending[g - start].get();
      }
      result.selector_calls += end - start;
    }
    winners.insert(winners.end(), carried.begin(), carried.end());
    survivors = std::move(winners);
  }
  result.winner = survivors.front();
  return result;
}

std::vector<PartMatch> match_parts_by_text(std::span<const PartSpec> parts, const AssetLibrary& library,
                                           const Embedder& embedder) {
  if (library.object_count() == 0) throw RetrievalError(RetrievalError::Code::empty_library, "library is empty");
  std::vector<PartMatch> out;
  for (const auto& part : parts) {
    std::vector<float> query;
    try {
      query = embedder(part.description);
    } catch (const std::exception& e) {
      throw RetrievalError(RetrievalError::Code::embedder_failure,
                           "embedding description of part '" + part.name + "' failed: " + e.what());
    }
    if (query.size() != library.embedding_dim()) {
      throw RetrievalError(RetrievalError::Code::dimension_mismatch,
                           "embedding for part '" + part.name + "' has dimension " + std::to_string(query.size()));
    }
    PartMatch best{part.name, {}, {}, {}, {}, -2.0};
    for (const auto& [category, entries] : library.categories()) {
      for (const auto& e : entries) {
        for (const auto& lp : e.parts) {
          const double sim = cosine_similarity(query, lp.embedding);
          if (sim > best.similarity) best = {part.name, e.object_id, lp.name, lp.mesh, lp.dimensions, sim};
        }
      }
    }
    if (best.mesh_ref.empty()) {
      throw RetrievalError(RetrievalError::Code::empty_library, "library has no parts to match '" + part.name + "'");
    }
    out.push_back(std::move(best));
  }
  return out;
}

std::pair<TriMesh, Vec3> rescale_mesh(const TriMesh& mesh, const Vec3& target) {
  if (mesh.empty()) throw RetrievalError(RetrievalError::Code::degenerate_mesh, "cannot rescale an empty mesh");
  if (!(target.x > 0 && target.y > 0 && target.z > 0)) {
    throw RetrievalError(RetrievalError::Code::invalid_argument, "target dimensions must be positive");
  }
  const Vec3 extent = aabb_of(mesh).extent();
  if (!(extent.x > 0 && extent.y > 0 && extent.z > 0)) {
    throw RetrievalError(RetrievalError::Code::degenerate_mesh, "mesh has zero extent along an axis");
  }
  const Vec3 scale{target.x / extent.x, target.y / extent.y, target.z / extent.z};
  return {scaled(mesh, scale), scale};
}

}  // namespace artkit
