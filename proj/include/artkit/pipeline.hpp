#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "artkit/asset_library.hpp"
#include "artkit/evaluate.hpp"
#include "artkit/loops.hpp"

namespace artkit {

inline constexpr std::string_view kBundleSchema = "artkit.bundle/1";

struct PipelineConfig {
  LoopConfig loop;
  RetrievalConfig retrieval;
  std::size_t max_parallel = 1;   // concurrent selector calls per tournament round
  bool target_affordance = false;
  bool critic_for_text = true;
  /// Replaces the built-in rasterizer when non-empty (see render_external).
  std::string external_renderer;
  EvalConfig eval;
  bool match_by_chamfer = false;
};

struct PipelineInput {
  Modality modality = Modality::image;
  /// Text file or literal prompt (text), image file (image) or frame directory (video).
  std::filesystem::path path;
  std::string text;  // used for text modality when path is empty
  std::optional<std::filesystem::path> ground_truth;
};

struct StageStatus {
  std::string name;
  std::string status;  // ok | failed | skipped
  std::string error;
};

struct VisualRetrieval {
  std::vector<CategoryScore> categories;
  std::vector<std::string> candidates;
  TournamentResult tournament;
};

/// Category narrowing plus tournament over the library objects of the top
/// categories. The selector sees the query image and each candidate's first
/// library image.
VisualRetrieval retrieve_visual(const ImageData& query, const std::string& query_key, const AssetLibrary& library,
                                const Embedder& embedder, Agent& agent, const RetrievalConfig& cfg,
                                std::size_t max_parallel = 1);

struct PipelineResult {
  std::filesystem::path bundle;
  std::vector<StageStatus> stages;
  std::optional<EvalReport> report;
  bool ok() const;
};

/// Runs retrieval, the link loop, optional affordance extraction and the
/// joint loop, writing a bundle into `out_dir` (created if needed). A failed
/// stage stops the run but everything finished so far is still written.
PipelineResult run_pipeline(const PipelineInput& input, const AssetLibrary& library, Agent& agent,
                            const Embedder& embedder, const PipelineConfig& cfg,
                            const std::filesystem::path& out_dir);

}  // namespace artkit
