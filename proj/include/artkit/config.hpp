#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

#include "artkit/agent.hpp"
#include "artkit/pipeline.hpp"

namespace artkit {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Everything `run` and `retrieve` need besides the input. Relative paths in
/// the file resolve against the file's directory.
struct RunConfig {
  std::shared_ptr<Agent> agent;  // role router over the configured agents
  std::shared_ptr<RecordingAgent> recorder;  // set when a transcript is recorded
  std::optional<std::filesystem::path> transcript_path;
  Embedder embedder;
  PipelineConfig pipeline;
};

RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace artkit
