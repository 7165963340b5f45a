#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "artkit/agent.hpp"
#include "artkit/compiler.hpp"
#include "artkit/render.hpp"
#include "artkit/retrieval.hpp"

namespace artkit {

enum class Modality { text, image, video };

const char* to_string(Modality m);
std::optional<Modality> modality_from_string(std::string_view s);

struct LoopConfig {
  int rating_threshold = 5;  // stop once a rating is strictly greater
  int max_iterations = 4;
  Modality modality = Modality::image;
  int sweep_frames = 6;
  int max_frames = 8;   // input frames per agent request
  int max_retries = 2;  // re-asks after unparseable agent output
  int render_size = 256;

  void validate() const;
};

// ---- prompt templates ----

/// Versioned template text for a role, without its header line.
std::string prompt_template(std::string_view role);
/// Replaces every {{name}}. Throws AgentError on a placeholder with no value.
std::string fill_template(std::string_view tmpl, const std::map<std::string, std::string>& vars);

// ---- agent output parsing ----

enum class FailureCase { joint_type, joint_axis, joint_origin, joint_limit };

const char* to_string(FailureCase f);

struct CriticIssue {
  SourceLocation location;
  std::string message;
};

struct CriticFeedback {
  int realism_rating = 0;  // 0..10
  std::optional<FailureCase> failure_case;  // joint critique only; empty means success
  std::vector<CriticIssue> issues;
};

/// The first JSON object in `text`. Throws AgentError when none parses.
std::string extract_json_object(std::string_view text);
CriticFeedback parse_critic_feedback(std::string_view text);
/// Contents of the first ```art (or ```artlang, or bare ```) block; the whole
/// text when there is no fence.
std::string extract_program(std::string_view text);

struct TaskPlan {
  std::string description;
  std::vector<PartSpec> parts;
};

TaskPlan parse_task_plan(std::string_view text);
/// Candidate chosen by a selector reply: {"choice": id}, {"choice_index": k}
/// or a bare id. Throws AgentError when the reply names none of `batch`.
std::string parse_selection(std::string_view text, std::span<const std::string> batch);

// ---- inputs ----

/// Evenly spaced subset of at most `max_frames` items, keeping first and last.
std::vector<std::filesystem::path> subsample_frames(const std::vector<std::filesystem::path>& frames, int max_frames);
/// Sorted image files (png/jpg/jpeg/webp) in a directory.
std::vector<std::filesystem::path> list_frames(const std::filesystem::path& dir);

struct LoopInput {
  std::string task;                // text prompt or short description of the visual input
  std::vector<ImageData> frames;   // already subsampled; empty for text input
};

// ---- stages ----

/// Densifies `prompt` with the task specifier, then asks the layout planner
/// for parts. Planner output that fails to parse is re-requested with the
/// parse error appended, up to max_retries times.
TaskPlan specify_task(const std::string& prompt, Agent& agent, int max_retries = 2);

using Renderer = std::function<Image(const UrdfModel&, const JointValues&, const RenderOptions&)>;

Renderer builtin_renderer(const MeshCache& cache);

struct NamedImage {
  std::string name;
  std::string png;
};

struct Iteration {
  int index = 0;  // 1-based
  std::string actor_prompt;
  std::string actor_raw;
  std::string program;
  std::optional<std::string> compile_error;
  std::vector<NamedImage> renders;
  std::optional<CriticFeedback> feedback;
  std::string critic_raw;
};

struct LoopResult {
  std::string program_text;  // pretty-printed
  ArtProgram program;
  CompileResult compiled;
  std::vector<Iteration> log;
  int best_iteration = 0;    // 1-based index into log
  bool converged = false;    // stopped on a rating above the threshold
};

class LoopFailure : public std::runtime_error {
 public:
  LoopFailure(const std::string& what, std::vector<Iteration> log)
      : std::runtime_error(what), log_(std::move(log)) {}
  const std::vector<Iteration>& log() const { return log_; }

 private:
  std::vector<Iteration> log_;
};

struct LoopEnv {
  CompileOptions compile;
  const AssetLibrary* library = nullptr;
  Renderer renderer;
};

/// Actor proposes, program compiles, renders go to the critic, repeat until
/// a rating exceeds the threshold or iterations run out. Compile errors are
/// fed back to the actor. Without a critic the first compiling program wins.
/// On exhaustion the best-rated iteration is returned (earliest on ties).
LoopResult run_link_loop(const LoopInput& input, const std::string& draft, Agent& agent, bool use_critic,
                         const LoopConfig& cfg, const LoopEnv& env);

/// Same protocol for joints; the critic sees sweeps of every movable joint.
/// `target_link`, when set, tells the actor which part should move.
LoopResult run_joint_loop(const LoopInput& input, const std::string& program, Agent& agent,
                          const std::optional<std::string>& target_link, const LoopConfig& cfg, const LoopEnv& env);

struct AffordanceResult {
  std::string link;
  int attempts = 0;
  NamedImage segmented;
  std::vector<std::string> raw;
};

/// Renders a segmented view and asks which link moves; unknown names are
/// re-asked with the list of valid names.
AffordanceResult extract_target_affordance(const LoopInput& input, const UrdfModel& model, Agent& agent,
                                           const Renderer& renderer, const LoopConfig& cfg);

/// JSON for the iteration log of one loop.
std::string loop_log_json(const std::string& stage, const std::vector<Iteration>& log, int best_iteration,
                          bool converged);

}  // namespace artkit
