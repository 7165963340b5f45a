#include "artkit/loops.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "artkit/kinematics.hpp"
#include "json.hpp"
#include "prompts_embedded.hpp"

namespace artkit {

using nlohmann::json;

const char* to_string(Modality m) {
  switch (m) {
    case Modality::text: return "text";
    case Modality::image: return "image";
    case Modality::video: return "video";
  }
  return "text";
}

std::optional<Modality> modality_from_string(std::string_view s) {
  for (auto m : {Modality::text, Modality::image, Modality::video}) {
    if (s == to_string(m)) return m;
  }
  return std::nullopt;
}

void LoopConfig::validate() const {
  if (rating_threshold < 0 || rating_threshold > 10) throw AgentError("rating_threshold must lie in [0, 10]");
  if (max_iterations < 1) throw AgentError("max_iterations must be at least 1");
  if (sweep_frames < 2) throw AgentError("sweep_frames must be at least 2");
  if (max_frames < 1) throw AgentError("max_frames must be at least 1");
  if (max_retries < 0) throw AgentError("max_retries must be non-negative");
  if (render_size < 1) throw AgentError("render_size must be positive");
}

// ---- templates ----

std::string prompt_template(std::string_view role) {
  for (const auto& [name, text] : embedded_prompts()) {
    if (name != role) continue;
    std::string_view body = text;
    if (body.starts_with("# role:")) body.remove_prefix(std::min(body.size(), body.find('\n') + 1));
    return std::string(body);
  }
  throw AgentError("no prompt template for role '" + std::string(role) + "'");
}

std::string fill_template(std::string_view tmpl, const std::map<std::string, std::string>& vars) {
  std::string out;
  std::size_t at = 0;
  while (true) {
    const std::size_t open = tmpl.find("{{", at);
    if (open == std::string_view::npos) break;
    const std::size_t close = tmpl.find("}}", open + 2);
    if (close == std::string_view::npos) break;
    out.append(tmpl.substr(at, open - at));
    const std::string key(tmpl.substr(open + 2, close - open - 2));
    auto it = vars.find(key);
    if (it == vars.end()) throw AgentError("prompt placeholder '" + key + "' has no value");
    out += it->second;
    at = close + 2;
  }
  out.append(tmpl.substr(at));
  return out;
}

// ---- parsing ----

const char* to_string(FailureCase f) {
  switch (f) {
    case FailureCase::joint_type: return "joint_type";
    case FailureCase::joint_axis: return "joint_axis";
    case FailureCase::joint_origin: return "joint_origin";
    case FailureCase::joint_limit: return "joint_limit";
  }
  return "joint_type";
}

std::string extract_json_object(std::string_view text) {
  for (std::size_t start = text.find('{'); start != std::string_view::npos; start = text.find('{', start + 1)) {
    int depth = 0;
    bool in_string = false, escaped = false;
    for (std::size_t i = start; i < text.size(); ++i) {
      const char c = text[i];
      if (in_string) {
        if (escaped) escaped = false;
        else if (c == '\\') escaped = true;
        else if (c == '"') in_string = false;
        continue;
      }
      if (c == '"') in_string = true;
      else if (c == '{') ++depth;
      else if (c == '}' && --depth == 0) {
        std::string candidate(text.substr(start, i - start + 1));
        if (json::accept(candidate)) return candidate;
        break;
      }
    }
  }
  throw AgentError("no JSON object in agent output", std::string(text));
}

CriticFeedback parse_critic_feedback(std::string_view text) {
  const json doc = json::parse(extract_json_object(text));
  CriticFeedback fb;
  const auto& rating = doc.contains("realism_rating") ? doc.at("realism_rating") : json();
  if (!rating.is_number()) throw AgentError("critic output lacks a numeric realism_rating", std::string(text));
  const double r = rating.get<double>();
  if (r != std::floor(r) || r < 0 || r > 10) {
    throw AgentError("realism_rating must be an integer in [0, 10]", std::string(text));
  }
  fb.realism_rating = static_cast<int>(r);
  if (doc.contains("failure_case") && doc.at("failure_case").is_string()) {
    const std::string fc = doc.at("failure_case").get<std::string>();
    if (fc != "success") {
      bool known = false;
      for (auto f : {FailureCase::joint_type, FailureCase::joint_axis, FailureCase::joint_origin,
                     FailureCase::joint_limit}) {
        if (fc == to_string(f)) {
          fb.failure_case = f;
          known = true;
        }
      }
      if (!known) throw AgentError("unknown failure_case '" + fc + "'", std::string(text));
    }
  }
  for (const auto& issue : doc.value("issues", json::array())) {
    if (!issue.is_object()) continue;
    fb.issues.push_back({{issue.value("line", 0), issue.value("column", 0)}, issue.value("message", "")});
  }
  return fb;
}

std::string extract_program(std::string_view text) {
  const std::size_t fence = text.find("```");
  if (fence == std::string_view::npos) return std::string(text);
  const std::size_t body = text.find('\n', fence);
  if (body == std::string_view::npos) return {};
  const std::size_t end = text.find("```", body + 1);
  return std::string(text.substr(body + 1, (end == std::string_view::npos ? text.size() : end) - body - 1));
}

namespace {

bool is_identifier(const std::string& s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

std::string trimmed(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

TaskPlan parse_task_plan(std::string_view text) {
  TaskPlan plan;
  try {
    const json doc = json::parse(extract_json_object(text));
    plan.description = doc.value("description", "");
    std::set<std::string> seen;
    for (const auto& p : doc.at("parts")) {
      PartSpec spec;
      spec.name = p.at("name").get<std::string>();
      spec.description = p.at("description").get<std::string>();
      const auto dims = p.at("dimensions").get<std::vector<double>>();
      if (dims.size() != 3) throw AgentError("part '" + spec.name + "' needs three dimensions", std::string(text));
      spec.dimensions = {dims[0], dims[1], dims[2]};
      if (!is_identifier(spec.name)) throw AgentError("part name '" + spec.name + "' is not an identifier", std::string(text));
      if (!seen.insert(spec.name).second) throw AgentError("part '" + spec.name + "' listed twice", std::string(text));
      if (!(dims[0] > 0 && dims[1] > 0 && dims[2] > 0)) {
        throw AgentError("part '" + spec.name + "' has a non-positive dimension", std::string(text));
      }
      plan.parts.push_back(std::move(spec));
    }
  } catch (const json::exception& e) {
    throw AgentError(std::string("malformed part plan: ") + e.what(), std::string(text));
  }
  if (plan.parts.empty()) throw AgentError("part plan lists no parts", std::string(text));
  return plan;
}

std::string parse_selection(std::string_view text, std::span<const std::string> batch) {
  std::string pick;
  try {
    const json doc = json::parse(extract_json_object(text));
    if (doc.contains("choice")) {
      pick = doc.at("choice").get<std::string>();
    } else if (doc.contains("choice_index")) {
      const auto k = doc.at("choice_index").get<std::size_t>();
      if (k >= batch.size()) throw AgentError("choice_index out of range", std::string(text));
      pick = batch[k];
    }
  } catch (const AgentError&) {
    if (pick.empty()) pick = trimmed(text);
  } catch (const json::exception&) {
    pick = trimmed(text);
  }
  if (std::find(batch.begin(), batch.end(), pick) == batch.end()) {
    throw AgentError("selector chose '" + pick + "', which is not a candidate", std::string(text));
  }
  return pick;
}

// ---- inputs ----

std::vector<std::filesystem::path> subsample_frames(const std::vector<std::filesystem::path>& frames, int max_frames) {
  const std::size_t n = frames.size();
  const auto k = static_cast<std::size_t>(std::max(1, max_frames));
  if (n <= k) return frames;
  if (k == 1) return {frames.front()};
  std::vector<std::filesystem::path> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(frames[(i * (n - 1) + (k - 1) / 2) / (k - 1)]);
  return out;
}

std::vector<std::filesystem::path> list_frames(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::string ext = e.path().extension().string();
    for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".webp") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ---- stages ----

namespace {

AgentRequest make_request(std::string role, std::string text, std::vector<ImageData> images = {}) {
  return {std::move(role), {Message{"user", std::move(text), std::move(images)}}};
}

}  // namespace

TaskPlan specify_task(const std::string& prompt, Agent& agent, int max_retries) {
  if (trimmed(prompt).empty()) throw AgentError("task prompt is empty");
  const auto dense = agent.complete(make_request("task_specifier", fill_template(prompt_template("task_specifier"),
                                                                                  {{"prompt", prompt}})));
  std::string description = trimmed(dense.text);
  if (description.empty()) description = prompt;

  std::string feedback;
  std::string last_raw;
  for (int attempt = 0; attempt <= max_retries; ++attempt) {
    const auto reply = agent.complete(make_request(
        "layout_planner",
        fill_template(prompt_template("layout_planner"), {{"description", description}, {"feedback", feedback}})));
    last_raw = reply.text;
    try {
      TaskPlan plan = parse_task_plan(reply.text);
      if (plan.description.empty()) plan.description = description;
      return plan;
    } catch (const AgentError& e) {
      feedback = std::string("\nYour previous answer was rejected: ") + e.what() + "\nAnswer again with valid JSON.";
    }
  }
  throw AgentError("layout planner output unusable after " + std::to_string(max_retries + 1) + " attempts", last_raw);
}

Renderer builtin_renderer(const MeshCache& cache) {
  return [&cache](const UrdfModel& model, const JointValues& values, const RenderOptions& options) {
    return render_model(model, values, options, cache);
  };
}

namespace {

std::string feedback_text(const CriticFeedback& fb, int threshold) {
  std::ostringstream out;
  out << "Critic rating: " << fb.realism_rating << "/10 (needs more than " << threshold << ").";
  if (fb.failure_case) out << " Failure case: " << to_string(*fb.failure_case) << '.';
  out << '\n';
  for (const auto& issue : fb.issues) {
    out << "- line " << issue.location.line << ", column " << issue.location.column << ": " << issue.message << '\n';
  }
  return out.str();
}

struct Compiled {
  ArtProgram program;
  CompileResult result;
};

Compiled compile_text(const std::string& text, const LoopEnv& env) {
  ArtProgram program = parse_artlang(text);
  CompileResult result = env.library ? compile(program, *env.library, env.compile) : compile(program, env.compile);
  return {std::move(program), std::move(result)};
}

using RenderStep = std::function<std::vector<NamedImage>(const CompileResult&, int iteration)>;

/// Shared actor-critic driver for both loops.
LoopResult drive(const std::string& stage, const LoopInput& input, const std::vector<ImageData>& input_frames,
                 const std::string& start_program, Agent& agent, bool use_critic, const LoopConfig& cfg,
                 const LoopEnv& env, const std::map<std::string, std::string>& extra_vars,
                 const RenderStep& render_step) {
  cfg.validate();
  const std::string actor_role = "actor_" + stage;
  const std::string critic_role = "critic_" + stage;
  std::vector<Iteration> log;
  std::string current = start_program;
  std::string feedback;
  std::optional<Compiled> best;
  int best_rating = -1;
  int best_index = 0;
  std::optional<Compiled> first_ok;

  auto vars_for = [&](const std::string& program) {
    std::map<std::string, std::string> vars = extra_vars;
    vars["modality"] = to_string(cfg.modality);
    vars["task"] = input.task;
    vars["program"] = program;
    return vars;
  };

  for (int i = 1; i <= cfg.max_iterations; ++i) {
    Iteration it;
    it.index = i;
    auto vars = vars_for(current);
    vars["feedback"] = feedback.empty() ? std::string() : "Feedback on the previous attempt:\n" + feedback;
    it.actor_prompt = fill_template(prompt_template(actor_role), vars);
    it.actor_raw = agent.complete(make_request(actor_role, it.actor_prompt, input_frames)).text;
    it.program = extract_program(it.actor_raw);

    std::optional<Compiled> compiled;
    try {
      compiled = compile_text(it.program, env);
    } catch (const std::exception& e) {
      it.compile_error = e.what();
      feedback = std::string("The program failed to compile:\n") + e.what() + "\n";
      current = it.program;
      log.push_back(std::move(it));
      continue;
    }
    current = pretty_print(compiled->program);
    it.renders = render_step(compiled->result, i);

    if (!use_critic) {
      log.push_back(std::move(it));
      LoopResult r{current, std::move(compiled->program), std::move(compiled->result), std::move(log), i, true};
      return r;
    }

    std::vector<ImageData> critic_images = input_frames;
    for (const auto& img : it.renders) critic_images.push_back(image_from_bytes(img.png, "image/png"));
    std::string critic_prompt = fill_template(prompt_template(critic_role), vars_for(current));
    CriticFeedback fb;
    for (int attempt = 0;; ++attempt) {
      it.critic_raw = agent.complete(make_request(critic_role, critic_prompt, critic_images)).text;
      try {
        fb = parse_critic_feedback(it.critic_raw);
        break;
      } catch (const std::exception& e) {
        if (attempt >= cfg.max_retries) {
          throw AgentError("critic output unusable after " + std::to_string(attempt + 1) + " attempts: " + e.what(),
                           it.critic_raw);
        }
        critic_prompt += std::string("\nYour previous answer was rejected: ") + e.what() + "\nAnswer again with valid JSON.";
      }
    }
    it.feedback = fb;
    log.push_back(std::move(it));
    if (!first_ok) first_ok = compiled;
    if (fb.realism_rating > best_rating) {
      best_rating = fb.realism_rating;
      best_index = i;
      best = compiled;
    }
    if (fb.realism_rating > cfg.rating_threshold) {
      return {current, std::move(compiled->program), std::move(compiled->result), std::move(log), i, true};
    }
    feedback = feedback_text(fb, cfg.rating_threshold);
  }
  if (!best) throw LoopFailure(stage + " loop produced no compiling program in " +
                                   std::to_string(cfg.max_iterations) + " iterations",
                               std::move(log));
  return {pretty_print(best->program), std::move(best->program), std::move(best->result), std::move(log), best_index,
          false};
}

RenderOptions options_for(const LoopConfig& cfg, CameraPreset camera, RenderMode mode = RenderMode::shaded) {
  RenderOptions o;
  o.width = o.height = cfg.render_size;
  o.camera = camera;
  o.mode = mode;
  return o;
}

}  // namespace

LoopResult run_link_loop(const LoopInput& input, const std::string& draft, Agent& agent, bool use_critic,
                         const LoopConfig& cfg, const LoopEnv& env) {
  std::vector<ImageData> frames = input.frames;
  if (cfg.modality == Modality::video && frames.size() > 1) frames.resize(1);  // first frame only
  auto step = [&](const CompileResult& r, int i) {
    std::vector<NamedImage> out;
    for (auto cam : {CameraPreset::iso, CameraPreset::front}) {
      out.push_back({"link_" + std::to_string(i) + "_" + to_string(cam) + ".png",
                     encode_png(env.renderer(r.model, {}, options_for(cfg, cam)))});
    }
    return out;
  };
  return drive("link", input, frames, draft, agent, use_critic, cfg, env, {}, step);
}

LoopResult run_joint_loop(const LoopInput& input, const std::string& program, Agent& agent,
                          const std::optional<std::string>& target_link, const LoopConfig& cfg, const LoopEnv& env) {
  std::vector<std::string> sweep_names;
  auto step = [&](const CompileResult& r, int i) {
    std::vector<NamedImage> out;
    sweep_names.clear();
    for (const auto& j : r.model.joints) {
      if (j.kind == JointKind::fixed) continue;
      sweep_names.push_back(j.name);
      const auto configs = joint_sweep(r.model, j.name, cfg.sweep_frames);
      RenderOptions o = options_for(cfg, CameraPreset::iso);
      o.framing = model_bounds(r.model, configs, MeshCache{});
      for (std::size_t k = 0; k < configs.size(); ++k) {
        out.push_back({"joint_" + std::to_string(i) + "_" + j.name + "_" + std::to_string(k) + ".png",
                       encode_png(env.renderer(r.model, configs[k], o))});
      }
    }
    return out;
  };
  std::map<std::string, std::string> vars;
  vars["target"] = target_link ? "The part that moves is '" + *target_link + "'. Give it a joint." : std::string();
  vars["sweeps"] = std::to_string(cfg.sweep_frames) + " frames per movable joint, in statement order";
  return drive("joint", input, input.frames, program, agent, true, cfg, env, vars, step);
}

AffordanceResult extract_target_affordance(const LoopInput& input, const UrdfModel& model, Agent& agent,
                                           const Renderer& renderer, const LoopConfig& cfg) {
  AffordanceResult result;
  result.segmented = {"affordance_segmented.png",
                      encode_png(renderer(model, {}, options_for(cfg, CameraPreset::iso, RenderMode::segmented)))};
  std::vector<std::string> valid;
  std::ostringstream legend;
  const std::string root = model.root();
  for (const auto& [name, c] : segment_legend(model)) {
    char hex[8];
    std::snprintf(hex, sizeof hex, "#%02x%02x%02x", c.r, c.g, c.b);
    legend << "  " << name << ": " << hex << '\n';
    if (name != root) valid.push_back(name);
  }
  std::vector<ImageData> images = input.frames;
  images.push_back(image_from_bytes(result.segmented.png, "image/png"));
  std::string feedback;
  for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
    ++result.attempts;
    const std::string prompt =
        fill_template(prompt_template("affordance"), {{"legend", legend.str()}, {"feedback", feedback}});
    const std::string raw = agent.complete(make_request("affordance", prompt, images)).text;
    result.raw.push_back(raw);
    std::string name;
    try {
      name = json::parse(extract_json_object(raw)).at("link").get<std::string>();
    } catch (const std::exception&) {
      name = trimmed(raw);
    }
    if (std::find(valid.begin(), valid.end(), name) != valid.end()) {
      result.link = name;
      return result;
    }
    std::string list;
    for (const auto& v : valid) list += (list.empty() ? "" : ", ") + v;
    feedback = "'" + name + "' is not a movable part of this model. Valid names: " + list + ".";
  }
  throw AgentError("affordance agent named no valid link after " + std::to_string(result.attempts) + " attempts",
                   result.raw.empty() ? std::string() : result.raw.back());
}

std::string loop_log_json(const std::string& stage, const std::vector<Iteration>& log, int best_iteration,
                          bool converged) {
  json iters = json::array();
  for (const auto& it : log) {
    json j;
    j["index"] = it.index;
    j["actor_prompt"] = it.actor_prompt;
    j["actor_raw"] = it.actor_raw;
    j["program"] = it.program;
    j["compile_error"] = it.compile_error ? json(*it.compile_error) : json(nullptr);
    json renders = json::array();
    for (const auto& r : it.renders) renders.push_back("renders/" + r.name);
    j["renders"] = renders;
    if (it.feedback) {
      json issues = json::array();
      for (const auto& i : it.feedback->issues) {
        issues.push_back({{"line", i.location.line}, {"column", i.location.column}, {"message", i.message}});
      }
      j["feedback"] = {{"realism_rating", it.feedback->realism_rating},
                       {"failure_case", it.feedback->failure_case ? json(to_string(*it.feedback->failure_case))
                                                                  : json(nullptr)},
                       {"issues", issues}};
    } else {
      j["feedback"] = nullptr;
    }
    j["critic_raw"] = it.critic_raw;
    iters.push_back(j);
  }
  return json{{"schema", "artkit.loop_log/1"},
              {"stage", stage},
              {"best_iteration", best_iteration},
              {"converged", converged},
              {"iterations", iters}}
             .dump(2) +
         "\n";
}

}  // namespace artkit
