#include "artkit/config.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace artkit {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

AgentEndpoint endpoint_of(const json& j) {
  AgentEndpoint ep;
  ep.base_url = j.at("base_url").get<std::string>();
  ep.path = j.value("path", ep.path);
  ep.model = j.value("model", "");
  ep.timeout_s = j.value("timeout_s", ep.timeout_s);
  ep.max_retries = j.value("max_retries", ep.max_retries);
  ep.api_key_env = j.value("api_key_env", "");
  ep.validate();
  return ep;
}

std::shared_ptr<Agent> agent_of(const json& j, const fs::path& base) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "scripted") return ScriptedAgent::load(resolve(base, j.at("script").get<std::string>()));
  if (kind == "replay") return ReplayAgent::load(resolve(base, j.at("transcript").get<std::string>()));
  if (kind == "http") return std::make_shared<HttpAgent>(endpoint_of(j));
  throw ConfigError("unknown agent kind '" + kind + "'");
}

}  // namespace

RunConfig parse_run_config(std::string_view text, const fs::path& base_dir) {
  RunConfig rc;
  try {
    const json doc = json::parse(text);
    const json agents = doc.value("agents", json::object());
    std::shared_ptr<Agent> fallback;
    if (agents.contains("default")) fallback = agent_of(agents.at("default"), base_dir);
    auto router = std::make_shared<RoutingAgent>(fallback);
    for (const auto& [role, spec] : agents.items()) {
      if (role != "default") router->route(role, agent_of(spec, base_dir));
    }
    rc.agent = router;
    if (doc.contains("record_transcript")) {
      rc.transcript_path = resolve(base_dir, doc.at("record_transcript").get<std::string>());
      rc.recorder = std::make_shared<RecordingAgent>(router);
      rc.agent = rc.recorder;
    }

    if (doc.contains("embedder")) {
      const json& e = doc.at("embedder");
      const std::string kind = e.at("kind").get<std::string>();
      if (kind == "cache") {
        const auto cache = EmbeddingCache::load(resolve(base_dir, e.at("path").get<std::string>()));
        Embedder fallback_embedder;
        if (e.contains("fallback")) fallback_embedder = http_embedder(endpoint_of(e.at("fallback")));
        rc.embedder = cache.embedder(fallback_embedder);
      } else if (kind == "http") {
        rc.embedder = http_embedder(endpoint_of(e));
      } else {
        throw ConfigError("unknown embedder kind '" + kind + "'");
      }
    }

    PipelineConfig& p = rc.pipeline;
    const json loop = doc.value("loop", json::object());
    p.loop.rating_threshold = loop.value("rating_threshold", p.loop.rating_threshold);
    p.loop.max_iterations = loop.value("max_iterations", p.loop.max_iterations);
    p.loop.sweep_frames = loop.value("sweep_frames", p.loop.sweep_frames);
    p.loop.max_frames = loop.value("max_frames", p.loop.max_frames);
    p.loop.max_retries = loop.value("max_retries", p.loop.max_retries);
    p.loop.render_size = loop.value("render_size", p.loop.render_size);
    p.loop.validate();
    p.critic_for_text = loop.value("critic_for_text", p.critic_for_text);
    const json retrieval = doc.value("retrieval", json::object());
    p.retrieval.top_k_categories = retrieval.value("top_k_categories", p.retrieval.top_k_categories);
    p.retrieval.max_num_images = retrieval.value("max_num_images", p.retrieval.max_num_images);
    if (p.retrieval.top_k_categories < 1) throw ConfigError("top_k_categories must be at least 1");
    if (p.retrieval.max_num_images < 2) throw ConfigError("max_num_images must be at least 2");
    p.max_parallel = doc.value("max_parallel", p.max_parallel);
    p.external_renderer = doc.value("external_renderer", "");
    const json eval = doc.value("eval", json::object());
    p.eval.position_threshold = eval.value("position_threshold", p.eval.position_threshold);
    p.eval.angular_threshold = eval.value("angular_threshold", p.eval.angular_threshold);
    p.eval.limit_range_threshold = eval.value("limit_range_threshold", p.eval.limit_range_threshold);
    p.eval.limit_direction_threshold = eval.value("limit_direction_threshold", p.eval.limit_direction_threshold);
    p.eval.chamfer_samples = eval.value("chamfer_samples", p.eval.chamfer_samples);
    p.eval.validate();
    p.match_by_chamfer = eval.value("match", "name") == "chamfer";
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  } catch (const AgentError& e) {
    throw ConfigError(e.what());
  } catch (const EvalError& e) {
    throw ConfigError(e.what());
  }
  return rc;
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot read config " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_run_config(ss.str(), path.parent_path());
}

}  // namespace artkit
