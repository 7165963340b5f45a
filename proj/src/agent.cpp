#include "artkit/agent.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include "artkit/base64.hpp"
#include "httplib.h"
#include "json.hpp"

namespace artkit {

using nlohmann::json;

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw AgentError("cannot read " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

json request_json(const AgentRequest& request) {
  json msgs = json::array();
  for (const auto& m : request.messages) {
    json images = json::array();
    for (const auto& img : m.images) images.push_back({{"media_type", img.media_type}, {"data", img.base64}});
    msgs.push_back({{"role", m.role}, {"text", m.text}, {"images", images}});
  }
  return {{"agent", request.agent}, {"messages", msgs}};
}

AgentRequest request_of(const json& doc) {
  AgentRequest r;
  r.agent = doc.at("agent").get<std::string>();
  for (const auto& m : doc.at("messages")) {
    Message msg{m.at("role").get<std::string>(), m.at("text").get<std::string>(), {}};
    for (const auto& img : m.value("images", json::array())) {
      msg.images.push_back({img.at("media_type").get<std::string>(), img.at("data").get<std::string>()});
    }
    r.messages.push_back(std::move(msg));
  }
  return r;
}

}  // namespace

ImageData image_from_bytes(const std::string& bytes, std::string media_type) {
  return {std::move(media_type), base64_encode(bytes)};
}

ImageData image_from_file(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  std::string type = "application/octet-stream";
  if (ext == ".png") type = "image/png";
  else if (ext == ".jpg" || ext == ".jpeg") type = "image/jpeg";
  else if (ext == ".webp") type = "image/webp";
  return image_from_bytes(read_file(path), type);
}

std::string request_to_json(const AgentRequest& request) { return request_json(request).dump(); }

AgentRequest request_from_json(std::string_view text) {
  try {
    return request_of(json::parse(text));
  } catch (const json::exception& e) {
    throw AgentError(std::string("malformed agent request: ") + e.what());
  }
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xf];
  return s;
}

std::string request_hash(const AgentRequest& request) { return hex64(fnv1a64(request_to_json(request))); }

// ---- scripted ----

std::shared_ptr<ScriptedAgent> ScriptedAgent::from_json(std::string_view text) {
  auto agent = std::make_shared<ScriptedAgent>();
  try {
    const json doc = json::parse(text);
    const json responses = doc.value("responses", json::object());
    const json defaults = doc.value("defaults", json::object());
    const json by_hash = doc.value("by_hash", json::object());
    for (const auto& [role, list] : responses.items()) {
      for (const auto& r : list) agent->push(role, r.get<std::string>());
    }
    for (const auto& [role, r] : defaults.items()) {
      agent->set_default(role, r.get<std::string>());
    }
    for (const auto& r : doc.value("rules", json::array())) {
      agent->add_rule({r.value("role", ""), r.at("contains").get<std::string>(), r.at("response").get<std::string>()});
    }
    for (const auto& [hash, r] : by_hash.items()) agent->add_hash(hash, r.get<std::string>());
  } catch (const json::exception& e) {
    throw AgentError(std::string("malformed agent script: ") + e.what());
  }
  return agent;
}

std::shared_ptr<ScriptedAgent> ScriptedAgent::load(const std::filesystem::path& path) { return from_json(read_file(path)); }

void ScriptedAgent::push(const std::string& role, std::string response) {
  std::lock_guard lock(mutex_);
  queues_[role].push_back(std::move(response));
}

void ScriptedAgent::set_default(const std::string& role, std::string response) {
  std::lock_guard lock(mutex_);
  defaults_[role] = std::move(response);
}

void ScriptedAgent::add_rule(Rule rule) {
  std::lock_guard lock(mutex_);
  rules_.push_back(std::move(rule));
}

void ScriptedAgent::add_hash(std::string hash, std::string response) {
  std::lock_guard lock(mutex_);
  by_hash_[std::move(hash)] = std::move(response);
}

AgentResponse ScriptedAgent::complete(const AgentRequest& request) {
  std::lock_guard lock(mutex_);
  history_.push_back(request);
  if (!by_hash_.empty()) {
    if (auto it = by_hash_.find(request_hash(request)); it != by_hash_.end()) return {it->second};
  }
  if (!rules_.empty()) {
    std::string all_text;
    for (const auto& m : request.messages) all_text += m.text + "\n";
    for (const auto& r : rules_) {
      if ((r.role.empty() || r.role == request.agent) && all_text.find(r.contains) != std::string::npos) {
        return {r.response};
      }
    }
  }
  if (auto q = queues_.find(request.agent); q != queues_.end()) {
    std::size_t& i = cursor_[request.agent];
    if (i < q->second.size()) return {q->second[i++]};
  }
  if (auto d = defaults_.find(request.agent); d != defaults_.end()) return {d->second};
  throw AgentError("agent script has no response left for role '" + request.agent + "'");
}

std::vector<AgentRequest> ScriptedAgent::history() const {
  std::lock_guard lock(mutex_);
  return history_;
}

// ---- record / replay ----

AgentResponse RecordingAgent::complete(const AgentRequest& request) {
  AgentResponse r = inner_->complete(request);
  std::lock_guard lock(mutex_);
  entries_.emplace_back(request, r.text);
  return r;
}

std::string RecordingAgent::transcript_json() const {
  std::lock_guard lock(mutex_);
  json entries = json::array();
  for (const auto& [req, text] : entries_) {
    entries.push_back({{"hash", request_hash(req)}, {"request", request_json(req)}, {"response", text}});
  }
  return json{{"schema", "artkit.transcript/1"}, {"entries", entries}}.dump(2) + "\n";
}

void RecordingAgent::save(const std::filesystem::path& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw AgentError("cannot write " + path.string());
  f << transcript_json();
}

std::shared_ptr<ReplayAgent> ReplayAgent::from_json(std::string_view transcript) {
  auto agent = std::make_shared<ReplayAgent>();
  try {
    const json doc = json::parse(transcript);
    for (const auto& e : doc.at("entries")) {
      // Recompute the hash so hand-edited transcripts stay consistent.
      const std::string hash =
          e.contains("request") ? request_hash(request_of(e.at("request"))) : e.at("hash").get<std::string>();
      agent->responses_[hash].push_back(e.at("response").get<std::string>());
    }
  } catch (const json::exception& e) {
    throw AgentError(std::string("malformed transcript: ") + e.what());
  }
  return agent;
}

std::shared_ptr<ReplayAgent> ReplayAgent::load(const std::filesystem::path& path) { return from_json(read_file(path)); }

AgentResponse ReplayAgent::complete(const AgentRequest& request) {
  const std::string hash = request_hash(request);
  std::lock_guard lock(mutex_);
  auto it = responses_.find(hash);
  if (it == responses_.end()) {
    throw AgentError("transcript has no response for " + request.agent + " request " + hash);
  }
  // Identical requests replay their recorded responses in order, then repeat the last.
  std::size_t& i = cursor_[hash];
  const std::string& text = it->second[std::min(i, it->second.size() - 1)];
  ++i;
  return {text};
}

AgentResponse RoutingAgent::complete(const AgentRequest& request) {
  if (auto it = routes_.find(request.agent); it != routes_.end()) return it->second->complete(request);
  if (!fallback_) throw AgentError("no agent configured for role '" + request.agent + "'");
  return fallback_->complete(request);
}

// ---- http ----

void AgentEndpoint::validate() const {
  if (base_url.empty()) throw AgentError("endpoint base_url is empty");
  if (!(timeout_s > 0)) throw AgentError("endpoint timeout must be positive");
  if (max_retries < 0) throw AgentError("endpoint max_retries must be non-negative");
}

namespace {

httplib::Result post_with_retries(const AgentEndpoint& ep, const std::string& path, const std::string& body) {
  httplib::Client client(ep.base_url);
  const auto secs = static_cast<time_t>(ep.timeout_s);
  const auto usecs = static_cast<time_t>((ep.timeout_s - static_cast<double>(secs)) * 1e6);
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);
  httplib::Headers headers;
  if (!ep.api_key_env.empty()) {
    const char* key = std::getenv(ep.api_key_env.c_str());
    if (key == nullptr) throw AgentError("environment variable " + ep.api_key_env + " is not set");
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }
  std::string last_error;
  for (int attempt = 0; attempt <= ep.max_retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(100 << std::min(attempt, 6)));
    auto res = client.Post(path, headers, body, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) throw AgentError("endpoint returned HTTP " + std::to_string(res->status), res->body);
    return res;
  }
  throw AgentError("endpoint " + ep.base_url + path + " failed after " + std::to_string(ep.max_retries + 1) +
                   " attempts: " + last_error);
}

}  // namespace

HttpAgent::HttpAgent(AgentEndpoint endpoint) : endpoint_(std::move(endpoint)) { endpoint_.validate(); }

AgentResponse HttpAgent::complete(const AgentRequest& request) {
  json msgs = json::array();
  for (const auto& m : request.messages) {
    json content = json::array();
    content.push_back({{"type", "text"}, {"text", m.text}});
    for (const auto& img : m.images) {
      content.push_back({{"type", "image"}, {"media_type", img.media_type}, {"data", img.base64}});
    }
    msgs.push_back({{"role", m.role}, {"content", content}});
  }
  const json body{{"model", endpoint_.model}, {"agent", request.agent}, {"messages", msgs}};
  auto res = post_with_retries(endpoint_, endpoint_.path, body.dump());
  try {
    const json doc = json::parse(res->body);
    if (doc.contains("text")) return {doc.at("text").get<std::string>()};
    return {doc.at("choices").at(0).at("message").at("content").get<std::string>()};
  } catch (const json::exception& e) {
    throw AgentError(std::string("unexpected endpoint response: ") + e.what(), res->body);
  }
}

Embedder http_embedder(AgentEndpoint endpoint) {
  endpoint.validate();
  if (endpoint.path == "/v1/chat") endpoint.path = "/v1/embed";
  return [endpoint](const std::string& text) {
    auto res = post_with_retries(endpoint, endpoint.path, json{{"model", endpoint.model}, {"input", text}}.dump());
    try {
      return json::parse(res->body).at("embedding").get<std::vector<float>>();
    } catch (const json::exception& e) {
      throw AgentError(std::string("unexpected embedding response: ") + e.what(), res->body);
    }
  };
}

// ---- embedding cache ----

EmbeddingCache EmbeddingCache::from_json(std::string_view text) {
  EmbeddingCache cache;
  try {
    const json doc = json::parse(text);
    if (doc.value("schema", "") != "artkit.embedding_cache/1") throw AgentError("unsupported embedding cache schema");
    for (const auto& [key, blob] : doc.at("entries").items()) cache.entries_[key] = decode_f32le(blob.get<std::string>());
  } catch (const json::exception& e) {
    throw AgentError(std::string("malformed embedding cache: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw AgentError(std::string("malformed embedding cache: ") + e.what());
  }
  return cache;
}

EmbeddingCache EmbeddingCache::load(const std::filesystem::path& path) { return from_json(read_file(path)); }

std::string EmbeddingCache::to_json() const {
  json entries = json::object();
  for (const auto& [k, v] : entries_) entries[k] = encode_f32le(v);
  return json{{"schema", "artkit.embedding_cache/1"}, {"entries", entries}}.dump(2) + "\n";
}

std::optional<std::vector<float>> EmbeddingCache::find(const std::string& key) const {
  if (auto it = entries_.find(key); it != entries_.end()) return it->second;
  return std::nullopt;
}

Embedder EmbeddingCache::embedder(Embedder fallback) const {
  return [entries = entries_, fallback](const std::string& key) {
    if (auto it = entries.find(key); it != entries.end()) return it->second;
    if (fallback) return fallback(key);
    throw AgentError("no cached embedding for '" + key + "'");
  };
}

std::string image_query_key(const std::string& bytes) { return "image:" + hex64(fnv1a64(bytes)); }

}  // namespace artkit
