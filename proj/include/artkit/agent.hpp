#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "artkit/retrieval.hpp"

namespace artkit {

class AgentError : public std::runtime_error {
 public:
  AgentError(const std::string& what, std::string raw = {}) : std::runtime_error(what), raw_(std::move(raw)) {}
  /// Last raw agent output, kept for audit.
  const std::string& raw() const { return raw_; }

 private:
  std::string raw_;
};

struct ImageData {
  std::string media_type;  // e.g. image/png
  std::string base64;
  friend bool operator==(const ImageData&, const ImageData&) = default;
};

ImageData image_from_bytes(const std::string& bytes, std::string media_type);
ImageData image_from_file(const std::filesystem::path& path);

struct Message {
  std::string role;  // system | user | assistant
  std::string text;
  std::vector<ImageData> images;
};

/// `agent` names the pipeline role (actor_link, critic_joint, selector, ...).
struct AgentRequest {
  std::string agent;
  std::vector<Message> messages;
};

struct AgentResponse {
  std::string text;
};

std::string request_to_json(const AgentRequest& request);
AgentRequest request_from_json(std::string_view text);
/// FNV-1a 64 of the canonical request JSON, as 16 hex digits.
std::string request_hash(const AgentRequest& request);
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

class Agent {
 public:
  virtual ~Agent() = default;
  virtual AgentResponse complete(const AgentRequest& request) = 0;
};

/// Canned responses. Lookup order: exact request hash, then the first rule
/// whose role matches and whose `contains` text occurs in the request, then
/// the role's response queue, then the role's default. Script file layout is
/// documented in docs/formats.md.
class ScriptedAgent : public Agent {
 public:
  struct Rule {
    std::string role;  // empty matches any role
    std::string contains;
    std::string response;
  };

  ScriptedAgent() = default;
  static std::shared_ptr<ScriptedAgent> from_json(std::string_view text);
  static std::shared_ptr<ScriptedAgent> load(const std::filesystem::path& path);

  void push(const std::string& role, std::string response);
  void set_default(const std::string& role, std::string response);
  void add_rule(Rule rule);
  void add_hash(std::string hash, std::string response);

  AgentResponse complete(const AgentRequest& request) override;
  /// Requests seen so far, in order.
  std::vector<AgentRequest> history() const;

 private:
  mutable std::mutex mutex_;
  std::map<std::string, std::vector<std::string>> queues_;
  std::map<std::string, std::size_t> cursor_;
  std::map<std::string, std::string> defaults_;
  std::vector<Rule> rules_;
  std::map<std::string, std::string> by_hash_;
  std::vector<AgentRequest> history_;
};

/// Forwards to `inner` and keeps every exchange for later replay.
class RecordingAgent : public Agent {
 public:
  explicit RecordingAgent(std::shared_ptr<Agent> inner) : inner_(std::move(inner)) {}
  AgentResponse complete(const AgentRequest& request) override;
  std::string transcript_json() const;
  void save(const std::filesystem::path& path) const;

 private:
  std::shared_ptr<Agent> inner_;
  mutable std::mutex mutex_;
  std::vector<std::pair<AgentRequest, std::string>> entries_;
};

/// Answers from a recorded transcript by request hash. Unknown requests throw.
class ReplayAgent : public Agent {
 public:
  static std::shared_ptr<ReplayAgent> from_json(std::string_view transcript);
  static std::shared_ptr<ReplayAgent> load(const std::filesystem::path& path);
  AgentResponse complete(const AgentRequest& request) override;

 private:
  std::map<std::string, std::vector<std::string>> responses_;
  std::map<std::string, std::size_t> cursor_;
  std::mutex mutex_;
};

/// Routes each request to the agent registered for its role.
class RoutingAgent : public Agent {
 public:
  explicit RoutingAgent(std::shared_ptr<Agent> fallback) : fallback_(std::move(fallback)) {}
  void route(const std::string& role, std::shared_ptr<Agent> agent) { routes_[role] = std::move(agent); }
  AgentResponse complete(const AgentRequest& request) override;

 private:
  std::shared_ptr<Agent> fallback_;
  std::map<std::string, std::shared_ptr<Agent>> routes_;
};

struct AgentEndpoint {
  std::string base_url;  // scheme://host[:port]
  std::string path = "/v1/chat";
  std::string model;
  double timeout_s = 60.0;
  int max_retries = 2;
  std::string api_key_env;  // environment variable holding the key; may be empty

  void validate() const;
};

/// Chat-style HTTP endpoint. Sends {"model", "messages"} where each message
/// carries a content list of text and base64 image parts; accepts either
/// {"text": ...} or {"choices":[{"message":{"content": ...}}]} back. Transport
/// errors and 5xx responses are retried.
class HttpAgent : public Agent {
 public:
  explicit HttpAgent(AgentEndpoint endpoint);
  AgentResponse complete(const AgentRequest& request) override;

 private:
  AgentEndpoint endpoint_;
};

/// Text embedder over HTTP: POST {"model", "input"} -> {"embedding": [...]}.
Embedder http_embedder(AgentEndpoint endpoint);

/// Precomputed query embeddings keyed by query text. Unknown keys throw.
class EmbeddingCache {
 public:
  static EmbeddingCache load(const std::filesystem::path& path);
  static EmbeddingCache from_json(std::string_view text);
  std::string to_json() const;
  void put(const std::string& key, std::vector<float> v) { entries_[key] = std::move(v); }
  std::optional<std::vector<float>> find(const std::string& key) const;
  Embedder embedder(Embedder fallback = {}) const;

 private:
  std::map<std::string, std::vector<float>> entries_;
};

/// Cache key for an image query: "image:" + FNV-1a of the file bytes.
std::string image_query_key(const std::string& bytes);

}  // namespace artkit
