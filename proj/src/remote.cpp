#include <httplib.h>

#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <thread>

#include "jabber/evalharness.hpp"
#include "jabber/util.hpp"

namespace jabber {

std::string_view to_string(RemoteErrorKind kind) {
  switch (kind) {
    case RemoteErrorKind::Auth: return "auth";
    case RemoteErrorKind::Timeout: return "timeout";
    case RemoteErrorKind::Malformed: return "malformed";
    case RemoteErrorKind::Transient: return "transient";
    case RemoteErrorKind::Config: return "config";
  }
  return "unknown";
}

const nlohmann::json* json_at_path(const nlohmann::json& root,
                                   std::string_view path) {
  const nlohmann::json* node = &root;
  std::size_t start = 0;
  while (start <= path.size()) {
    const std::size_t dot = path.find('.', start);
    const std::string_view part =
        path.substr(start, dot == std::string_view::npos ? path.size() - start
                                                         : dot - start);
    if (part.empty()) return nullptr;
    const bool numeric =
        std::all_of(part.begin(), part.end(), [](char c) { return c >= '0' && c <= '9'; });
    if (numeric && node->is_array()) {
      const std::size_t idx = std::stoul(std::string(part));
      if (idx >= node->size()) return nullptr;
      node = &(*node)[idx];
    } else if (node->is_object()) {
      auto it = node->find(std::string(part));
      if (it == node->end()) return nullptr;
      node = &*it;
    } else {
      return nullptr;
    }
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  return node;
}

void json_set_path(nlohmann::json& root, std::string_view path,
                   nlohmann::json value) {
  nlohmann::json* node = &root;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = path.find('.', start);
    const std::string part(
        path.substr(start, dot == std::string_view::npos ? path.size() - start
                                                         : dot - start));
    if (part.empty()) throw ConfigError("empty segment in JSON path: " + std::string(path));
    const bool numeric =
        std::all_of(part.begin(), part.end(), [](char c) { return c >= '0' && c <= '9'; });
    const bool last = dot == std::string_view::npos;
    if (numeric) {
      const std::size_t idx = std::stoul(part);
      if (!node->is_array()) *node = nlohmann::json::array();
      while (node->size() <= idx) node->push_back(nullptr);
      node = &(*node)[idx];
    } else {
      if (!node->is_object()) *node = nlohmann::json::object();
      node = &(*node)[part];
    }
    if (last) {
      *node = std::move(value);
      return;
    }
    start = dot + 1;
  }
}

EndpointConfig EndpointConfig::from_json(const nlohmann::json& j) {
  EndpointConfig c;
  auto str = [&](const char* key, std::string& into) {
    if (j.contains(key)) {
      if (!j[key].is_string()) throw ConfigError(std::string("endpoint field must be a string: ") + key);
      into = j[key].get<std::string>();
    }
  };
  str("provider", c.provider);
  str("url", c.url);
  str("model", c.model);
  str("api_key_env", c.api_key_env);
  str("prompt_path", c.prompt_path);
  str("model_path", c.model_path);
  str("response_path", c.response_path);
  str("script_path", c.script_path);
  if (j.contains("request_body")) c.request_body = j["request_body"];
  if (j.contains("max_attempts")) c.max_attempts = j["max_attempts"].get<int>();
  if (j.contains("retry_base_ms")) c.retry_base_ms = j["retry_base_ms"].get<int>();
  if (j.contains("timeout_seconds")) c.timeout_seconds = j["timeout_seconds"].get<int>();
  if (j.contains("embedding_dim")) c.embedding_dim = j["embedding_dim"].get<std::size_t>();
  if (c.max_attempts < 1) throw ConfigError("max_attempts must be at least 1");
  return c;
}

Endpoints Endpoints::load(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("cannot parse endpoint config " + path + ": " + e.what());
  }
  Endpoints eps;
  if (j.contains("chat")) eps.chat = EndpointConfig::from_json(j["chat"]);
  if (j.contains("embedding")) eps.embedding = EndpointConfig::from_json(j["embedding"]);
  return eps;
}

namespace {

// Splits "https://host:port/some/path" into client base and path.
void split_url(const std::string& url, std::string& base, std::string& path) {
  const std::size_t scheme = url.find("://");
  if (scheme == std::string::npos)
    throw ConfigError("endpoint url must include a scheme: " + url);
  const std::size_t slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) {
    base = url;
    path = "/";
  } else {
    base = url.substr(0, slash);
    path = url.substr(slash);
  }
}

std::string resolve_api_key(const EndpointConfig& config) {
  if (config.api_key_env.empty()) return "";
  const char* value = std::getenv(config.api_key_env.c_str());
  if (value == nullptr || *value == '\0')
    throw ConfigError("credential environment variable is not set: " +
                      config.api_key_env);
  return value;
}

// One HTTP round trip shared by chat and embedding: substitute the
// prompt into the request body, post it, and extract the response path.
class HttpJsonEndpoint {
public:
  HttpJsonEndpoint(const EndpointConfig& config, LogFn log)
      : config_(config), log_(std::move(log)), api_key_(resolve_api_key(config)) {
    split_url(config.url, base_, path_);
  }

  nlohmann::json call(const std::string& prompt_value) {
    int attempt = 0;
    while (true) {
      ++attempt;
      try {
        return call_once(prompt_value);
      } catch (const RemoteFailure& e) {
        const bool retryable = e.kind() == RemoteErrorKind::Transient ||
                               e.kind() == RemoteErrorKind::Timeout;
        if (!retryable || attempt >= config_.max_attempts) throw;
        const auto wait =
            std::chrono::milliseconds(config_.retry_base_ms << (attempt - 1));
        log("retry " + std::to_string(attempt) + " after " + e.what());
        std::this_thread::sleep_for(wait);
      }
    }
  }

private:
  void log(const std::string& line) {
    if (log_) log_(line);
  }

  nlohmann::json call_once(const std::string& prompt_value) {
    nlohmann::json body = config_.request_body.is_null()
                              ? nlohmann::json::object()
                              : config_.request_body;
    if (!config_.model_path.empty() && !config_.model.empty())
      json_set_path(body, config_.model_path, config_.model);
    json_set_path(body, config_.prompt_path, prompt_value);

    httplib::Client client(base_);
    client.set_connection_timeout(config_.timeout_seconds, 0);
    client.set_read_timeout(config_.timeout_seconds, 0);
    client.set_write_timeout(config_.timeout_seconds, 0);
    httplib::Headers headers;
    if (!api_key_.empty())
      headers.emplace("Authorization", "Bearer " + api_key_);

    // The key itself must never reach the log.
    log("POST " + config_.url + " auth=" +
        (api_key_.empty() ? "none" : "Bearer <redacted:" + config_.api_key_env + ">"));

    auto res = client.Post(path_, headers, body.dump(), "application/json");
    if (!res) {
      throw RemoteFailure(RemoteErrorKind::Transient,
                          "no response from " + base_ + " (" +
                              httplib::to_string(res.error()) + ")");
    }
    log("response status=" + std::to_string(res->status));
    if (res->status == 401 || res->status == 403)
      throw RemoteFailure(RemoteErrorKind::Auth,
                          "status " + std::to_string(res->status));
    if (res->status == 408)
      throw RemoteFailure(RemoteErrorKind::Timeout, "status 408");
    if (res->status == 429 || res->status >= 500)
      throw RemoteFailure(RemoteErrorKind::Transient,
                          "status " + std::to_string(res->status));
    if (res->status < 200 || res->status >= 300)
      throw RemoteFailure(RemoteErrorKind::Malformed,
                          "status " + std::to_string(res->status) + ": " + res->body);

    nlohmann::json parsed;
    try {
      parsed = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
      throw RemoteFailure(RemoteErrorKind::Malformed,
                          std::string("response is not JSON: ") + e.what());
    }
    const nlohmann::json* node = json_at_path(parsed, config_.response_path);
    if (node == nullptr)
      throw RemoteFailure(RemoteErrorKind::Malformed,
                          "response path '" + config_.response_path +
                              "' missing in reply");
    return *node;
  }

  EndpointConfig config_;
  LogFn log_;
  std::string api_key_;
  std::string base_;
  std::string path_;
};

class HttpChatService : public ChatService {
public:
  HttpChatService(const EndpointConfig& config, LogFn log)
      : endpoint_(config, std::move(log)), model_(config.model) {}

  std::string complete(const std::string& prompt) override {
    const nlohmann::json reply = endpoint_.call(prompt);
    if (!reply.is_string())
      throw RemoteFailure(RemoteErrorKind::Malformed,
                          "chat response is not a string: " + reply.dump());
    return reply.get<std::string>();
  }
  std::string model_id() const override { return model_; }

private:
  HttpJsonEndpoint endpoint_;
  std::string model_;
};

class HttpEmbeddingService : public EmbeddingService {
public:
  HttpEmbeddingService(const EndpointConfig& config, LogFn log)
      : endpoint_(config, std::move(log)), config_(config) {}

  EmbeddingVector embed(const std::string& text) override {
    if (text.empty()) throw InputError("embed: empty text");
    const nlohmann::json reply = endpoint_.call(text);
    if (!reply.is_array())
      throw RemoteFailure(RemoteErrorKind::Malformed,
                          "embedding response is not an array");
    EmbeddingVector v;
    v.model_id = config_.model;
    v.values.reserve(reply.size());
    for (const auto& x : reply) {
      if (!x.is_number())
        throw RemoteFailure(RemoteErrorKind::Malformed,
                            "embedding entry is not a number");
      v.values.push_back(x.get<double>());
    }
    if (config_.embedding_dim != 0 && v.values.size() != config_.embedding_dim)
      throw ConfigError("embedding dimension mismatch: got " +
                        std::to_string(v.values.size()) + ", config says " +
                        std::to_string(config_.embedding_dim));
    return v;
  }
  std::string model_id() const override { return config_.model; }

private:
  HttpJsonEndpoint endpoint_;
  EndpointConfig config_;
};

class EchoChatService : public ChatService {
public:
  explicit EchoChatService(std::string model)
      : model_(model.empty() ? "stub-chat" : std::move(model)) {}
  std::string complete(const std::string& prompt) override { return prompt; }
  std::string model_id() const override { return model_; }

private:
  std::string model_;
};

// Feature-hash embedding: tokenize into lowercase alphanumeric runs and
// count each into dim buckets by hash. Deterministic, local, and good
// enough for pipeline tests where only identity of texts matters.
class HashEmbeddingService : public EmbeddingService {
public:
  explicit HashEmbeddingService(const EndpointConfig& config)
      : dim_(config.embedding_dim != 0 ? config.embedding_dim : 256),
        model_(config.model.empty() ? "stub-embed" : config.model) {}

  EmbeddingVector embed(const std::string& text) override {
    if (text.empty()) throw InputError("embed: empty text");
    EmbeddingVector v;
    v.model_id = model_;
    v.values.assign(dim_, 0.0);
    std::string token;
    auto flush = [&] {
      if (token.empty()) return;
      v.values[fnv1a64(token) % dim_] += 1.0;
      token.clear();
    };
    for (char c : text) {
      if (std::isalnum(static_cast<unsigned char>(c))) {
        token.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
      } else {
        flush();
      }
    }
    flush();
    return v;
  }
  std::string model_id() const override { return model_; }

private:
  std::size_t dim_;
  std::string model_;
};

// Replays canned responses from a JSON array file, one per call.
class ScriptChatService : public ChatService {
public:
  explicit ScriptChatService(const EndpointConfig& config)
      : model_(config.model.empty() ? "script" : config.model) {
    if (config.script_path.empty())
      throw ConfigError("script provider needs script_path");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(read_file(config.script_path));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("cannot parse script file: ") + e.what());
    }
    if (!j.is_array()) throw ConfigError("script file must be a JSON array");
    for (const auto& item : j) {
      if (!item.is_string()) throw ConfigError("script entries must be strings");
      lines_.push_back(item.get<std::string>());
    }
  }

  std::string complete(const std::string&) override {
    if (next_ >= lines_.size())
      throw RemoteFailure(RemoteErrorKind::Config, "script exhausted after " +
                                                       std::to_string(next_) +
                                                       " responses");
    return lines_[next_++];
  }
  std::string model_id() const override { return model_; }

private:
  std::vector<std::string> lines_;
  std::size_t next_ = 0;
  std::string model_;
};

}  // namespace

std::unique_ptr<ChatService> make_chat_service(const EndpointConfig& config,
                                               LogFn log) {
  if (config.provider == "http") {
    if (config.url.empty()) throw ConfigError("http chat endpoint needs a url");
    return std::make_unique<HttpChatService>(config, std::move(log));
  }
  if (config.provider == "stub-echo" || config.provider == "stub-echo-original")
    return std::make_unique<EchoChatService>(config.model);
  if (config.provider == "script")
    return std::make_unique<ScriptChatService>(config);
  throw ConfigError("unknown chat provider: " + config.provider);
}

std::unique_ptr<EmbeddingService> make_embedding_service(
    const EndpointConfig& config, LogFn log) {
  if (config.provider == "http") {
    if (config.url.empty())
      throw ConfigError("http embedding endpoint needs a url");
    return std::make_unique<HttpEmbeddingService>(config, std::move(log));
  }
  if (config.provider == "stub-hash")
    return std::make_unique<HashEmbeddingService>(config);
  throw ConfigError("unknown embedding provider: " + config.provider);
}

}  // namespace jabber
