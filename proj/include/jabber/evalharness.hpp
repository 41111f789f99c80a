#pragma once

#include <nlohmann/json.hpp>

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "jabber/errors.hpp"

namespace jabber {

// ---------------------------------------------------------------------
// Prompts
// ---------------------------------------------------------------------

struct PromptTemplate {
  std::string name;
  std::string body;  // must contain exactly one {TEXT}

  static PromptTemplate load(const std::string& path);  // name = file stem
  static PromptTemplate from_string(std::string name, std::string body);
  void validate() const;  // throws ConfigError
};

std::string build_prompt(const PromptTemplate& tmpl, std::string_view text);

// ---------------------------------------------------------------------
// Embeddings and scoring
// ---------------------------------------------------------------------

struct EmbeddingVector {
  std::vector<double> values;
  std::string model_id;
};

// dot(u,v) / (|u||v|), accumulated in double and clamped to [-1, 1].
// Throws InputError on length or model mismatch and on zero-norm input.
double cosine(const EmbeddingVector& u, const EmbeddingVector& v);

// ---------------------------------------------------------------------
// Remote services
// ---------------------------------------------------------------------

enum class RemoteErrorKind { Auth, Timeout, Malformed, Transient, Config };

std::string_view to_string(RemoteErrorKind kind);

// RemoteError with a machine-readable failure kind, so records and exit
// paths can distinguish auth problems from flaky networks.
class RemoteFailure : public RemoteError {
public:
  RemoteFailure(RemoteErrorKind kind, const std::string& message)
      : RemoteError(std::string(to_string(kind)) + ": " + message), kind_(kind) {}
  RemoteErrorKind kind() const { return kind_; }

private:
  RemoteErrorKind kind_;
};

// One endpoint description from the config file. `prompt_path`,
// `model_path`, and `response_path` are dotted JSON paths (numeric parts
// index arrays), which is what lets any JSON-over-HTTP provider work
// without provider-specific code.
struct EndpointConfig {
  std::string provider = "http";  // http | stub-echo | stub-echo-original
                                  // | stub-hash | script
  std::string url;
  std::string model;
  std::string api_key_env;
  std::string prompt_path = "prompt";
  std::string model_path = "model";
  std::string response_path = "response";
  nlohmann::json request_body = nlohmann::json::object();
  int max_attempts = 3;
  int retry_base_ms = 250;
  int timeout_seconds = 60;
  std::size_t embedding_dim = 0;  // 0 = accept whatever comes back
  std::string script_path;        // provider == script

  static EndpointConfig from_json(const nlohmann::json& j);
};

struct Endpoints {
  EndpointConfig chat;
  EndpointConfig embedding;
  static Endpoints load(const std::string& path);
};

class ChatService {
public:
  virtual ~ChatService() = default;
  virtual std::string complete(const std::string& prompt) = 0;
  virtual std::string model_id() const = 0;
};

class EmbeddingService {
public:
  virtual ~EmbeddingService() = default;
  virtual EmbeddingVector embed(const std::string& text) = 0;
  virtual std::string model_id() const = 0;
};

using LogFn = std::function<void(const std::string&)>;

// Factories throw ConfigError for unknown providers or a missing
// credential variable. The log callback, when set, receives one line per
// request/response with credentials redacted.
std::unique_ptr<ChatService> make_chat_service(const EndpointConfig& config,
                                               LogFn log = {});
std::unique_ptr<EmbeddingService> make_embedding_service(
    const EndpointConfig& config, LogFn log = {});

// Dotted-path helpers shared by the HTTP client and its tests.
const nlohmann::json* json_at_path(const nlohmann::json& root,
                                   std::string_view path);
void json_set_path(nlohmann::json& root, std::string_view path,
                   nlohmann::json value);

// ---------------------------------------------------------------------
// Corpus runs
// ---------------------------------------------------------------------

struct Passage {
  std::string id;
  std::string text;
};

// Reads every regular *.txt file in a directory; passage id = file stem.
std::vector<Passage> load_corpus_dir(const std::string& dir);

struct RunRecord {
  int v = 1;
  std::string id;  // equals the cache key
  std::string passage_id;
  std::string original_text;
  std::string transformed_text;
  std::string template_name;
  std::string model_id;
  std::string translation;
  std::optional<double> similarity;
  std::uint64_t seed = 0;
  std::uint64_t passage_seed = 0;
  std::string created_at;
  std::string completed_at;
  std::size_t original_chars = 0;
  std::size_t transformed_chars = 0;
  std::string label;  // optional condition tag, drawn as a chart marker
  std::string error;  // "<kind>: message" when the passage failed

  nlohmann::json to_json() const;
  static RunRecord from_json(const nlohmann::json& j);
};

// FNV hash over (transformed_text, template_name, model_id), hex encoded.
// Keyed on content rather than passage id so edited passages re-run.
std::string cache_key(std::string_view transformed, std::string_view template_name,
                      std::string_view model_id);

// Reads a JSONL record file, skipping blank and truncated lines (a
// partial trailing line is what a crash leaves behind).
std::vector<RunRecord> load_records(const std::string& path);

using TransformFn =
    std::function<std::string(const Passage&, std::uint64_t passage_seed)>;
using TranslateFn =
    std::function<std::string(const Passage&, const std::string& prompt)>;
using EmbedFn = std::function<EmbeddingVector(const std::string& text)>;

struct RunOptions {
  PromptTemplate tmpl;
  std::string model_id;
  std::string records_path;
  std::size_t concurrency = 4;
  std::uint64_t seed = 0;
  std::string label;
  std::function<std::string()> clock;  // test hook; defaults to wall clock
};

// Transforms, prompts, translates, embeds, and scores every passage,
// appending one flushed JSONL record per passage as it completes.
// Passages whose cache key already has a scored record are skipped;
// failed ones are retried. Per-passage failures are recorded, not
// thrown. Returns all records, cached ones included.
std::vector<RunRecord> run_corpus(const std::vector<Passage>& passages,
                                  const RunOptions& options,
                                  const TransformFn& transform,
                                  const TranslateFn& translate,
                                  const EmbedFn& embed);

// ---------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------

struct SummaryRow {
  std::string condition;  // "<template>|<model>"
  int count = 0;
  double mean = 0, median = 0, min = 0, max = 0;
  std::array<int, 20> bins{};  // 20 bins over [0, 1]
  int negatives = 0;           // also folded into bins[0]
};

struct Report {
  std::vector<SummaryRow> rows;
  std::vector<std::pair<std::string, double>> markers;  // label -> mean score

  std::string to_csv() const;
  std::string to_svg() const;
};

// Throws InputError when no record carries a similarity.
Report summarize(const std::vector<RunRecord>& records);

}  // namespace jabber
