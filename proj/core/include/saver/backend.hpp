#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace saver {

struct GenRequest {
  std::string system_prompt;
  std::string user_prompt;
  double temperature = 0.7;
  int max_tokens = 1024;
  std::optional<std::int64_t> seed;
};

struct GenResponse {
  std::string text;  // may be empty; callers handle
  std::string backend_id;
  std::int64_t latency_ms = 0;
  int prompt_tokens = 0;
  int completion_tokens = 0;
};

class BackendError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Retries exhausted or transport-level failure.
class BackendUnavailable : public BackendError {
 public:
  using BackendError::BackendError;
};

// Mock backend with Error fallback policy and no matching fixture entry.
class FixtureMiss : public BackendError {
 public:
  using BackendError::BackendError;
};

// Content hash of (system_prompt, user_prompt, seed), hex encoded. Prompt
// edits invalidate fixtures loudly instead of silently matching.
std::string request_fingerprint(const GenRequest& req);

// Implementations must be safe for concurrent generate() calls.
class TextBackend {
 public:
  virtual ~TextBackend() = default;
  virtual GenResponse generate(const GenRequest& req) = 0;
  virtual std::string id() const = 0;
};

enum class FixturePolicy { Error, Echo };

// Deterministic scripted backend: identical request, identical response.
struct ScriptedFixture {
  std::map<std::string, std::string> responses;  // fingerprint -> text
  FixturePolicy fallback = FixturePolicy::Error;

  void add(const GenRequest& req, std::string response_text);
};

// Fixture files are JSONL lines of {"fingerprint": "...", "response": "..."}.
ScriptedFixture load_fixture_file(const std::string& path, FixturePolicy fallback);
void save_fixture_file(const std::string& path, const ScriptedFixture& fixture);

class MockBackend final : public TextBackend {
 public:
  explicit MockBackend(ScriptedFixture fixture) : fixture_(std::move(fixture)) {}

  GenResponse generate(const GenRequest& req) override;
  std::string id() const override { return "mock"; }

 private:
  ScriptedFixture fixture_;
};

struct HttpBackendOptions {
  std::string api_base;  // e.g. http://host:port/v1
  std::string api_key;
  std::string model = "default";
  int retries = 3;
  int backoff_base_ms = 500;  // 0.5s, 1s, 2s
  int timeout_seconds = 60;
};

// Resolves SAVER_API_BASE / SAVER_API_KEY from the environment for fields
// left empty in `base`.
HttpBackendOptions http_options_from_env(HttpBackendOptions base = {});

// OpenAI-compatible chat completions client. Retries 429/5xx/timeouts with
// exponential backoff, then throws BackendUnavailable.
class HttpBackend final : public TextBackend {
 public:
  explicit HttpBackend(HttpBackendOptions options);

  GenResponse generate(const GenRequest& req) override;
  std::string id() const override { return "http:" + options_.model; }

 private:
  HttpBackendOptions options_;
  std::string host_;  // scheme://host[:port]
  std::string path_prefix_;
};

struct GenOutcome {
  std::optional<GenResponse> response;
  std::string error;  // empty on success

  bool ok() const { return response.has_value(); }
};

// Runs requests with at most `parallelism` in flight. Output order always
// matches input order; a failed request fills its own slot with an error and
// never aborts the batch.
std::vector<GenOutcome> generate_batch(TextBackend& backend,
                                       const std::vector<GenRequest>& requests,
                                       int parallelism);

}  // namespace saver
