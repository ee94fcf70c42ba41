#include "saver/backend.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "saver/text.hpp"

namespace saver {

std::string request_fingerprint(const GenRequest& req) {
  std::uint64_t h = fnv1a64(req.system_prompt);
  h = fnv1a64_mix(h, "\x1f");
  h = fnv1a64_mix(h, req.user_prompt);
  h = fnv1a64_mix(h, "\x1f");
  h = fnv1a64_mix(h, req.seed ? std::to_string(*req.seed) : std::string("none"));
  return to_hex(h);
}

void ScriptedFixture::add(const GenRequest& req, std::string response_text) {
  responses[request_fingerprint(req)] = std::move(response_text);
}

ScriptedFixture load_fixture_file(const std::string& path, FixturePolicy fallback) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open fixture file: " + path);
  ScriptedFixture fixture;
  fixture.fallback = fallback;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto j = nlohmann::json::parse(line);
    fixture.responses[j.at("fingerprint").get<std::string>()] =
        j.at("response").get<std::string>();
  }
  return fixture;
}

void save_fixture_file(const std::string& path, const ScriptedFixture& fixture) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write fixture file: " + path);
  for (const auto& [fp, text] : fixture.responses) {
    nlohmann::ordered_json j{{"fingerprint", fp}, {"response", text}};
    out << j.dump() << "\n";
  }
}

namespace {

int count_tokens(const std::string& s) {
  int n = 0;
  bool in_tok = false;
  for (char c : s) {
    bool ws = c == ' ' || c == '\t' || c == '\n' || c == '\r';
    if (!ws && !in_tok) ++n;
    in_tok = !ws;
  }
  return n;
}

}  // namespace

GenResponse MockBackend::generate(const GenRequest& req) {
  const std::string fp = request_fingerprint(req);
  auto it = fixture_.responses.find(fp);
  std::string text;
  if (it != fixture_.responses.end()) {
    text = it->second;
  } else if (fixture_.fallback == FixturePolicy::Echo) {
    text = req.user_prompt;
  } else {
    throw FixtureMiss("no fixture for request fingerprint " + fp);
  }
  GenResponse resp;
  resp.text = std::move(text);
  resp.backend_id = "mock";
  resp.latency_ms = 0;
  resp.prompt_tokens = count_tokens(req.system_prompt) + count_tokens(req.user_prompt);
  resp.completion_tokens = count_tokens(resp.text);
  return resp;
}

HttpBackendOptions http_options_from_env(HttpBackendOptions base) {
  if (base.api_base.empty()) {
    if (const char* v = std::getenv("SAVER_API_BASE")) base.api_base = v;
  }
  if (base.api_key.empty()) {
    if (const char* v = std::getenv("SAVER_API_KEY")) base.api_key = v;
  }
  return base;
}

HttpBackend::HttpBackend(HttpBackendOptions options) : options_(std::move(options)) {
  if (options_.api_base.empty()) {
    throw BackendError("http backend requires an API base (flag or SAVER_API_BASE)");
  }
  // Split "scheme://host[:port]/path" into origin and path prefix.
  std::string base = options_.api_base;
  size_t scheme_end = base.find("://");
  size_t path_start =
      scheme_end == std::string::npos ? base.find('/') : base.find('/', scheme_end + 3);
  if (path_start == std::string::npos) {
    host_ = base;
    path_prefix_.clear();
  } else {
    host_ = base.substr(0, path_start);
    path_prefix_ = base.substr(path_start);
    while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
  }
}

GenResponse HttpBackend::generate(const GenRequest& req) {
  nlohmann::ordered_json body{
      {"model", options_.model},
      {"messages",
       {{{"role", "system"}, {"content", req.system_prompt}},
        {{"role", "user"}, {"content", req.user_prompt}}}},
      {"temperature", req.temperature},
      {"max_tokens", req.max_tokens}};
  if (req.seed) body["seed"] = *req.seed;
  const std::string payload = body.dump();
  const std::string path = path_prefix_ + "/chat/completions";

  std::string last_error;
  for (int attempt = 0; attempt <= options_.retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(
          std::chrono::milliseconds(options_.backoff_base_ms << (attempt - 1)));
    }
    httplib::Client client(host_);
    client.set_connection_timeout(options_.timeout_seconds, 0);
    client.set_read_timeout(options_.timeout_seconds, 0);
    httplib::Headers headers;
    if (!options_.api_key.empty()) {
      headers.emplace("Authorization", "Bearer " + options_.api_key);
    }
    auto start = std::chrono::steady_clock::now();
    auto result = client.Post(path, headers, payload, "application/json");
    auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - start)
                       .count();
    if (!result) {
      last_error = "transport error: " + httplib::to_string(result.error());
      continue;  // timeouts and connection failures are retryable
    }
    if (result->status == 429 || result->status >= 500) {
      last_error = "http status " + std::to_string(result->status);
      continue;
    }
    if (result->status != 200) {
      throw BackendError("http status " + std::to_string(result->status) + ": " + result->body);
    }
    try {
      auto j = nlohmann::json::parse(result->body);
      GenResponse resp;
      resp.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
      resp.backend_id = id();
      resp.latency_ms = elapsed;
      if (j.contains("usage")) {
        resp.prompt_tokens = j["usage"].value("prompt_tokens", 0);
        resp.completion_tokens = j["usage"].value("completion_tokens", 0);
      }
      return resp;
    } catch (const nlohmann::json::exception& e) {
      throw BackendError(std::string("malformed completion response: ") + e.what());
    }
  }
  throw BackendUnavailable("retries exhausted: " + last_error);
}

std::vector<GenOutcome> generate_batch(TextBackend& backend,
                                       const std::vector<GenRequest>& requests,
                                       int parallelism) {
  if (parallelism < 1) throw std::invalid_argument("parallelism must be >= 1");
  std::vector<GenOutcome> outcomes(requests.size());
  if (requests.empty()) return outcomes;

  std::atomic<size_t> next{0};
  auto worker = [&]() {
    while (true) {
      size_t i = next.fetch_add(1);
      if (i >= requests.size()) return;
      try {
        outcomes[i].response = backend.generate(requests[i]);
      } catch (const std::exception& e) {
        outcomes[i].error = e.what();
      }
    }
  };

  size_t n_workers = std::min<size_t>(static_cast<size_t>(parallelism), requests.size());
  if (n_workers <= 1) {
    worker();
    return outcomes;
  }
  std::vector<std::thread> threads;
  threads.reserve(n_workers);
  for (size_t w = 0; w < n_workers; ++w) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  return outcomes;
}

}  // namespace saver
