#include "saver/generation.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <sstream>

#include "saver/json_io.hpp"
#include "saver/rng.hpp"
#include "saver/text.hpp"

namespace saver {

namespace {

struct GroupParse {
  std::string name;
  std::string payload;
  size_t end = 0;  // position after ')'
};

std::optional<GroupParse> try_parse_group(const std::string& line, size_t pos) {
  if (pos >= line.size() || line[pos] != '(') return std::nullopt;
  size_t close = line.find(')', pos);
  if (close == std::string::npos) return std::nullopt;
  std::string inner = line.substr(pos + 1, close - pos - 1);
  size_t colon = inner.find(':');
  if (colon == std::string::npos) return std::nullopt;
  std::string name = to_lower(trim(inner.substr(0, colon)));
  if (name != "premises" && name != "evidence" && name != "scope") return std::nullopt;
  return GroupParse{name, trim(inner.substr(colon + 1)), close + 1};
}

std::optional<std::set<int>> parse_int_set(const std::string& payload) {
  std::set<int> out;
  if (trim(payload).empty()) return out;
  for (const auto& item : split(payload, ',')) {
    auto v = parse_int(item);
    if (!v) return std::nullopt;
    out.insert(*v);
  }
  return out;
}

std::optional<std::set<EvidenceRef>> parse_evidence_set(const std::string& payload) {
  std::set<EvidenceRef> out;
  if (trim(payload).empty()) return out;
  for (const auto& item : split(payload, ',')) {
    std::string t = trim(item);
    size_t colon = t.rfind(':');
    if (colon == std::string::npos || colon == 0) return std::nullopt;
    auto sent = parse_int(t.substr(colon + 1));
    if (!sent) return std::nullopt;
    out.insert({trim(t.substr(0, colon)), *sent});
  }
  return out;
}

std::string replace_all(std::string text, const std::string& needle, const std::string& value) {
  size_t pos = 0;
  while ((pos = text.find(needle, pos)) != std::string::npos) {
    text.replace(pos, needle.size(), value);
    pos += value.size();
  }
  return text;
}

}  // namespace

ParseResult parse_structured(const std::string& text) {
  Trajectory trajectory;
  std::optional<std::string> claim;
  std::istringstream in(text);
  std::string raw_line;
  int lineno = 0;
  while (std::getline(in, raw_line)) {
    ++lineno;
    std::string line = trim(raw_line);
    if (line.empty()) continue;
    if (starts_with_ci(line, "ANSWER:")) {
      claim = trim(line.substr(7));
      break;
    }
    if (line[0] != '[') continue;  // model chatter
    size_t close = line.find(']');
    if (close == std::string::npos) continue;
    auto index = parse_int(line.substr(1, close - 1));
    if (!index) continue;

    size_t pos = close + 1;
    while (pos < line.size() && line[pos] == ' ') ++pos;
    size_t kind_end = pos;
    while (kind_end < line.size() && line[kind_end] != ' ' && line[kind_end] != '(') ++kind_end;
    auto kind = step_kind_from_string(line.substr(pos, kind_end - pos));
    if (!kind) {
      return ParseFault{lineno, "unparseable step kind '" + line.substr(pos, kind_end - pos) + "'"};
    }

    ReasoningStep step;
    step.index = *index;
    step.kind = *kind;
    pos = kind_end;
    while (true) {
      while (pos < line.size() && line[pos] == ' ') ++pos;
      auto group = try_parse_group(line, pos);
      if (!group) break;
      if (group->name == "premises") {
        auto refs = parse_int_set(group->payload);
        if (!refs) return ParseFault{lineno, "malformed premises group"};
        step.premise_refs = std::move(*refs);
      } else if (group->name == "evidence") {
        auto refs = parse_evidence_set(group->payload);
        if (!refs) return ParseFault{lineno, "malformed evidence group"};
        step.evidence_refs = std::move(*refs);
      } else {
        auto refs = parse_int_set(group->payload);
        if (!refs) return ParseFault{lineno, "malformed scope group"};
        step.assumption_scope = std::move(*refs);
      }
      pos = group->end;
    }
    step.text = trim(line.substr(std::min(pos, line.size())));
    trajectory.steps.push_back(std::move(step));
  }
  if (!claim) return ParseFault{lineno, "no ANSWER line"};
  if (trajectory.steps.empty()) return ParseFault{lineno, "zero steps before ANSWER"};
  return ParsedBelief{std::move(trajectory), std::move(*claim)};
}

std::string render_structured(const Trajectory& trajectory, const std::string& claim) {
  std::ostringstream out;
  for (const auto& step : trajectory.steps) {
    out << '[' << step.index << "] ";
    std::string kind(to_string(step.kind));
    std::transform(kind.begin(), kind.end(), kind.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    out << kind;
    if (!step.premise_refs.empty()) {
      out << " (premises:";
      bool first = true;
      for (int p : step.premise_refs) {
        out << (first ? " " : ", ") << p;
        first = false;
      }
      out << ')';
    }
    if (!step.evidence_refs.empty()) {
      out << " (evidence:";
      bool first = true;
      for (const auto& e : step.evidence_refs) {
        out << (first ? " " : ", ") << e.doc << ':' << e.sent;
        first = false;
      }
      out << ')';
    }
    if (!step.assumption_scope.empty()) {
      out << " (scope:";
      bool first = true;
      for (int s : step.assumption_scope) {
        out << (first ? " " : ", ") << s;
        first = false;
      }
      out << ')';
    }
    out << ' ' << step.text << '\n';
  }
  out << "ANSWER: " << claim << '\n';
  return out.str();
}

std::vector<Persona> build_coalition(const RunConfig& config) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(config.persona_dir)) {
    throw ConfigError("persona directory not found: " + config.persona_dir);
  }
  std::string contract;
  {
    fs::path contract_path = fs::path(config.prompts_dir) / "step_format.txt";
    if (!fs::exists(contract_path)) {
      throw ConfigError("missing prompt template: " + contract_path.string());
    }
    contract = read_text_file(contract_path.string());
  }

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(config.persona_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    throw ConfigError("persona directory has no .txt templates: " + config.persona_dir);
  }

  std::vector<Persona> coalition;
  for (const auto& file : files) {
    Persona persona;
    persona.id = file.stem().string();
    persona.step_format_contract = contract;
    std::string content = read_text_file(file.string());
    // Optional `# bias: <label>` header on the first line.
    persona.bias_label = persona.id;
    size_t nl = content.find('\n');
    std::string first = trim(content.substr(0, nl));
    if (starts_with_ci(first, "# bias:")) {
      persona.bias_label = trim(first.substr(7));
      content = nl == std::string::npos ? std::string{} : content.substr(nl + 1);
    }
    persona.instruction_template = trim(content);
    coalition.push_back(std::move(persona));
  }

  for (size_t i = 0; i < coalition.size(); ++i) {
    for (size_t j = i + 1; j < coalition.size(); ++j) {
      if (coalition[i].id == coalition[j].id) {
        throw ConfigError("duplicate persona id: " + coalition[i].id);
      }
      if (coalition[i].bias_label == coalition[j].bias_label) {
        throw ConfigError("duplicate persona bias label: " + coalition[i].bias_label);
      }
    }
  }
  return coalition;
}

std::string render_contexts(const Task& task) {
  std::ostringstream out;
  if (task.contexts.empty()) {
    out << "(no context documents)";
    return out.str();
  }
  for (const auto& doc : task.contexts) {
    out << '[' << doc.doc_id << "] " << doc.title << '\n';
    for (size_t i = 0; i < doc.sentences.size(); ++i) {
      out << "  (" << i << ") " << doc.sentences[i] << '\n';
    }
  }
  return out.str();
}

GenRequest build_persona_request(const Task& task, const Persona& persona,
                                 const RunConfig& config, std::uint64_t run_seed) {
  GenRequest req;
  req.system_prompt = persona.step_format_contract;
  std::string body = replace_all(persona.instruction_template, "{question}", task.question);
  body = replace_all(body, "{contexts}", render_contexts(task));
  req.user_prompt = body;
  req.temperature = config.temperature;
  req.max_tokens = config.max_tokens;
  req.seed = static_cast<std::int64_t>(derive_seed(run_seed, task.id + "/" + persona.id));
  return req;
}

namespace {

Belief degraded_belief(const Persona& persona, const std::string& raw_text) {
  Belief belief;
  belief.persona_id = persona.id;
  std::string text = trim(raw_text);
  if (text.empty()) text = "unknown";
  belief.claim = text;
  ReasoningStep step;
  step.index = 1;
  step.kind = StepKind::Claim;
  step.text = text;
  belief.trajectory.steps.push_back(std::move(step));
  belief.degraded = true;
  return belief;
}

GenRequest build_reprompt(const GenRequest& original, const ParseFault& fault,
                          const RunConfig& config) {
  GenRequest retry = original;
  std::string message = "line " + std::to_string(fault.line) + ": " + fault.message;
  retry.user_prompt += "\n\nFORMAT ERROR (" + message +
                       "). Respond again using exactly the step format, ending with an ANSWER: "
                       "line.";
  if (retry.seed) retry.seed = static_cast<std::int64_t>(
      derive_seed(static_cast<std::uint64_t>(*retry.seed), "retry"));
  (void)config;
  return retry;
}

Belief belief_from_parse(const Persona& persona, ParsedBelief parsed) {
  Belief belief;
  belief.persona_id = persona.id;
  belief.claim = parsed.claim.empty() ? "unknown" : parsed.claim;
  belief.trajectory = std::move(parsed.trajectory);
  belief.degraded = false;
  return belief;
}

}  // namespace

Belief generate_belief(const Task& task, const Persona& persona, TextBackend& backend,
                       const RunConfig& config, std::uint64_t run_seed,
                       std::vector<ParseFault>* faults_out) {
  GenRequest req = build_persona_request(task, persona, config, run_seed);
  GenResponse resp = backend.generate(req);
  ParseResult parsed = parse_structured(resp.text);
  if (auto* ok = std::get_if<ParsedBelief>(&parsed)) {
    return belief_from_parse(persona, std::move(*ok));
  }
  ParseFault fault = std::get<ParseFault>(parsed);
  if (faults_out) faults_out->push_back(fault);

  GenRequest retry = build_reprompt(req, fault, config);
  GenResponse retry_resp = backend.generate(retry);
  ParseResult reparsed = parse_structured(retry_resp.text);
  if (auto* ok = std::get_if<ParsedBelief>(&reparsed)) {
    return belief_from_parse(persona, std::move(*ok));
  }
  if (faults_out) faults_out->push_back(std::get<ParseFault>(reparsed));
  return degraded_belief(persona, retry_resp.text);
}

CandidateSet generate_candidates(const Task& task, const std::vector<Persona>& coalition,
                                 TextBackend& backend, const RunConfig& config,
                                 std::uint64_t run_seed) {
  CandidateSet out;
  out.task_id = task.id;
  out.parse_faults.resize(coalition.size());

  std::vector<GenRequest> requests;
  requests.reserve(coalition.size());
  for (const auto& persona : coalition) {
    requests.push_back(build_persona_request(task, persona, config, run_seed));
  }
  std::vector<GenOutcome> outcomes = generate_batch(backend, requests, config.parallelism);

  for (size_t i = 0; i < coalition.size(); ++i) {
    const Persona& persona = coalition[i];
    if (!outcomes[i].ok()) {
      out.parse_faults[i].push_back({0, "backend error: " + outcomes[i].error});
      out.beliefs.push_back(degraded_belief(persona, ""));
      continue;
    }
    ParseResult parsed = parse_structured(outcomes[i].response->text);
    if (auto* ok = std::get_if<ParsedBelief>(&parsed)) {
      out.beliefs.push_back(belief_from_parse(persona, std::move(*ok)));
      continue;
    }
    ParseFault fault = std::get<ParseFault>(parsed);
    out.parse_faults[i].push_back(fault);
    try {
      GenRequest retry = build_reprompt(requests[i], fault, config);
      GenResponse retry_resp = backend.generate(retry);
      ParseResult reparsed = parse_structured(retry_resp.text);
      if (auto* ok = std::get_if<ParsedBelief>(&reparsed)) {
        out.beliefs.push_back(belief_from_parse(persona, std::move(*ok)));
      } else {
        out.parse_faults[i].push_back(std::get<ParseFault>(reparsed));
        out.beliefs.push_back(degraded_belief(persona, retry_resp.text));
      }
    } catch (const BackendError& e) {
      out.parse_faults[i].push_back({0, std::string("backend error on retry: ") + e.what()});
      out.beliefs.push_back(degraded_belief(persona, ""));
    }
  }
  return out;
}

}  // namespace saver
