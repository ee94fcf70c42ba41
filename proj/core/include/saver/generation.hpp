#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "saver/backend.hpp"
#include "saver/config.hpp"
#include "saver/trajectory.hpp"

namespace saver {

struct Persona {
  std::string id;
  std::string bias_label;
  std::string instruction_template;  // contains {question} and {contexts}
  std::string step_format_contract;
};

struct ParseFault {
  int line = 0;  // 1-based line number, 0 when the whole text is at fault
  std::string message;
};

struct ParsedBelief {
  Trajectory trajectory;
  std::string claim;
};

using ParseResult = std::variant<ParsedBelief, ParseFault>;

// Line-oriented step contract:
//   [k] KIND (premises: 1,2) (evidence: d1:0, d2:3) (scope: 3) step text
//   ...
//   ANSWER: final claim
// The premises/evidence/scope groups are each optional. Lines that do not
// start a step or the answer are ignored as model chatter; a line that does
// start a step but names an unknown kind is a fault.
ParseResult parse_structured(const std::string& text);

// Inverse of parse_structured over the contract grammar:
// parse(render(t, c)) == (t, c) for schema-representable trajectories.
std::string render_structured(const Trajectory& trajectory, const std::string& claim);

struct CandidateSet {
  std::string task_id;
  std::vector<Belief> beliefs;
  std::vector<std::vector<ParseFault>> parse_faults;  // per belief
};

// Loads one persona per *.txt file in config.persona_dir. A file's first
// line may carry `# bias: <label>`; the rest is the instruction template.
// The persona id is the file stem. Duplicate ids or bias labels are a
// ConfigError, as is an empty directory.
std::vector<Persona> build_coalition(const RunConfig& config);

std::string render_contexts(const Task& task);
GenRequest build_persona_request(const Task& task, const Persona& persona,
                                 const RunConfig& config, std::uint64_t run_seed);

// One structured belief from one persona. On a parse fault, reprompts once
// with a format-error message; on a second fault, substitutes a single-step
// CLAIM trajectory holding the raw text, flagged degraded.
Belief generate_belief(const Task& task, const Persona& persona, TextBackend& backend,
                       const RunConfig& config, std::uint64_t run_seed,
                       std::vector<ParseFault>* faults_out = nullptr);

// Fans the M persona calls out through generate_batch. |beliefs| always
// equals the coalition size; failed slots degrade like parse failures.
CandidateSet generate_candidates(const Task& task, const std::vector<Persona>& coalition,
                                 TextBackend& backend, const RunConfig& config,
                                 std::uint64_t run_seed);

}  // namespace saver
