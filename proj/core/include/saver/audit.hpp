#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "saver/backend.hpp"
#include "saver/config.hpp"
#include "saver/trajectory.hpp"

namespace saver {

// Closed taxonomy; array order is the canonical profile/report order.
enum class ViolationType {
  MissingAssumption = 0,
  InvalidPrecondition = 1,
  UnjustifiedInference = 2,
  CircularReasoning = 3,
  Contradiction = 4,
  Overgeneralization = 5,
};

std::string_view to_string(ViolationType type);
ViolationType violation_type_from_string(std::string_view name);

struct AcceptanceCriterion {
  std::string criterion_id;
  nlohmann::ordered_json params;  // criterion schema parameters
};

struct AuditEvidence {
  std::string detector_id;
  std::vector<std::string> offending_refs;
  std::string explanation;
};

struct ViolationInstance {
  ViolationType type = ViolationType::MissingAssumption;
  int step = 0;  // 1-based step the violation is triggered at
  AuditEvidence evidence;
  AcceptanceCriterion acceptance;
};

struct UnfaithfulnessProfile {
  std::array<int, kViolationTypeCount> counts{};

  int total() const;
};

enum class AuditMode { Rule, RuleLlm };

struct AuditOptions {
  AuditMode mode = AuditMode::Rule;
  std::vector<std::string> universal_lexicon{"all", "always", "every", "never"};
  std::vector<std::string> negation_lexicon{"not", "no", "never"};
  std::vector<std::string> hedge_lexicon{"assume", "assuming", "suppose", "supposing",
                                         "if",     "may",      "might",   "perhaps",
                                         "possibly", "likely", "presumably"};
  // Disabled when auditing without task contexts (CLI audit of a bare
  // trajectory file).
  bool check_evidence_resolution = true;
  // rule+llm mode only; judge failures degrade to rule-only and are
  // reported through the warnings out-param of audit().
  TextBackend* judge = nullptr;
  std::string judge_prompt_template;

  static AuditOptions from_config(const RunConfig& config);
};

// Union of all detector outputs, deduplicated by (type, step) with rule
// detectors taking precedence, sorted by (step, type). Pure function of
// (trajectory, task) in rule mode.
std::vector<ViolationInstance> audit(const Trajectory& trajectory, const Task& task,
                                     const AuditOptions& options = {},
                                     std::vector<std::string>* warnings = nullptr);

// Every directed premise cycle (self-loops and forward-closing references
// included) yields one instance at the cycle's maximum step index.
std::vector<ViolationInstance> detect_circular(const Trajectory& trajectory);

// Unjustified_Inference, Invalid_Precondition, Missing_Assumption, and
// Overgeneralization detectors.
std::vector<ViolationInstance> detect_support(const Trajectory& trajectory, const Task& task,
                                              const AuditOptions& options = {});

// Rule mode flags two Claim/Inference steps identical up to inserted
// negation tokens, at the later step. rule+llm additionally asks the judge
// backend for pairwise conflicts among Claim steps; judge findings are
// additive, never subtractive.
std::vector<ViolationInstance> detect_contradiction(const Trajectory& trajectory,
                                                    const AuditOptions& options = {},
                                                    std::vector<std::string>* warnings = nullptr);

UnfaithfulnessProfile profile(const std::vector<ViolationInstance>& instances);

// Discrete support assessment from audit outcomes: flagged step -> 0,
// otherwise 1.
SupportAssessment assessment_from_audit(const Trajectory& trajectory,
                                        const std::vector<ViolationInstance>& instances,
                                        double epsilon);

int distinct_flagged_steps(const std::vector<ViolationInstance>& instances);

nlohmann::ordered_json instance_to_json(const ViolationInstance& instance);
ViolationInstance instance_from_json(const nlohmann::ordered_json& j);

}  // namespace saver
