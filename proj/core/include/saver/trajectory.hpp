#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace saver {

// Structured belief trajectory schema. All types are immutable values after
// construction; safe to share across threads.

struct EvidenceRef {
  std::string doc;
  int sent = 0;
  auto operator<=>(const EvidenceRef&) const = default;
};

enum class StepKind { Claim, Assumption, Inference, Verification, Conclusion };

std::string_view to_string(StepKind kind);
std::optional<StepKind> step_kind_from_string(std::string_view name);

struct ReasoningStep {
  int index = 0;  // 1-based
  StepKind kind = StepKind::Claim;
  std::string text;
  // Stored verbatim, including forward and self references. Reference
  // validity is an audit concern, not a constructor error.
  std::set<int> premise_refs;
  std::set<EvidenceRef> evidence_refs;
  // For Assumption steps: indices of the steps this assumption licenses.
  std::set<int> assumption_scope;

  bool operator==(const ReasoningStep&) const = default;
};

struct Trajectory {
  std::vector<ReasoningStep> steps;

  int length() const { return static_cast<int>(steps.size()); }
  // Lookup by the step's 1-based index field; nullptr when absent.
  const ReasoningStep* step_at(int index) const;

  bool operator==(const Trajectory&) const = default;
};

struct EvidenceDoc {
  std::string doc_id;
  std::string title;
  std::vector<std::string> sentences;  // position = sentence id

  bool operator==(const EvidenceDoc&) const = default;
};

struct Task {
  std::string id;
  std::string question;
  std::vector<EvidenceDoc> contexts;
  std::vector<std::string> gold_answers;  // may be empty in live mode

  const EvidenceDoc* find_doc(std::string_view doc_id) const;
  bool resolves(const EvidenceRef& ref) const;

  bool operator==(const Task&) const = default;
};

struct SupportAssessment {
  std::vector<double> scores;  // one per step, in [0,1]
  double threshold = 0.5;      // epsilon
};

struct Belief {
  std::string persona_id;
  std::string claim;
  Trajectory trajectory;
  // Set when the structured parse failed twice and the belief was replaced
  // by a single-step raw-text fallback.
  bool degraded = false;

  bool operator==(const Belief&) const = default;
};

// Trajectory-level unfaithfulness rate: fraction of steps whose support
// score falls strictly below the threshold. Scores exactly at the threshold
// count as faithful. Throws std::invalid_argument on an empty assessment.
double unfaithfulness_rate(const SupportAssessment& assessment);

// Directed reference graph over step indices. Edge u -> v means step u cites
// step v as a premise. Out-edge sets are the verbatim premise_refs, so
// forward references, self references, and out-of-range targets are all
// retained; nodes() covers only 1..L.
struct PremiseGraph {
  int node_count = 0;
  std::map<int, std::set<int>> out_edges;

  const std::set<int>& refs_of(int step) const;
};

PremiseGraph premise_graph(const Trajectory& trajectory);

enum class SchemaFaultKind {
  EmptyTrajectory,
  IndexGap,
  EmptyText,
  DuplicateConclusion,
  ConclusionNotLast,
};

std::string_view to_string(SchemaFaultKind kind);

struct SchemaFault {
  SchemaFaultKind kind = SchemaFaultKind::EmptyTrajectory;
  int step = 0;  // 1-based where applicable, 0 otherwise
  std::string message;
};

// Schema checks only: consecutive 1..L indices, nonempty texts, at most one
// Conclusion and only in final position. An empty result means the schema is
// valid, not that the reasoning is faithful.
std::vector<SchemaFault> validate_trajectory(const Trajectory& trajectory);

}  // namespace saver
