#include "saver/trajectory.hpp"

#include <cctype>
#include <stdexcept>

namespace saver {

std::string_view to_string(StepKind kind) {
  switch (kind) {
    case StepKind::Claim: return "Claim";
    case StepKind::Assumption: return "Assumption";
    case StepKind::Inference: return "Inference";
    case StepKind::Verification: return "Verification";
    case StepKind::Conclusion: return "Conclusion";
  }
  return "Claim";
}

std::optional<StepKind> step_kind_from_string(std::string_view name) {
  std::string upper;
  upper.reserve(name.size());
  for (char c : name) upper.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  if (upper == "CLAIM") return StepKind::Claim;
  if (upper == "ASSUMPTION") return StepKind::Assumption;
  if (upper == "INFERENCE") return StepKind::Inference;
  if (upper == "VERIFICATION") return StepKind::Verification;
  if (upper == "CONCLUSION") return StepKind::Conclusion;
  return std::nullopt;
}

const ReasoningStep* Trajectory::step_at(int index) const {
  for (const auto& s : steps) {
    if (s.index == index) return &s;
  }
  return nullptr;
}

const EvidenceDoc* Task::find_doc(std::string_view doc_id) const {
  for (const auto& d : contexts) {
    if (d.doc_id == doc_id) return &d;
  }
  return nullptr;
}

bool Task::resolves(const EvidenceRef& ref) const {
  const EvidenceDoc* doc = find_doc(ref.doc);
  if (doc == nullptr) return false;
  return ref.sent >= 0 && ref.sent < static_cast<int>(doc->sentences.size());
}

double unfaithfulness_rate(const SupportAssessment& assessment) {
  if (assessment.scores.empty()) throw std::invalid_argument("empty trajectory");
  int below = 0;
  for (double s : assessment.scores) {
    if (s < assessment.threshold) ++below;
  }
  return static_cast<double>(below) / static_cast<double>(assessment.scores.size());
}

const std::set<int>& PremiseGraph::refs_of(int step) const {
  static const std::set<int> kEmpty;
  auto it = out_edges.find(step);
  return it == out_edges.end() ? kEmpty : it->second;
}

PremiseGraph premise_graph(const Trajectory& trajectory) {
  PremiseGraph g;
  g.node_count = trajectory.length();
  for (const auto& step : trajectory.steps) {
    g.out_edges[step.index] = step.premise_refs;
  }
  return g;
}

std::string_view to_string(SchemaFaultKind kind) {
  switch (kind) {
    case SchemaFaultKind::EmptyTrajectory: return "empty_trajectory";
    case SchemaFaultKind::IndexGap: return "index_gap";
    case SchemaFaultKind::EmptyText: return "empty_text";
    case SchemaFaultKind::DuplicateConclusion: return "duplicate_conclusion";
    case SchemaFaultKind::ConclusionNotLast: return "conclusion_not_last";
  }
  return "empty_trajectory";
}

std::vector<SchemaFault> validate_trajectory(const Trajectory& trajectory) {
  std::vector<SchemaFault> faults;
  if (trajectory.steps.empty()) {
    faults.push_back({SchemaFaultKind::EmptyTrajectory, 0, "trajectory has no steps"});
    return faults;
  }
  int expected = 1;
  for (const auto& step : trajectory.steps) {
    if (step.index != expected) {
      faults.push_back({SchemaFaultKind::IndexGap, step.index,
                        "expected index " + std::to_string(expected) + ", found " +
                            std::to_string(step.index)});
      expected = step.index;  // report one gap per discontinuity
    }
    ++expected;
  }
  int conclusion_count = 0;
  for (size_t i = 0; i < trajectory.steps.size(); ++i) {
    const auto& step = trajectory.steps[i];
    if (step.text.empty()) {
      faults.push_back({SchemaFaultKind::EmptyText, step.index, "step has empty text"});
    }
    if (step.kind == StepKind::Conclusion) {
      ++conclusion_count;
      if (conclusion_count > 1) {
        faults.push_back({SchemaFaultKind::DuplicateConclusion, step.index,
                          "more than one Conclusion step"});
      } else if (i + 1 != trajectory.steps.size()) {
        faults.push_back({SchemaFaultKind::ConclusionNotLast, step.index,
                          "Conclusion must be the final step"});
      }
    }
  }
  return faults;
}

}  // namespace saver
