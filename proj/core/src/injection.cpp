#include "saver/injection.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace saver {

namespace {

std::string entity(int id) { return "entity" + std::to_string(id); }

// Builds a clean chain trajectory plus a task whose context sentences share
// tokens with every step, so evidence attachment always has material to work
// with. Texts avoid hedge, universal, and negation lexicon tokens.
struct CaseBuilder {
  Rng& rng;
  int length;
  int entity_base;
  Task task;
  Trajectory trajectory;

  CaseBuilder(Rng& r, int base_length, int case_id)
      : rng(r), length(base_length), entity_base(static_cast<int>(r.index(900)) + 10) {
    task.id = "inject-" + std::to_string(case_id);
    build_task();
    build_trajectory();
  }

  std::string subject(int step) const { return entity(entity_base + step); }

  std::string relation_sentence(int step) const {
    return subject(step) + " connects with " + subject(step + 1) + " in the archive";
  }

  void build_task() {
    task.question = "Which record links " + subject(1) + " to " + subject(length) + "?";
    EvidenceDoc d0;
    d0.doc_id = "d0";
    d0.title = "archive part one";
    EvidenceDoc d1;
    d1.doc_id = "d1";
    d1.title = "archive part two";
    for (int s = 1; s <= length; ++s) {
      (s % 2 == 1 ? d0 : d1).sentences.push_back(relation_sentence(s));
    }
    d0.sentences.push_back("the archive lists " + subject(length) + " under section nine");
    d1.sentences.push_back("the catalog describes " + subject(1) + " in detail");
    task.contexts = {d0, d1};
    task.gold_answers = {subject(length)};
  }

  EvidenceRef evidence_for(int step) const {
    // relation_sentence(step) position within its document
    return {step % 2 == 1 ? "d0" : "d1", (step - 1) / 2};
  }

  void build_trajectory() {
    for (int s = 1; s <= length; ++s) {
      ReasoningStep step;
      step.index = s;
      if (s == 1) {
        step.kind = StepKind::Claim;
        step.text = relation_sentence(1);
        step.evidence_refs.insert(evidence_for(1));
      } else if (s == 2) {
        step.kind = StepKind::Assumption;
        step.text = "Assuming the archive covers " + subject(2) + " completely";
        step.assumption_scope.insert(3);
      } else if (s == length) {
        step.kind = StepKind::Conclusion;
        step.text = "the record linking them is " + subject(length);
        step.premise_refs.insert(s - 1);
        step.evidence_refs.insert(evidence_for(s - 1));
      } else {
        step.kind = StepKind::Inference;
        step.text = relation_sentence(s);
        step.premise_refs.insert(s - 1);
        step.evidence_refs.insert(evidence_for(s));
      }
      trajectory.steps.push_back(std::move(step));
    }
  }

  ReasoningStep& step_ref(int index) { return trajectory.steps[static_cast<size_t>(index - 1)]; }

  // Mutations. Each returns the step the expected instance localizes at.

  int inject_circular(int at) {
    if (at <= 2 || at > length) at = 3 + static_cast<int>(rng.index(static_cast<size_t>(length - 2)));
    // Forward reference from an earlier chain step closes a cycle whose
    // maximum index is `at`.
    int from = at - 1 - static_cast<int>(rng.index(static_cast<size_t>(at - 1)));
    if (from < 1) from = 1;
    step_ref(from).premise_refs.insert(at);
    // Guarantee the backward path at -> ... -> from exists.
    for (int s = from + 1; s <= at; ++s) step_ref(s).premise_refs.insert(s - 1);
    return at;
  }

  int inject_unjustified(int at) {
    if (at < 3 || at >= length) at = 3 + static_cast<int>(rng.index(static_cast<size_t>(std::max(1, length - 3))));
    ReasoningStep& step = step_ref(at);
    step.kind = StepKind::Inference;
    step.premise_refs.clear();
    step.evidence_refs.clear();
    return at;
  }

  int inject_invalid_precondition(int at) {
    if (at < 1 || at > length) at = 3 + static_cast<int>(rng.index(static_cast<size_t>(std::max(1, length - 3))));
    step_ref(at).evidence_refs.insert({"ghost", 7});
    return at;
  }

  int inject_contradiction(int at) {
    if (at < 4 || at > length - 1) at = std::max(4, length - 1);
    int earlier = 3;
    ReasoningStep& source = step_ref(earlier);
    ReasoningStep& target = step_ref(at);
    target.kind = StepKind::Inference;
    target.text = source.text + " not";
    // keep it justified so only the contradiction fires
    if (target.premise_refs.empty()) target.premise_refs.insert(at - 1);
    return at;
  }

  int inject_missing_assumption(int /*at*/) {
    ReasoningStep& assumption = step_ref(2);
    assumption.text = "the archive covers " + subject(2) + " completely";  // hedge removed
    assumption.assumption_scope.clear();
    step_ref(3).premise_refs.insert(2);  // ensure an inference cites it
    return 2;
  }

  int inject_overgeneralization(int /*at*/) {
    ReasoningStep& conclusion = step_ref(length);
    conclusion.text = "all records connect to " + subject(length);
    // Shrink the cited evidence in the conclusion's premise closure to one
    // sentence without unjustifying any inference.
    for (int s = 1; s < length; ++s) {
      if (s != 1) step_ref(s).evidence_refs.clear();
    }
    conclusion.evidence_refs.clear();
    conclusion.premise_refs = {length - 1};
    return length;
  }

  int apply(const InjectionPoint& point) {
    switch (point.type) {
      case ViolationType::CircularReasoning: return inject_circular(point.step);
      case ViolationType::UnjustifiedInference: return inject_unjustified(point.step);
      case ViolationType::InvalidPrecondition: return inject_invalid_precondition(point.step);
      case ViolationType::Contradiction: return inject_contradiction(point.step);
      case ViolationType::MissingAssumption: return inject_missing_assumption(point.step);
      case ViolationType::Overgeneralization: return inject_overgeneralization(point.step);
    }
    return point.step;
  }
};

}  // namespace

std::vector<InjectionSpec> default_injection_specs() {
  return {
      {"circular", 5, {{ViolationType::CircularReasoning, 0}}},
      {"unjustified", 5, {{ViolationType::UnjustifiedInference, 0}}},
      {"invalid_precondition", 5, {{ViolationType::InvalidPrecondition, 0}}},
      {"contradiction", 6, {{ViolationType::Contradiction, 0}}},
      {"missing_assumption", 5, {{ViolationType::MissingAssumption, 2}}},
      {"overgeneralization", 5, {{ViolationType::Overgeneralization, 0}}},
      {"unjustified_and_dangling",
       6,
       {{ViolationType::UnjustifiedInference, 3}, {ViolationType::InvalidPrecondition, 5}}},
      {"circular_and_assumption",
       6,
       {{ViolationType::CircularReasoning, 5}, {ViolationType::MissingAssumption, 2}}},
  };
}

std::vector<InjectionCase> build_injection_corpus(const std::vector<InjectionSpec>& specs, int n,
                                                  Rng& rng) {
  if (specs.empty()) throw std::invalid_argument("injection specs must be nonempty");
  std::set<int> covered;
  for (const auto& spec : specs) {
    for (const auto& point : spec.injected) covered.insert(static_cast<int>(point.type));
  }
  if (static_cast<int>(covered.size()) < kViolationTypeCount) {
    throw std::invalid_argument("injection specs must cover all six violation types");
  }

  std::vector<InjectionCase> corpus;
  corpus.reserve(static_cast<size_t>(n) * 2);
  for (int i = 0; i < n; ++i) {
    const InjectionSpec& spec = specs[static_cast<size_t>(i) % specs.size()];
    int length = spec.base_length + static_cast<int>(rng.index(3));
    CaseBuilder builder(rng, length, i);
    InjectionCase injected;
    injected.spec_name = spec.name;
    for (const auto& point : spec.injected) {
      int at = builder.apply(point);
      injected.expected.push_back({point.type, at});
    }
    injected.task = builder.task;
    injected.trajectory = builder.trajectory;
    injected.clean = false;
    corpus.push_back(std::move(injected));

    // 1:1 clean control
    CaseBuilder control(rng, spec.base_length + static_cast<int>(rng.index(3)), n + i);
    InjectionCase clean;
    clean.spec_name = "clean";
    clean.task = control.task;
    clean.trajectory = control.trajectory;
    clean.clean = true;
    corpus.push_back(std::move(clean));
  }
  return corpus;
}

}  // namespace saver
