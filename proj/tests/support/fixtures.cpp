#include "fixtures.hpp"

#ifndef SAVER_REPO_DIR
#define SAVER_REPO_DIR "."
#endif

namespace test_support {

using saver::EvidenceRef;
using saver::ReasoningStep;
using saver::StepKind;
using saver::Task;
using saver::Trajectory;

ReasoningStep make_step(int index, StepKind kind, std::string text,
                        std::initializer_list<int> premises,
                        std::initializer_list<EvidenceRef> evidence,
                        std::initializer_list<int> scope) {
  ReasoningStep step;
  step.index = index;
  step.kind = kind;
  step.text = std::move(text);
  step.premise_refs = premises;
  step.evidence_refs = evidence;
  step.assumption_scope = scope;
  return step;
}

Task chain_task(int length) {
  Task task;
  task.id = "chain";
  task.question = "what links the records?";
  saver::EvidenceDoc doc;
  doc.doc_id = "d1";
  doc.title = "records";
  for (int i = 0; i < length + 1; ++i) {
    doc.sentences.push_back("record " + std::to_string(i) + " links to record " +
                            std::to_string(i + 1));
  }
  task.contexts.push_back(doc);
  task.gold_answers = {"record " + std::to_string(length)};
  return task;
}

Trajectory make_chain(int length) {
  Trajectory t;
  for (int i = 1; i <= length; ++i) {
    StepKind kind = i == 1 ? StepKind::Claim
                           : (i == length ? StepKind::Conclusion : StepKind::Inference);
    ReasoningStep step = make_step(i, kind, "record " + std::to_string(i - 1) +
                                                " links to record " + std::to_string(i));
    if (i > 1) step.premise_refs.insert(i - 1);
    step.evidence_refs.insert({"d1", i - 1});
    t.steps.push_back(std::move(step));
  }
  return t;
}

Trajectory presupposition_trajectory() {
  Trajectory t;
  // The assumption cites the conclusion it is meant to justify.
  t.steps.push_back(make_step(
      1, StepKind::Assumption,
      "The phrase companion book reminds me of The Hork-Bajir Chronicles", {3}));
  t.steps.push_back(make_step(2, StepKind::Inference,
                              "The Hork-Bajir Chronicles belongs to the Animorphs series", {1}));
  t.steps.push_back(make_step(3, StepKind::Conclusion, "the series is Animorphs", {2}));
  return t;
}

double det_recursive(const std::vector<std::vector<double>>& m) {
  const size_t n = m.size();
  if (n == 0) return 1.0;
  if (n == 1) return m[0][0];
  double det = 0.0;
  double sign = 1.0;
  for (size_t col = 0; col < n; ++col) {
    std::vector<std::vector<double>> minor;
    for (size_t r = 1; r < n; ++r) {
      std::vector<double> row;
      for (size_t c = 0; c < n; ++c) {
        if (c != col) row.push_back(m[r][c]);
      }
      minor.push_back(std::move(row));
    }
    det += sign * m[0][col] * det_recursive(minor);
    sign = -sign;
  }
  return det;
}

std::string repo_path(const std::string& relative) {
  return std::string(SAVER_REPO_DIR) + "/" + relative;
}

}  // namespace test_support
