#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "saver/audit.hpp"
#include "saver/backend.hpp"
#include "support/fixtures.hpp"

using namespace saver;
using test_support::make_step;

namespace {

bool has_instance(const std::vector<ViolationInstance>& instances, ViolationType type,
                  int step) {
  for (const auto& inst : instances) {
    if (inst.type == type && inst.step == step) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("a fully grounded chain audits clean") {
  Trajectory t = test_support::make_chain(5);
  Task task = test_support::chain_task(5);
  CHECK(audit(t, task).empty());
}

TEST_CASE("the presupposition pattern yields a cycle and a missing assumption") {
  Trajectory t = test_support::presupposition_trajectory();
  Task task;
  task.id = "fig";
  auto instances = audit(t, task);
  CHECK(has_instance(instances, ViolationType::CircularReasoning, 3));
  CHECK(has_instance(instances, ViolationType::MissingAssumption, 1));
}

TEST_CASE("an inference with no premises and no evidence is unjustified") {
  Trajectory t;
  t.steps.push_back(make_step(1, StepKind::Claim, "base", {}, {{"d1", 0}}));
  t.steps.push_back(make_step(2, StepKind::Inference, "leap of faith"));
  auto instances = audit(t, test_support::chain_task(2));
  REQUIRE(instances.size() == 1);
  CHECK(instances[0].type == ViolationType::UnjustifiedInference);
  CHECK(instances[0].step == 2);
  CHECK(instances[0].acceptance.criterion_id == "attach_evidence");
}

// detect_circular

TEST_CASE("backward-only references form no cycle") {
  Trajectory t;
  t.steps.push_back(make_step(1, StepKind::Claim, "a"));
  t.steps.push_back(make_step(2, StepKind::Inference, "b", {1}));
  t.steps.push_back(make_step(3, StepKind::Inference, "c", {1, 2}));
  CHECK(detect_circular(t).empty());
}

TEST_CASE("a two-node cycle localizes at its maximum step") {
  Trajectory t;
  for (int i = 1; i <= 5; ++i) {
    t.steps.push_back(make_step(i, StepKind::Inference, "s" + std::to_string(i)));
  }
  t.steps[4].premise_refs.insert(3);  // 5 -> 3
  t.steps[2].premise_refs.insert(5);  // 3 -> 5
  auto instances = detect_circular(t);
  REQUIRE(instances.size() == 1);
  CHECK(instances[0].step == 5);
  CHECK(instances[0].acceptance.criterion_id == "remove_cycle_edge");
}

TEST_CASE("a self-loop is a cycle at its own step") {
  Trajectory t;
  t.steps.push_back(make_step(1, StepKind::Claim, "a"));
  t.steps.push_back(make_step(2, StepKind::Inference, "b", {2}));
  auto instances = detect_circular(t);
  REQUIRE(instances.size() == 1);
  CHECK(instances[0].step == 2);
}

// detect_support

TEST_CASE("dangling evidence is an invalid precondition") {
  Trajectory t;
  t.steps.push_back(make_step(1, StepKind::Claim, "a", {}, {{"d9", 4}}));
  auto instances = detect_support(t, test_support::chain_task(3), {});
  REQUIRE(instances.size() == 1);
  CHECK(instances[0].type == ViolationType::InvalidPrecondition);
  CHECK(instances[0].acceptance.criterion_id == "fix_reference");
  CHECK(instances[0].evidence.offending_refs == std::vector<std::string>{"d9:4"});
}

TEST_CASE("out-of-range premise references are invalid preconditions") {
  Trajectory t;
  t.steps.push_back(make_step(1, StepKind::Claim, "a", {7}));
  auto instances = detect_support(t, test_support::chain_task(3), {});
  REQUIRE(instances.size() == 1);
  CHECK(instances[0].type == ViolationType::InvalidPrecondition);
}

TEST_CASE("evidence resolution can be disabled for bare trajectories") {
  Trajectory t;
  t.steps.push_back(make_step(1, StepKind::Claim, "a", {}, {{"d9", 4}}));
  AuditOptions options;
  options.check_evidence_resolution = false;
  CHECK(detect_support(t, Task{}, options).empty());
}

TEST_CASE("a universal conclusion over one cited sentence overgeneralizes") {
  Trajectory t;
  t.steps.push_back(make_step(1, StepKind::Claim, "record 0 links to record 1", {}, {{"d1", 0}}));
  t.steps.push_back(make_step(2, StepKind::Conclusion, "all records link together", {1}));
  auto instances = detect_support(t, test_support::chain_task(3), {});
  REQUIRE(instances.size() == 1);
  CHECK(instances[0].type == ViolationType::Overgeneralization);
  CHECK(instances[0].step == 2);

  // with two cited sentences in the closure the conclusion stands
  t.steps[1].evidence_refs.insert({"d1", 1});
  CHECK(detect_support(t, test_support::chain_task(3), {}).empty());
}

TEST_CASE("a well-scoped hedged assumption raises nothing") {
  Trajectory t;
  t.steps.push_back(make_step(1, StepKind::Assumption, "Assume the list is complete", {}, {},
                              {2}));
  t.steps.push_back(
      make_step(2, StepKind::Inference, "record 0 links onward", {1}, {{"d1", 0}}));
  CHECK(detect_support(t, test_support::chain_task(3), {}).empty());
}

TEST_CASE("an unscoped or unhedged cited assumption is flagged at the assumption") {
  Trajectory unscoped;
  unscoped.steps.push_back(make_step(1, StepKind::Assumption, "Assume the list is complete"));
  unscoped.steps.push_back(
      make_step(2, StepKind::Inference, "so it links", {1}, {{"d1", 0}}));
  auto instances = detect_support(unscoped, test_support::chain_task(3), {});
  REQUIRE(instances.size() == 1);
  CHECK(instances[0].type == ViolationType::MissingAssumption);
  CHECK(instances[0].step == 1);
  CHECK(instances[0].acceptance.criterion_id == "scope_assumption");

  Trajectory unhedged;
  unhedged.steps.push_back(
      make_step(1, StepKind::Assumption, "the list is complete", {}, {}, {2}));
  unhedged.steps.push_back(
      make_step(2, StepKind::Inference, "so it links", {1}, {{"d1", 0}}));
  CHECK(detect_support(unhedged, test_support::chain_task(3), {}).size() == 1);

  // an uncited assumption is nobody's problem
  Trajectory uncited;
  uncited.steps.push_back(make_step(1, StepKind::Assumption, "the list is complete"));
  uncited.steps.push_back(make_step(2, StepKind::Claim, "unrelated", {}, {{"d1", 0}}));
  CHECK(detect_support(uncited, test_support::chain_task(3), {}).empty());
}

// detect_contradiction

TEST_CASE("negation-insertion pairs are contradictions at the later step") {
  Trajectory t;
  t.steps.push_back(make_step(1, StepKind::Claim, "X was born in 1990", {}, {{"d1", 0}}));
  t.steps.push_back(make_step(2, StepKind::Claim, "filler", {}, {{"d1", 1}}));
  t.steps.push_back(make_step(3, StepKind::Claim, "X was not born in 1990", {}, {{"d1", 2}}));
  auto instances = detect_contradiction(t);
  REQUIRE(instances.size() == 1);
  CHECK(instances[0].step == 3);
  CHECK(instances[0].evidence.offending_refs == std::vector<std::string>{"step:1"});
  CHECK(instances[0].acceptance.criterion_id == "revise_step_text");
}

TEST_CASE("unrelated steps do not contradict") {
  Trajectory t;
  t.steps.push_back(make_step(1, StepKind::Claim, "the sky is blue"));
  t.steps.push_back(make_step(2, StepKind::Claim, "grass grows in spring"));
  CHECK(detect_contradiction(t).empty());
}

TEST_CASE("same negation count on both sides is not a contradiction") {
  Trajectory t;
  t.steps.push_back(make_step(1, StepKind::Claim, "X was not born in 1990"));
  t.steps.push_back(make_step(2, StepKind::Claim, "X was not born in 1990"));
  CHECK(detect_contradiction(t).empty());
}

TEST_CASE("the llm judge adds instances from its JSON verdict") {
  Trajectory t;
  t.steps.push_back(make_step(1, StepKind::Claim, "alpha holds"));
  t.steps.push_back(make_step(2, StepKind::Claim, "beta holds"));
  t.steps.push_back(make_step(3, StepKind::Claim, "gamma holds"));
  t.steps.push_back(make_step(4, StepKind::Claim, "delta holds"));

  struct JudgeBackend final : TextBackend {
    std::string reply;
    GenResponse generate(const GenRequest&) override {
      GenResponse resp;
      resp.text = reply;
      resp.backend_id = "judge";
      return resp;
    }
    std::string id() const override { return "judge"; }
  };

  JudgeBackend judge;
  judge.reply = "verdict follows {\"conflict\": true, \"steps\": [2, 4]} done";
  AuditOptions options;
  options.mode = AuditMode::RuleLlm;
  options.judge = &judge;
  options.judge_prompt_template = "{steps}";
  auto instances = detect_contradiction(t, options);
  REQUIRE(instances.size() == 1);
  CHECK(instances[0].step == 4);
  CHECK(instances[0].evidence.detector_id == "llm_judge");

  // parse failure degrades to rule-only with a warning
  judge.reply = "no json here";
  std::vector<std::string> warnings;
  CHECK(detect_contradiction(t, options, &warnings).empty());
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("judge skipped") != std::string::npos);
}

// audit + profile

TEST_CASE("rule-mode audit is deterministic") {
  Trajectory t = test_support::presupposition_trajectory();
  Task task;
  auto a = audit(t, task);
  auto b = audit(t, task);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].type == b[i].type);
    CHECK(a[i].step == b[i].step);
    CHECK(a[i].evidence.explanation == b[i].evidence.explanation);
  }
}

TEST_CASE("profile counts instances per type in taxonomy order") {
  CHECK(profile({}).total() == 0);

  std::vector<ViolationInstance> instances;
  ViolationInstance circ;
  circ.type = ViolationType::CircularReasoning;
  circ.step = 2;
  instances.push_back(circ);
  circ.step = 4;
  instances.push_back(circ);
  ViolationInstance contra;
  contra.type = ViolationType::Contradiction;
  contra.step = 3;
  instances.push_back(contra);

  UnfaithfulnessProfile p = profile(instances);
  CHECK(p.counts == std::array<int, 6>{0, 0, 0, 2, 1, 0});
  CHECK(p.total() == 3);
}

TEST_CASE("audit deduplicates by type and step") {
  // two cycles sharing the same maximum index collapse to one instance
  Trajectory t;
  for (int i = 1; i <= 4; ++i) {
    t.steps.push_back(make_step(i, StepKind::Inference, "s" + std::to_string(i), {}, {{"d1", 0}}));
  }
  t.steps[3].premise_refs = {2, 3};  // 4 -> 2, 4 -> 3
  t.steps[1].premise_refs = {4};     // 2 -> 4
  t.steps[2].premise_refs = {4};     // 3 -> 4
  auto instances = detect_circular(t);
  CHECK(instances.size() == 1);
  CHECK(instances[0].step == 4);
}

TEST_CASE("assessment_from_audit zeroes exactly the flagged steps") {
  Trajectory t = test_support::make_chain(4);
  ViolationInstance inst;
  inst.type = ViolationType::UnjustifiedInference;
  inst.step = 2;
  SupportAssessment assessment = assessment_from_audit(t, {inst}, 0.5);
  CHECK(assessment.scores == std::vector<double>{1.0, 0.0, 1.0, 1.0});
  CHECK(unfaithfulness_rate(assessment) == doctest::Approx(0.25));
}

TEST_CASE("violation instances round-trip through JSON") {
  Trajectory t = test_support::presupposition_trajectory();
  for (const auto& inst : audit(t, Task{})) {
    ViolationInstance back = instance_from_json(instance_to_json(inst));
    CHECK(back.type == inst.type);
    CHECK(back.step == inst.step);
    CHECK(back.evidence.detector_id == inst.evidence.detector_id);
    CHECK(back.evidence.offending_refs == inst.evidence.offending_refs);
    CHECK(back.acceptance.criterion_id == inst.acceptance.criterion_id);
    CHECK(back.acceptance.params == inst.acceptance.params);
  }
}
