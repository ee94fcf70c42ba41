#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "saver/injection.hpp"
#include "saver/repair.hpp"
#include "support/fixtures.hpp"

using namespace saver;
using test_support::make_step;

namespace {

RepairConstraint first_constraint(const Trajectory& t, const Task& task,
                                  const AuditOptions& options = {}) {
  auto instances = audit(t, task, options);
  REQUIRE(!instances.empty());
  return constraint_from_instance(instances.front());
}

}  // namespace

// ---------------------------------------------------------------------------
// Sat

TEST_CASE("fix_reference is satisfied once the dangling ref is replaced") {
  Task task = test_support::chain_task(3);
  Trajectory broken;
  broken.steps.push_back(make_step(1, StepKind::Claim, "a", {}, {{"d9", 4}}));
  RepairConstraint c = first_constraint(broken, task);
  RepairOptions options;
  CHECK_FALSE(sat(broken, c, task, options));

  Trajectory fixed;
  fixed.steps.push_back(make_step(1, StepKind::Claim, "a", {}, {{"d1", 2}}));
  CHECK(sat(fixed, c, task, options));
}

TEST_CASE("remove_cycle_edge is satisfied when the recorded cycle is broken") {
  Trajectory t;
  for (int i = 1; i <= 5; ++i) {
    t.steps.push_back(make_step(i, StepKind::Inference, "s" + std::to_string(i), {}, {{"d1", 0}}));
  }
  t.steps[4].premise_refs.insert(3);  // 5 -> 3
  t.steps[2].premise_refs.insert(5);  // 3 -> 5
  Task task = test_support::chain_task(5);
  RepairConstraint c = constraint_from_instance(detect_circular(t).front());
  RepairOptions options;
  CHECK_FALSE(sat(t, c, task, options));

  Trajectory broken_cycle = t;
  broken_cycle.steps[2].premise_refs.erase(5);
  CHECK(sat(broken_cycle, c, task, options));
}

TEST_CASE("hedge_conclusion stays false while the universal rests on one sentence") {
  Task task = test_support::chain_task(3);
  Trajectory t;
  t.steps.push_back(make_step(1, StepKind::Claim, "record 0 links to record 1", {}, {{"d1", 0}}));
  t.steps.push_back(make_step(2, StepKind::Conclusion, "all records link together", {1}));
  RepairConstraint c = first_constraint(t, task);
  RepairOptions options;
  CHECK_FALSE(sat(t, c, task, options));

  Trajectory widened = t;
  widened.steps[1].evidence_refs.insert({"d1", 1});
  CHECK(sat(widened, c, task, options));

  Trajectory softened = t;
  softened.steps[1].text = "most records link together";
  CHECK(sat(softened, c, task, options));
}

TEST_CASE("scope_assumption requires scope coverage and a hedge") {
  Task task = test_support::chain_task(3);
  Trajectory t;
  t.steps.push_back(make_step(1, StepKind::Assumption, "the list is complete"));
  t.steps.push_back(make_step(2, StepKind::Inference, "so it links", {1}, {{"d1", 0}}));
  RepairConstraint c = first_constraint(t, task);
  RepairOptions options;
  CHECK_FALSE(sat(t, c, task, options));

  Trajectory scoped_only = t;
  scoped_only.steps[0].assumption_scope = {2};
  CHECK_FALSE(sat(scoped_only, c, task, options));

  Trajectory hedged_and_scoped = scoped_only;
  hedged_and_scoped.steps[0].text = "Assuming the list is complete";
  CHECK(sat(hedged_and_scoped, c, task, options));
}

TEST_CASE("unknown criterion ids are an error") {
  RepairConstraint c;
  c.source.acceptance.criterion_id = "mystery";
  CHECK_THROWS(sat({}, c, Task{}, {}));
}

// ---------------------------------------------------------------------------
// Propose

TEST_CASE("attach evidence picks the highest-overlap context sentence") {
  Task task;
  task.id = "t";
  EvidenceDoc doc;
  doc.doc_id = "d1";
  doc.sentences = {"nothing shared here at present",
                   "the festival takes place in the old harbor town",
                   "weather report for tuesday"};
  task.contexts.push_back(doc);

  Trajectory t;
  t.steps.push_back(make_step(1, StepKind::Claim, "background", {}, {{"d1", 2}}));
  t.steps.push_back(make_step(2, StepKind::Inference, "the festival takes place in the harbor"));
  RepairConstraint c = first_constraint(t, task);
  REQUIRE(c.prescribed_edit == EditKind::AttachEvidence);

  RepairOptions options;
  auto candidates = propose_repairs(t, c, task, options);
  REQUIRE(!candidates.empty());
  // sentence 1 shares {the, festival, takes, place, in, harbor}
  CHECK(candidates[0].trajectory.steps[1].evidence_refs.count({"d1", 1}) == 1);
  CHECK(candidates[0].delta == 1);
  CHECK(sat(candidates[0].trajectory, c, task, options));
}

TEST_CASE("cycle repair deletes the forward-closing reference") {
  Trajectory t;
  for (int i = 1; i <= 5; ++i) {
    t.steps.push_back(make_step(i, StepKind::Inference, "s" + std::to_string(i), {}, {{"d1", 0}}));
  }
  t.steps[2].premise_refs.insert(5);  // 3 -> 5 forward
  t.steps[4].premise_refs.insert(3);  // 5 -> 3 backward
  Task task = test_support::chain_task(5);
  RepairConstraint c = constraint_from_instance(detect_circular(t).front());

  auto candidates = propose_repairs(t, c, task, {});
  REQUIRE(candidates.size() == 1);
  CHECK(candidates[0].delta == 1);
  CHECK(candidates[0].trajectory.steps[2].premise_refs.count(5) == 0);
  CHECK(candidates[0].trajectory.steps[4].premise_refs.count(3) == 1);
  CHECK(detect_circular(candidates[0].trajectory).empty());
}

TEST_CASE("two constraints on the same step compose into a single modify") {
  Task task = test_support::chain_task(4);
  Trajectory t;
  t.steps.push_back(make_step(1, StepKind::Claim, "X was born in 1990", {}, {{"d1", 0}}));
  // unjustified AND contradicting step 1
  t.steps.push_back(make_step(2, StepKind::Inference, "X was not born in 1990"));

  auto instances = audit(t, task);
  std::vector<RepairConstraint> constraints = constraints_from_instances(instances);
  REQUIRE(constraints.size() == 2);
  CHECK(constraints[0].source.step == 2);
  CHECK(constraints[1].source.step == 2);

  RepairOptions options;
  std::vector<EditOp> edits;
  Trajectory repaired = repair_round(t, constraints, task, options, &edits);
  // both templated edits landed on step 2 as one composed modify
  REQUIRE(edits.size() == 1);
  CHECK(edits[0].kind == EditOp::Kind::Modify);
  CHECK(edits[0].step == 2);
  CHECK_FALSE(repaired.steps[1].evidence_refs.empty());
  CHECK(repaired.steps[1].text == "X was born in 1990");
  CHECK(audit(repaired, task).empty());
}

TEST_CASE("contradiction repair strips the inserted negation") {
  Task task = test_support::chain_task(3);
  Trajectory t;
  t.steps.push_back(make_step(1, StepKind::Claim, "X was born in 1990", {}, {{"d1", 0}}));
  t.steps.push_back(make_step(2, StepKind::Claim, "X was not born in 1990", {}, {{"d1", 1}}));
  RepairConstraint c = first_constraint(t, task);
  REQUIRE(c.prescribed_edit == EditKind::ReviseStepText);

  RepairOptions options;
  auto candidates = propose_repairs(t, c, task, options);
  REQUIRE(!candidates.empty());
  CHECK(candidates[0].trajectory.steps[1].text == "X was born in 1990");
  CHECK(sat(candidates[0].trajectory, c, task, options));
}

TEST_CASE("insert assumption renumbers and remaps references") {
  Task task = test_support::chain_task(4);
  Trajectory t = test_support::make_chain(4);

  // Synthetic constraint: an llm-style Missing_Assumption at inference 3
  // with no assumption step to scope.
  ViolationInstance inst;
  inst.type = ViolationType::MissingAssumption;
  inst.step = 3;
  inst.acceptance.criterion_id = "scope_assumption";
  inst.acceptance.params = {{"citing_steps", {3}}};
  RepairConstraint c = constraint_from_instance(inst);

  RepairOptions options;
  auto candidates = propose_repairs(t, c, task, options);
  REQUIRE(candidates.size() == 1);
  const Trajectory& edited = candidates[0].trajectory;
  REQUIRE(edited.length() == 5);
  CHECK(edited.steps[2].kind == StepKind::Assumption);
  CHECK(edited.steps[2].index == 3);
  CHECK(edited.steps[2].assumption_scope == std::set<int>{4});
  // the old step 3 is now step 4 and its premise ref to 2 is unchanged,
  // while old step 4's ref to 3 now points at 4
  CHECK(edited.steps[3].index == 4);
  CHECK(edited.steps[3].premise_refs == std::set<int>{2});
  CHECK(edited.steps[4].premise_refs == std::set<int>{4});
  CHECK(validate_trajectory(edited).empty());
}

// ---------------------------------------------------------------------------
// Objective arithmetic (Eq. 5 surrogate)

TEST_CASE("selection prefers unsat reduction over edit cost at lambda 1") {
  Task task = test_support::chain_task(4);
  Trajectory base = test_support::make_chain(4);

  // Two synthetic constraints that inspect evidence on steps 2 and 3.
  Trajectory broken = base;
  broken.steps[1].evidence_refs = {{"ghost", 1}};
  broken.steps[2].evidence_refs = {{"ghost", 2}};
  ViolationInstance a;
  a.type = ViolationType::InvalidPrecondition;
  a.step = 2;
  a.acceptance.criterion_id = "fix_reference";
  a.acceptance.params = {{"step", 2}};
  ViolationInstance b = a;
  b.step = 3;
  b.acceptance.params = {{"step", 3}};
  std::vector<RepairConstraint> constraints =
      constraints_from_instances({a, b});

  // Candidate 1: fixes constraint a only, delta 1.
  RepairCandidate fix_one;
  fix_one.trajectory = broken;
  fix_one.trajectory.steps[1].evidence_refs = {{"d1", 1}};
  fix_one.edit_ops = step_edit_ops(broken, fix_one.trajectory);
  fix_one.delta = static_cast<int>(fix_one.edit_ops.size());
  fix_one.description = "fix step 2";

  // Candidate 2: fixes both constraints but touches three steps, delta 3.
  RepairCandidate fix_both;
  fix_both.trajectory = broken;
  fix_both.trajectory.steps[1].evidence_refs = {{"d1", 1}};
  fix_both.trajectory.steps[2].evidence_refs = {{"d1", 2}};
  fix_both.trajectory.steps[3].text += " rephrased";
  fix_both.edit_ops = step_edit_ops(broken, fix_both.trajectory);
  fix_both.delta = static_cast<int>(fix_both.edit_ops.size());
  fix_both.description = "fix everything";
  REQUIRE(fix_one.delta == 1);
  REQUIRE(fix_both.delta == 3);

  RepairOptions cheap;
  cheap.lambda = 1.0;
  // scores: 1 + 1*1 = 2 versus 0 + 1*3 = 3
  CHECK(select_repair_candidate({fix_one, fix_both}, constraints, task, cheap) == 0);

  RepairOptions thorough;
  thorough.lambda = 0.1;
  // scores: 1.1 versus 0.3
  CHECK(select_repair_candidate({fix_one, fix_both}, constraints, task, thorough) == 1);
}

TEST_CASE("repair_round applies the cheapest satisfying fix and lowers the loss") {
  Task task = test_support::chain_task(3);
  Trajectory t;
  t.steps.push_back(make_step(1, StepKind::Claim, "record 0 links to record 1", {}, {{"d9", 4}}));
  auto constraints = constraints_from_instances(audit(t, task));
  REQUIRE(constraints.size() == 1);

  RepairOptions options;
  options.lambda = 0.1;
  std::vector<EditOp> edits;
  Trajectory repaired = repair_round(t, constraints, task, options, &edits);
  CHECK(edits.size() == 1);
  CHECK(sat(repaired, constraints[0], task, options));
  CHECK(audit(repaired, task).empty());
}

TEST_CASE("zero constraints leave the trajectory untouched") {
  Task task = test_support::chain_task(3);
  Trajectory t = test_support::make_chain(3);
  std::vector<EditOp> edits;
  Trajectory out = repair_round(t, {}, task, {}, &edits);
  CHECK(out == t);
  CHECK(edits.empty());
}

// ---------------------------------------------------------------------------
// Loop

TEST_CASE("a single repairable violation converges in one round") {
  Task task = test_support::chain_task(4);
  Trajectory t = test_support::make_chain(4);
  t.steps[1].premise_refs.clear();
  t.steps[1].evidence_refs.clear();  // unjustified inference at step 2

  Belief belief{"p", "record 3", t, false};
  LoopOptions options;
  RepairOutcome outcome = audit_repair_loop(belief, task, options);
  CHECK(outcome.converged);
  CHECK(outcome.rounds_used == 1);
  CHECK(outcome.residual.empty());
  CHECK(outcome.repair_rounds_executed == 1);
  CHECK(audit(outcome.final_trajectory, task).empty());
}

TEST_CASE("repairing one violation can expose another, resolved next round") {
  Task task = test_support::chain_task(5);
  Trajectory t = test_support::make_chain(5);
  // Step 2's only premise closes a forward cycle and it has no evidence, so
  // deleting the cycle edge leaves it unjustified.
  t.steps[1].premise_refs = {4};
  t.steps[1].evidence_refs.clear();

  Belief belief{"p", "record 4", t, false};
  LoopOptions options;
  RepairOutcome outcome = audit_repair_loop(belief, task, options);
  CHECK(outcome.converged);
  CHECK(outcome.rounds_used == 2);
  CHECK(outcome.repair_rounds_executed == 2);
  REQUIRE(outcome.trace.size() >= 3);
  bool round2_unjustified = false;
  for (const auto& inst : outcome.trace[1].instances) {
    if (inst.type == ViolationType::UnjustifiedInference && inst.step == 2) {
      round2_unjustified = true;
    }
  }
  CHECK(round2_unjustified);
}

TEST_CASE("clean input passes through bit-identical in one round") {
  Task task = test_support::chain_task(4);
  Trajectory t = test_support::make_chain(4);
  Belief belief{"p", "record 3", t, false};
  RepairOutcome outcome = audit_repair_loop(belief, task, {});
  CHECK(outcome.converged);
  CHECK(outcome.rounds_used == 1);
  CHECK(outcome.repair_rounds_executed == 0);
  CHECK(outcome.final_trajectory == t);
}

TEST_CASE("unrepairable violations stall honestly") {
  Task task;  // no contexts: nothing to attach
  task.id = "empty";
  Trajectory t;
  t.steps.push_back(make_step(1, StepKind::Claim, "base"));
  t.steps.push_back(make_step(2, StepKind::Inference, "leap"));
  Belief belief{"p", "x", t, false};
  RepairOutcome outcome = audit_repair_loop(belief, task, {});
  CHECK_FALSE(outcome.converged);
  CHECK(!outcome.residual.empty());
  CHECK(outcome.final_trajectory == t);
}

TEST_CASE("loop edits stay inside the failure slice") {
  Rng rng(606);
  auto corpus = build_injection_corpus(default_injection_specs(), 24, rng);
  for (const auto& item : corpus) {
    if (item.clean) continue;
    Belief belief{"p", "x", item.trajectory, false};
    RepairOutcome outcome = audit_repair_loop(belief, item.task, {});
    for (size_t r = 0; r < outcome.trace.size(); ++r) {
      const auto& trace = outcome.trace[r];
      // The slice is every step an audit instance implicates: the flagged
      // step plus the steps named by its offending refs (cycle edges, citing
      // inferences).
      std::set<int> slice;
      for (const auto& inst : trace.instances) {
        slice.insert(inst.step);
        for (const auto& ref : inst.evidence.offending_refs) {
          if (ref.rfind("step:", 0) == 0) {
            slice.insert(std::stoi(ref.substr(5)));
          } else if (ref.rfind("edge:", 0) == 0) {
            size_t arrow = ref.find("->");
            slice.insert(std::stoi(ref.substr(5, arrow - 5)));
            slice.insert(std::stoi(ref.substr(arrow + 2)));
          }
        }
      }
      for (const auto& op : trace.edits) {
        bool inserted_assumption = op.kind == EditOp::Kind::Insert;
        CHECK((slice.count(op.step) > 0 || inserted_assumption));
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Commit

TEST_CASE("a single candidate is always committed") {
  CommitEntry only;
  only.q_tilde = 0.1;
  only.profile.counts = {1, 1, 1, 1, 1, 1};
  CHECK(commit({only}, 1.0, {1, 1, 1, 1, 1, 1}) == 0);
}

TEST_CASE("commit arithmetic penalizes weighted residual violations") {
  CommitEntry first;
  first.q_tilde = 0.8;
  first.profile.counts = {0, 0, 1, 0, 0, 0};  // weighted 0.2 below
  CommitEntry second;
  second.q_tilde = 0.7;
  std::array<double, 6> weights{0.2, 0.2, 0.2, 1.0, 1.0, 0.2};
  // scores: 0.8 - 0.2 = 0.6 vs 0.7
  CHECK(commit({first, second}, 1.0, weights) == 1);
}

TEST_CASE("commit ties break on residual count then lowest index") {
  CommitEntry a;
  a.q_tilde = 0.5;
  CommitEntry b;
  b.q_tilde = 0.5;
  CHECK(commit({a, b}, 1.0, {1, 1, 1, 1, 1, 1}) == 0);

  // same score, fewer residuals wins: zero-weighted violations
  CommitEntry clean;
  clean.q_tilde = 0.5;
  CommitEntry noisy;
  noisy.q_tilde = 0.5;
  noisy.profile.counts = {1, 0, 0, 0, 0, 0};
  CHECK(commit({noisy, clean}, 1.0, {0, 0, 0, 0, 0, 0}) == 1);
}

TEST_CASE("commit choice is invariant under uniform quality shifts") {
  Rng rng(19);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<CommitEntry> entries(3);
    for (auto& e : entries) {
      e.q_tilde = rng.uniform();
      for (auto& c : e.profile.counts) c = static_cast<int>(rng.index(3));
    }
    std::array<double, 6> weights{0.5, 0.5, 0.5, 1.0, 1.0, 0.5};
    int before = commit(entries, 1.0, weights);
    double shift = rng.uniform() * 10.0 - 5.0;
    for (auto& e : entries) e.q_tilde += shift;
    CHECK(commit(entries, 1.0, weights) == before);
  }
}

TEST_CASE("commit rejects an empty candidate list") {
  CHECK_THROWS_AS(commit({}, 1.0, {1, 1, 1, 1, 1, 1}), std::invalid_argument);
}
