#pragma once

#include <optional>
#include <string>
#include <vector>

#include "saver/audit.hpp"
#include "saver/backend.hpp"
#include "saver/config.hpp"
#include "saver/trajectory.hpp"

namespace saver {

enum class EditKind {
  AttachEvidence,
  InsertAssumption,
  ScopeAssumption,
  RemoveCycleEdge,
  ReviseStepText,
  FixReference,
  HedgeConclusion,
};

std::string_view to_string(EditKind kind);

// One constraint per violation instance (theta in the repair constraint set).
struct RepairConstraint {
  ViolationInstance source;
  EditKind prescribed_edit = EditKind::AttachEvidence;
  nlohmann::ordered_json sat_params;
};

RepairConstraint constraint_from_instance(const ViolationInstance& instance);
std::vector<RepairConstraint> constraints_from_instances(
    const std::vector<ViolationInstance>& instances);

struct EditOp {
  enum class Kind { Insert, Delete, Modify };
  Kind kind = Kind::Modify;
  int step = 0;  // 1-based index in the edited trajectory (Insert/Modify) or
                 // the base trajectory (Delete)
  std::string description;
};

std::string_view to_string(EditOp::Kind kind);

// Unit-cost step edit distance between two trajectories, with the op list
// realizing it (LCS alignment on step equality).
std::vector<EditOp> step_edit_ops(const Trajectory& base, const Trajectory& edited);

struct RepairCandidate {
  Trajectory trajectory;      // schema-valid
  std::vector<EditOp> edit_ops;  // diff against the pre-round trajectory
  int delta = 0;              // |edit_ops|
  std::string description;    // deterministic tie-break key
};

struct RepairOptions {
  double lambda = 0.1;
  bool use_llm = false;
  TextBackend* backend = nullptr;  // llm proposal mode
  std::string repair_prompt_template;
  int proposals_per_constraint = 3;
  AuditOptions audit;  // lexicons and detector settings used by Sat
};

// Verifiable acceptance check for one constraint. Deterministic in rule
// mode. Unknown criterion ids are an error.
bool sat(const Trajectory& trajectory, const RepairConstraint& constraint, const Task& task,
         const RepairOptions& options);

// Candidate edits for one constraint. Rule mode emits deterministic
// templated edits; llm mode asks the backend to rewrite only the flagged
// step. Candidates that fail schema validation are discarded; an empty
// result feeds non-convergence accounting. `pre_round` anchors the delta
// computation when a round has already edited the trajectory.
std::vector<RepairCandidate> propose_repairs(const Trajectory& trajectory,
                                             const RepairConstraint& constraint, const Task& task,
                                             const RepairOptions& options,
                                             const Trajectory* pre_round = nullptr);

// The per-constraint objective: (#still-unsatisfied constraints after
// applying the candidate) + lambda * delta, ties by smaller delta then
// lexicographically smaller description. Returns the winner's position in
// `candidates`, or -1 when the list is empty.
int select_repair_candidate(const std::vector<RepairCandidate>& candidates,
                            const std::vector<RepairConstraint>& constraints, const Task& task,
                            const RepairOptions& options);

// One greedy pass over the constraints in ascending flagged-step order,
// applying each constraint's select_repair_candidate winner; an edit is only
// applied when it does not raise the unsatisfied count.
Trajectory repair_round(const Trajectory& trajectory, std::vector<RepairConstraint> constraints,
                        const Task& task, const RepairOptions& options,
                        std::vector<EditOp>* edits_out = nullptr);

// One audit of the trajectory plus the repair pass that followed it (the
// final verification audit carries no edits).
struct RoundTrace {
  int round = 0;  // 1-based audit index
  std::vector<ViolationInstance> instances;
  std::vector<EditOp> edits;
  int trajectory_length = 0;

  int flagged_steps() const;
  double usr() const;
};

struct RepairOutcome {
  Trajectory final_trajectory;
  int rounds_used = 0;
  std::vector<ViolationInstance> residual;
  bool converged = false;  // converged implies residual is empty
  std::vector<RoundTrace> trace;
  // Repair rounds that applied at least one edit; feeds Post-Res accounting.
  int repair_rounds_executed = 0;
};

struct LoopOptions {
  int max_rounds = 10;  // R_max
  RepairOptions repair;
};

// Alternates audit -> constraints -> repair until no violations remain,
// the round makes no edit (stall), or R_max repair rounds have run. A
// zero-violation input passes through untouched.
RepairOutcome audit_repair_loop(const Belief& belief, const Task& task,
                                const LoopOptions& options);

struct CommitEntry {
  double q_tilde = 0.0;
  UnfaithfulnessProfile profile;
};

// Final belief commitment: argmax of q minus the severity-weighted residual
// profile. Ties break by fewer total residual violations, then lowest index.
int commit(const std::vector<CommitEntry>& entries, double alpha,
           const std::array<double, kViolationTypeCount>& weights);

}  // namespace saver
