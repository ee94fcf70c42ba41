#pragma once

#include <string>
#include <vector>

namespace saver {

struct EmF1 {
  int em = 0;      // 0/1
  double f1 = 0.0; // token-level, max over golds
};

// SQuAD-style scoring: answers are normalized (lowercase, strip punctuation
// and articles, collapse whitespace); EM is equality with any gold, F1 the
// best token-multiset overlap. Throws when golds is empty.
EmF1 em_f1(const std::string& prediction, const std::vector<std::string>& golds);

// Inputs to the run-level faithfulness metrics, one per committed belief.
struct TrajectoryAuditStats {
  int violations = 0;          // |V(final trajectory)|
  int flagged_steps = 0;       // distinct flagged step indices
  int length = 0;              // L
  bool repair_rounds_executed = false;
  int residual_violations = 0; // after the loop, when it executed
};

struct FaithfulnessReport {
  double avg_viol = 0.0;
  double vfr = 0.0;
  double usr = 0.0;
  double post_res = 0.0;
  int n_trajectories = 0;
};

// Avg Viol: mean violation count. VFR: fraction violation-free. USR: mean of
// (distinct flagged steps / L). Post-Res: mean residual count over
// trajectories where the repair loop executed at least one repair round.
FaithfulnessReport faithfulness_metrics(const std::vector<TrajectoryAuditStats>& stats);

}  // namespace saver
