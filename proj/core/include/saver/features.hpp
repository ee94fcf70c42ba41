#pragma once

#include <array>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "saver/trajectory.hpp"

namespace saver {

enum class DagShape { Chain, Tree, Mixed };
std::string_view to_string(DagShape shape);

// Structural embedding of a trajectory, decomposed into granularity,
// assumptive, verification, and structural-type blocks.
struct FeatureVector {
  // granularity: trajectory length, mean step text length in tokens,
  // max premise gap (step index minus its largest premise index)
  std::array<double, 3> granularity{};
  // assumptive: assumption-step ratio, fraction of assumptions with scope,
  // ratio of steps with neither premises nor evidence
  std::array<double, 3> assumptive{};
  // verification: verification-step ratio, fraction of inferences citing
  // evidence
  std::array<double, 2> verification{};
  // structural type: premise-DAG depth / L, mean branching factor,
  // one-hot {chain, tree, mixed}
  std::array<double, 2> structural{};
  DagShape shape = DagShape::Chain;

  static constexpr int kDimension = 13;

  Eigen::VectorXd to_vector() const;
  // True for entries on a count scale (L, token length, premise gap,
  // branching factor); these are z-normalized across a task's candidates
  // before the kernel sees them. Ratio and one-hot entries stay raw.
  static const std::array<bool, kDimension>& count_mask();
};

struct QualityScore {
  double raw = 0.0;         // rubric points
  double normalized = 0.0;  // in [0,1]
};

// Pure function of the trajectory; identical trajectories give identical
// vectors.
FeatureVector extract_features(const Belief& belief);

// Deterministic usability rubric, one point each: has a Conclusion step,
// claim consistent with the Conclusion text (token overlap >= 0.5), no
// schema faults, at least one evidence reference, not degraded. A degraded
// belief is capped at 0.4 regardless of other checks.
QualityScore quality_score(const Belief& belief, const Task& task);

// Z-normalizes count-scale feature entries across candidates; ratio entries
// pass through. Output vectors are what the kernel consumes.
std::vector<Eigen::VectorXd> normalize_features(const std::vector<FeatureVector>& features);

// Drops candidates with normalized quality below q_min, then restores
// dropped candidates (best quality first, ties by lowest index) until at
// least min_survivors remain. Returns sorted surviving indices (0-based).
std::vector<int> usability_filter(const std::vector<double>& q_tilde, double q_min,
                                  int min_survivors);

}  // namespace saver
