#include "saver/features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "saver/text.hpp"

namespace saver {

std::string_view to_string(DagShape shape) {
  switch (shape) {
    case DagShape::Chain: return "chain";
    case DagShape::Tree: return "tree";
    case DagShape::Mixed: return "mixed";
  }
  return "chain";
}

Eigen::VectorXd FeatureVector::to_vector() const {
  Eigen::VectorXd v(kDimension);
  int i = 0;
  for (double x : granularity) v[i++] = x;
  for (double x : assumptive) v[i++] = x;
  for (double x : verification) v[i++] = x;
  for (double x : structural) v[i++] = x;
  v[i++] = shape == DagShape::Chain ? 1.0 : 0.0;
  v[i++] = shape == DagShape::Tree ? 1.0 : 0.0;
  v[i++] = shape == DagShape::Mixed ? 1.0 : 0.0;
  return v;
}

const std::array<bool, FeatureVector::kDimension>& FeatureVector::count_mask() {
  // L, mean token length, max premise gap, branching factor mean
  static const std::array<bool, kDimension> mask = {
      true, true, true,          // granularity
      false, false, false,       // assumptive ratios
      false, false,              // verification ratios
      false, true,               // dag depth ratio, branching mean
      false, false, false};      // shape one-hot
  return mask;
}

namespace {

// Longest path (in edges) over backward premise edges; backward edges form a
// DAG by construction, so forward/self refs never cause nontermination.
int premise_dag_depth(const Trajectory& trajectory) {
  const int L = trajectory.length();
  std::vector<int> depth(static_cast<size_t>(L) + 1, 0);
  int best = 0;
  for (const auto& step : trajectory.steps) {  // ascending positions
    int d = 0;
    for (int ref : step.premise_refs) {
      if (ref >= 1 && ref < step.index) d = std::max(d, depth[static_cast<size_t>(ref)] + 1);
    }
    if (step.index >= 1 && step.index <= L) depth[static_cast<size_t>(step.index)] = d;
    best = std::max(best, d);
  }
  return best;
}

DagShape classify_shape(const Trajectory& trajectory) {
  const int L = trajectory.length();
  std::vector<int> in_degree(static_cast<size_t>(L) + 1, 0);
  int max_out = 0;
  for (const auto& step : trajectory.steps) {
    int out = 0;
    for (int ref : step.premise_refs) {
      if (ref >= 1 && ref < step.index) {
        ++out;
        ++in_degree[static_cast<size_t>(ref)];
      }
    }
    max_out = std::max(max_out, out);
  }
  int max_in = 0;
  for (int d : in_degree) max_in = std::max(max_in, d);
  if (max_in >= 2) return DagShape::Mixed;
  if (max_out >= 2) return DagShape::Tree;
  return DagShape::Chain;
}

}  // namespace

FeatureVector extract_features(const Belief& belief) {
  const Trajectory& t = belief.trajectory;
  FeatureVector f;
  const int L = t.length();
  if (L == 0) return f;
  const double dL = static_cast<double>(L);

  double token_sum = 0.0;
  double max_gap = 0.0;
  int assumptions = 0;
  int scoped_assumptions = 0;
  int unreferenced = 0;
  int verifications = 0;
  int inferences = 0;
  int inferences_with_evidence = 0;
  int branch_sum = 0;

  for (const auto& step : t.steps) {
    token_sum += static_cast<double>(tokenize(step.text).size());
    if (!step.premise_refs.empty()) {
      int max_ref = *step.premise_refs.rbegin();
      max_gap = std::max(max_gap, static_cast<double>(step.index - max_ref));
    }
    if (step.kind == StepKind::Assumption) {
      ++assumptions;
      if (!step.assumption_scope.empty()) ++scoped_assumptions;
    }
    if (step.premise_refs.empty() && step.evidence_refs.empty()) ++unreferenced;
    if (step.kind == StepKind::Verification) ++verifications;
    if (step.kind == StepKind::Inference) {
      ++inferences;
      if (!step.evidence_refs.empty()) ++inferences_with_evidence;
    }
    branch_sum += static_cast<int>(step.premise_refs.size());
  }

  f.granularity = {dL, token_sum / dL, max_gap};
  f.assumptive = {static_cast<double>(assumptions) / dL,
                  assumptions == 0 ? 0.0
                                   : static_cast<double>(scoped_assumptions) /
                                         static_cast<double>(assumptions),
                  static_cast<double>(unreferenced) / dL};
  f.verification = {static_cast<double>(verifications) / dL,
                    inferences == 0 ? 0.0
                                    : static_cast<double>(inferences_with_evidence) /
                                          static_cast<double>(inferences)};
  f.structural = {static_cast<double>(premise_dag_depth(t)) / dL,
                  static_cast<double>(branch_sum) / dL};
  f.shape = classify_shape(t);
  return f;
}

QualityScore quality_score(const Belief& belief, const Task& task) {
  (void)task;
  double points = 0.0;

  const ReasoningStep* conclusion = nullptr;
  for (const auto& step : belief.trajectory.steps) {
    if (step.kind == StepKind::Conclusion) conclusion = &step;
  }
  if (conclusion != nullptr) points += 1.0;
  if (conclusion != nullptr && token_overlap(belief.claim, conclusion->text) >= 0.5) points += 1.0;
  if (validate_trajectory(belief.trajectory).empty()) points += 1.0;

  bool has_evidence = false;
  for (const auto& step : belief.trajectory.steps) {
    if (!step.evidence_refs.empty()) has_evidence = true;
  }
  if (has_evidence) points += 1.0;
  if (!belief.degraded) points += 1.0;

  QualityScore q;
  q.raw = points;
  q.normalized = points / 5.0;
  if (belief.degraded) q.normalized = std::min(q.normalized, 0.4);
  return q;
}

std::vector<Eigen::VectorXd> normalize_features(const std::vector<FeatureVector>& features) {
  const int d = FeatureVector::kDimension;
  std::vector<Eigen::VectorXd> raw;
  raw.reserve(features.size());
  for (const auto& f : features) raw.push_back(f.to_vector());
  if (raw.empty()) return raw;

  const auto& mask = FeatureVector::count_mask();
  const double n = static_cast<double>(raw.size());
  for (int j = 0; j < d; ++j) {
    if (!mask[static_cast<size_t>(j)]) continue;
    double mean = 0.0;
    for (const auto& v : raw) mean += v[j];
    mean /= n;
    double var = 0.0;
    for (const auto& v : raw) var += (v[j] - mean) * (v[j] - mean);
    double sd = std::sqrt(var / n);
    for (auto& v : raw) v[j] = sd > 0.0 ? (v[j] - mean) / sd : 0.0;
  }
  return raw;
}

std::vector<int> usability_filter(const std::vector<double>& q_tilde, double q_min,
                                  int min_survivors) {
  std::vector<int> survivors;
  std::vector<int> dropped;
  for (size_t i = 0; i < q_tilde.size(); ++i) {
    if (q_tilde[i] < q_min) {
      dropped.push_back(static_cast<int>(i));
    } else {
      survivors.push_back(static_cast<int>(i));
    }
  }
  if (static_cast<int>(survivors.size()) < min_survivors) {
    std::stable_sort(dropped.begin(), dropped.end(), [&](int a, int b) {
      if (q_tilde[static_cast<size_t>(a)] != q_tilde[static_cast<size_t>(b)]) {
        return q_tilde[static_cast<size_t>(a)] > q_tilde[static_cast<size_t>(b)];
      }
      return a < b;
    });
    for (int idx : dropped) {
      if (static_cast<int>(survivors.size()) >= min_survivors) break;
      survivors.push_back(idx);
    }
  }
  std::sort(survivors.begin(), survivors.end());
  return survivors;
}

}  // namespace saver
