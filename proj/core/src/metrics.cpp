#include "saver/metrics.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "saver/text.hpp"

namespace saver {

namespace {

double overlap_f1(const std::vector<std::string>& pred, const std::vector<std::string>& gold) {
  if (pred.empty() && gold.empty()) return 1.0;
  if (pred.empty() || gold.empty()) return 0.0;
  std::map<std::string, int> gold_counts;
  for (const auto& t : gold) ++gold_counts[t];
  int overlap = 0;
  for (const auto& t : pred) {
    auto it = gold_counts.find(t);
    if (it != gold_counts.end() && it->second > 0) {
      --it->second;
      ++overlap;
    }
  }
  if (overlap == 0) return 0.0;
  double precision = static_cast<double>(overlap) / static_cast<double>(pred.size());
  double recall = static_cast<double>(overlap) / static_cast<double>(gold.size());
  return 2.0 * precision * recall / (precision + recall);
}

}  // namespace

EmF1 em_f1(const std::string& prediction, const std::vector<std::string>& golds) {
  if (golds.empty()) throw std::invalid_argument("em_f1 requires at least one gold answer");
  const std::string norm_pred = normalize_answer(prediction);
  const std::vector<std::string> pred_tokens = tokenize(norm_pred);

  EmF1 result;
  for (const auto& gold : golds) {
    const std::string norm_gold = normalize_answer(gold);
    if (norm_pred == norm_gold) result.em = 1;
    result.f1 = std::max(result.f1, overlap_f1(pred_tokens, tokenize(norm_gold)));
  }
  return result;
}

FaithfulnessReport faithfulness_metrics(const std::vector<TrajectoryAuditStats>& stats) {
  if (stats.empty()) throw std::invalid_argument("faithfulness_metrics requires >= 1 trajectory");
  FaithfulnessReport report;
  report.n_trajectories = static_cast<int>(stats.size());

  double viol_sum = 0.0;
  int violation_free = 0;
  double usr_sum = 0.0;
  double residual_sum = 0.0;
  int repaired = 0;
  for (const auto& s : stats) {
    viol_sum += static_cast<double>(s.violations);
    if (s.violations == 0) ++violation_free;
    usr_sum += s.length > 0
                   ? static_cast<double>(s.flagged_steps) / static_cast<double>(s.length)
                   : 0.0;
    if (s.repair_rounds_executed) {
      residual_sum += static_cast<double>(s.residual_violations);
      ++repaired;
    }
  }
  const double n = static_cast<double>(stats.size());
  report.avg_viol = viol_sum / n;
  report.vfr = static_cast<double>(violation_free) / n;
  report.usr = usr_sum / n;
  report.post_res = repaired > 0 ? residual_sum / static_cast<double>(repaired) : 0.0;
  return report;
}

}  // namespace saver
