#pragma once

#include <string>
#include <vector>

namespace saver {

struct UsrCurvePoint {
  int round = 0;
  double mean_usr = 0.0;
  int n_beliefs = 0;
};

// Mean unfaithful-step rate per audit round, read from a run directory's
// audit_log.jsonl.
std::vector<UsrCurvePoint> usr_curve_from_audit_log(const std::string& audit_log_path);

// Minimal standalone SVG line chart of USR over audit-repair rounds.
std::string render_usr_curve_svg(const std::vector<UsrCurvePoint>& points);

}  // namespace saver
