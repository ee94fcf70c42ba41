#include "saver/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "saver/text.hpp"

namespace saver {

std::vector<UsrCurvePoint> usr_curve_from_audit_log(const std::string& audit_log_path) {
  std::ifstream in(audit_log_path);
  if (!in) throw std::runtime_error("cannot open audit log: " + audit_log_path);
  std::map<int, std::pair<double, int>> by_round;  // round -> (usr sum, count)
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto j = nlohmann::json::parse(line);
    int round = j.at("round").get<int>();
    int length = j.at("length").get<int>();
    int flagged = j.at("flagged_steps").get<int>();
    double usr = length > 0 ? static_cast<double>(flagged) / length : 0.0;
    auto& slot = by_round[round];
    slot.first += usr;
    slot.second += 1;
  }
  std::vector<UsrCurvePoint> points;
  for (const auto& [round, agg] : by_round) {
    points.push_back({round, agg.second > 0 ? agg.first / agg.second : 0.0, agg.second});
  }
  return points;
}

std::string render_usr_curve_svg(const std::vector<UsrCurvePoint>& points) {
  const int width = 480;
  const int height = 300;
  const int margin = 46;
  const int plot_w = width - 2 * margin;
  const int plot_h = height - 2 * margin;

  double max_usr = 0.0;
  int max_round = 1;
  for (const auto& p : points) {
    max_usr = std::max(max_usr, p.mean_usr);
    max_round = std::max(max_round, p.round);
  }
  if (max_usr <= 0.0) max_usr = 1.0;

  auto x_of = [&](int round) {
    if (max_round <= 1) return static_cast<double>(margin);
    return margin + plot_w * (static_cast<double>(round - 1) / (max_round - 1));
  };
  auto y_of = [&](double usr) { return margin + plot_h * (1.0 - usr / max_usr); };
  auto fmt = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return std::string(buf);
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  svg << "  <rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  svg << "  <line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\""
      << width - margin << "\" y2=\"" << height - margin << "\" stroke=\"black\"/>\n";
  svg << "  <line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\""
      << height - margin << "\" stroke=\"black\"/>\n";
  svg << "  <text x=\"" << width / 2 << "\" y=\"" << height - 10
      << "\" text-anchor=\"middle\" font-size=\"12\">audit-repair round</text>\n";
  svg << "  <text x=\"14\" y=\"" << height / 2
      << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 14 " << height / 2
      << ")\">mean USR</text>\n";
  svg << "  <text x=\"" << margin - 6 << "\" y=\"" << margin + 4
      << "\" text-anchor=\"end\" font-size=\"10\">" << fmt(max_usr) << "</text>\n";
  svg << "  <text x=\"" << margin - 6 << "\" y=\"" << height - margin + 4
      << "\" text-anchor=\"end\" font-size=\"10\">0</text>\n";

  if (!points.empty()) {
    svg << "  <polyline fill=\"none\" stroke=\"#1f6fb2\" stroke-width=\"2\" points=\"";
    for (size_t i = 0; i < points.size(); ++i) {
      svg << (i ? " " : "") << fmt(x_of(points[i].round)) << ',' << fmt(y_of(points[i].mean_usr));
    }
    svg << "\"/>\n";
    for (const auto& p : points) {
      svg << "  <circle cx=\"" << fmt(x_of(p.round)) << "\" cy=\"" << fmt(y_of(p.mean_usr))
          << "\" r=\"3\" fill=\"#1f6fb2\"/>\n";
      svg << "  <text x=\"" << fmt(x_of(p.round)) << "\" y=\"" << height - margin + 14
          << "\" text-anchor=\"middle\" font-size=\"10\">" << p.round << "</text>\n";
    }
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace saver
