#pragma once

#include <initializer_list>
#include <string>
#include <vector>

#include "saver/trajectory.hpp"

namespace test_support {

saver::ReasoningStep make_step(int index, saver::StepKind kind, std::string text,
                               std::initializer_list<int> premises = {},
                               std::initializer_list<saver::EvidenceRef> evidence = {},
                               std::initializer_list<int> scope = {});

// Pure chain: step k cites k-1, all Inference except a leading Claim and a
// trailing Conclusion, every inference grounded in evidence resolving
// against chain_task().
saver::Trajectory make_chain(int length);
saver::Task chain_task(int length);

// The Figure-1-style pattern: an unhedged, unscoped assumption presupposing
// the conclusion (forward premise reference closing a cycle through the
// inference chain).
saver::Trajectory presupposition_trajectory();

// Matrix oracle, independent of Eigen: recursive cofactor expansion.
double det_recursive(const std::vector<std::vector<double>>& m);

// Repo checkout paths for persona/prompt template fixtures.
std::string repo_path(const std::string& relative);

}  // namespace test_support
