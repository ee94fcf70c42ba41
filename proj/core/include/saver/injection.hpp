#pragma once

#include <string>
#include <vector>

#include "saver/audit.hpp"
#include "saver/rng.hpp"
#include "saver/trajectory.hpp"

namespace saver {

struct InjectionPoint {
  ViolationType type = ViolationType::UnjustifiedInference;
  int step = 0;  // 0 = generator picks a valid step
};

// Template for one corpus family: a clean evidence-grounded chain of
// base_length steps with the listed violations mutated in.
struct InjectionSpec {
  std::string name;
  int base_length = 5;
  std::vector<InjectionPoint> injected;
};

struct InjectionCase {
  std::string spec_name;
  Task task;
  Trajectory trajectory;
  std::vector<InjectionPoint> expected;  // ground-truth instance set
  bool clean = false;
};

// One spec per violation type plus two multi-violation combinations.
std::vector<InjectionSpec> default_injection_specs();

// Generates n injected trajectories (cycling over the specs) plus n clean
// controls (1:1 ratio), all schema-valid, each paired with a synthetic task
// whose contexts make rule repairs possible. Throws unless the specs cover
// all six violation types.
std::vector<InjectionCase> build_injection_corpus(const std::vector<InjectionSpec>& specs, int n,
                                                  Rng& rng);

}  // namespace saver
