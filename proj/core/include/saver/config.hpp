#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace saver {

// Violation taxonomy order; fixed across profiles, weights, and reports.
inline constexpr int kViolationTypeCount = 6;

struct RunConfig {
  // Coalition / selection
  int coalition_size = 4;    // M
  int audit_subset_size = 2; // K
  double beta = 1.0;         // quality weighting strength
  double q_min = 0.4;        // usability filter threshold

  // Support threshold
  double epsilon = 0.5;

  // Repair
  double lambda = 0.1;       // edit-cost weight
  double alpha = 1.0;        // residual-unfaithfulness weight at commit
  // Severity weights in taxonomy order: Missing_Assumption,
  // Invalid_Precondition, Unjustified_Inference, Circular_Reasoning,
  // Contradiction, Overgeneralization.
  std::array<double, kViolationTypeCount> severity_weights{0.5, 0.5, 0.5, 1.0, 1.0, 0.5};
  int max_rounds = 10;       // R_max

  // Generation
  double temperature = 0.7;
  int max_tokens = 1024;
  std::string persona_dir = "personas";
  std::string prompts_dir = "prompts";

  // Detector lexicons (lowercase tokens)
  std::vector<std::string> universal_lexicon{"all", "always", "every", "never"};
  std::vector<std::string> negation_lexicon{"not", "no", "never"};
  std::vector<std::string> hedge_lexicon{"assume", "assuming", "suppose", "supposing",
                                         "if",     "may",      "might",   "perhaps",
                                         "possibly", "likely", "presumably"};

  std::uint64_t seed = 0;
  int parallelism = 1;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Key-value config file: one `key = value` per line, `#` comments. List
// values are comma separated. Unknown keys are an error.
RunConfig load_config_file(const std::string& path, RunConfig base = {});
RunConfig apply_config_line(RunConfig config, const std::string& key, const std::string& value);

}  // namespace saver
