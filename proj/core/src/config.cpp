#include "saver/config.hpp"

#include <fstream>

#include "saver/text.hpp"

namespace saver {

namespace {

double parse_double_or_throw(const std::string& key, const std::string& value) {
  try {
    size_t pos = 0;
    double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': bad numeric value '" + value + "'");
  }
}

int parse_int_or_throw(const std::string& key, const std::string& value) {
  auto v = parse_int(value);
  if (!v) throw ConfigError("config key '" + key + "': bad integer value '" + value + "'");
  return *v;
}

std::vector<std::string> parse_list(const std::string& value) {
  std::vector<std::string> out;
  for (auto& item : split(value, ',')) {
    std::string t = trim(item);
    if (!t.empty()) out.push_back(to_lower(t));
  }
  return out;
}

}  // namespace

RunConfig apply_config_line(RunConfig config, const std::string& key, const std::string& value) {
  if (key == "M" || key == "coalition_size") {
    config.coalition_size = parse_int_or_throw(key, value);
  } else if (key == "K" || key == "audit_subset_size") {
    config.audit_subset_size = parse_int_or_throw(key, value);
  } else if (key == "beta") {
    config.beta = parse_double_or_throw(key, value);
  } else if (key == "epsilon") {
    config.epsilon = parse_double_or_throw(key, value);
  } else if (key == "lambda") {
    config.lambda = parse_double_or_throw(key, value);
  } else if (key == "alpha") {
    config.alpha = parse_double_or_throw(key, value);
  } else if (key == "q_min") {
    config.q_min = parse_double_or_throw(key, value);
  } else if (key == "R_max" || key == "max_rounds") {
    config.max_rounds = parse_int_or_throw(key, value);
  } else if (key == "temperature") {
    config.temperature = parse_double_or_throw(key, value);
  } else if (key == "max_tokens") {
    config.max_tokens = parse_int_or_throw(key, value);
  } else if (key == "persona_dir") {
    config.persona_dir = trim(value);
  } else if (key == "prompts_dir") {
    config.prompts_dir = trim(value);
  } else if (key == "universal_lexicon") {
    config.universal_lexicon = parse_list(value);
  } else if (key == "negation_lexicon") {
    config.negation_lexicon = parse_list(value);
  } else if (key == "hedge_lexicon") {
    config.hedge_lexicon = parse_list(value);
  } else if (key == "seed") {
    config.seed = static_cast<std::uint64_t>(parse_int_or_throw(key, value));
  } else if (key == "parallel" || key == "parallelism") {
    config.parallelism = parse_int_or_throw(key, value);
  } else if (key == "w_missing_assumption") {
    config.severity_weights[0] = parse_double_or_throw(key, value);
  } else if (key == "w_invalid_precondition") {
    config.severity_weights[1] = parse_double_or_throw(key, value);
  } else if (key == "w_unjustified_inference") {
    config.severity_weights[2] = parse_double_or_throw(key, value);
  } else if (key == "w_circular_reasoning") {
    config.severity_weights[3] = parse_double_or_throw(key, value);
  } else if (key == "w_contradiction") {
    config.severity_weights[4] = parse_double_or_throw(key, value);
  } else if (key == "w_overgeneralization") {
    config.severity_weights[5] = parse_double_or_throw(key, value);
  } else {
    throw ConfigError("unknown config key: " + key);
  }
  return config;
}

RunConfig load_config_file(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    std::string key = trim(stripped.substr(0, eq));
    std::string value = trim(stripped.substr(eq + 1));
    base = apply_config_line(std::move(base), key, value);
  }
  return base;
}

}  // namespace saver
