#include "saver/audit.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "saver/text.hpp"

namespace saver {

namespace {

constexpr size_t kMaxCycles = 256;

bool contains_token(const std::vector<std::string>& lexicon, const std::string& token) {
  return std::find(lexicon.begin(), lexicon.end(), token) != lexicon.end();
}

bool text_has_token(const std::string& text, const std::vector<std::string>& lexicon) {
  for (const auto& tok : normalize_tokens(text)) {
    if (contains_token(lexicon, tok)) return true;
  }
  return false;
}

}  // namespace

std::string_view to_string(ViolationType type) {
  switch (type) {
    case ViolationType::MissingAssumption: return "Missing_Assumption";
    case ViolationType::InvalidPrecondition: return "Invalid_Precondition";
    case ViolationType::UnjustifiedInference: return "Unjustified_Inference";
    case ViolationType::CircularReasoning: return "Circular_Reasoning";
    case ViolationType::Contradiction: return "Contradiction";
    case ViolationType::Overgeneralization: return "Overgeneralization";
  }
  return "Missing_Assumption";
}

ViolationType violation_type_from_string(std::string_view name) {
  for (int i = 0; i < kViolationTypeCount; ++i) {
    auto t = static_cast<ViolationType>(i);
    if (to_string(t) == name) return t;
  }
  throw std::invalid_argument("unknown violation type: " + std::string(name));
}

int UnfaithfulnessProfile::total() const {
  int sum = 0;
  for (int c : counts) sum += c;
  return sum;
}

AuditOptions AuditOptions::from_config(const RunConfig& config) {
  AuditOptions options;
  options.universal_lexicon = config.universal_lexicon;
  options.negation_lexicon = config.negation_lexicon;
  options.hedge_lexicon = config.hedge_lexicon;
  return options;
}

// ---------------------------------------------------------------------------
// Circular_Reasoning

namespace {

// Elementary cycle enumeration over the in-range premise edges. Each cycle is
// discovered once with its smallest node as the DFS root; enumeration is
// capped to keep adversarial graphs from exploding.
struct CycleFinder {
  const PremiseGraph& graph;
  std::vector<std::vector<int>> cycles;
  std::vector<int> path;
  std::vector<bool> on_path;
  int root = 0;

  explicit CycleFinder(const PremiseGraph& g)
      : graph(g), on_path(static_cast<size_t>(g.node_count) + 1, false) {}

  void dfs(int node) {
    if (cycles.size() >= kMaxCycles) return;
    path.push_back(node);
    on_path[static_cast<size_t>(node)] = true;
    for (int next : graph.refs_of(node)) {
      if (next < 1 || next > graph.node_count) continue;
      if (next == root) {
        cycles.push_back(path);
      } else if (next > root && !on_path[static_cast<size_t>(next)]) {
        dfs(next);
      }
    }
    on_path[static_cast<size_t>(node)] = false;
    path.pop_back();
  }

  void run() {
    for (root = 1; root <= graph.node_count; ++root) {
      if (cycles.size() >= kMaxCycles) break;
      dfs(root);
    }
  }
};

}  // namespace

std::vector<ViolationInstance> detect_circular(const Trajectory& trajectory) {
  PremiseGraph graph = premise_graph(trajectory);
  CycleFinder finder(graph);
  finder.run();

  std::vector<ViolationInstance> instances;
  std::set<int> seen_steps;
  for (const auto& cycle : finder.cycles) {
    int at = *std::max_element(cycle.begin(), cycle.end());
    if (!seen_steps.insert(at).second) continue;

    ViolationInstance inst;
    inst.type = ViolationType::CircularReasoning;
    inst.step = at;
    inst.evidence.detector_id = "circular_premises";
    nlohmann::ordered_json edges = nlohmann::ordered_json::array();
    std::ostringstream desc;
    for (size_t i = 0; i < cycle.size(); ++i) {
      int u = cycle[i];
      int v = cycle[(i + 1) % cycle.size()];
      edges.push_back({u, v});
      inst.evidence.offending_refs.push_back("edge:" + std::to_string(u) + "->" +
                                             std::to_string(v));
      desc << u << " -> ";
    }
    desc << cycle.front();
    inst.evidence.explanation = "premise references form the cycle " + desc.str();
    inst.acceptance.criterion_id = "remove_cycle_edge";
    inst.acceptance.params = {{"step", at}, {"edges", edges}};
    instances.push_back(std::move(inst));
  }
  return instances;
}

// ---------------------------------------------------------------------------
// Support detectors

namespace {

// Steps reachable from `start` through premise references (visited-set
// bounded, so reference cycles terminate), including `start` itself.
std::set<int> premise_closure(const Trajectory& trajectory, int start) {
  std::set<int> visited;
  std::vector<int> stack{start};
  while (!stack.empty()) {
    int node = stack.back();
    stack.pop_back();
    if (!visited.insert(node).second) continue;
    const ReasoningStep* step = trajectory.step_at(node);
    if (step == nullptr) continue;
    for (int ref : step->premise_refs) {
      if (trajectory.step_at(ref) != nullptr) stack.push_back(ref);
    }
  }
  return visited;
}

int closure_evidence_sentences(const Trajectory& trajectory, int start) {
  std::set<EvidenceRef> cited;
  for (int idx : premise_closure(trajectory, start)) {
    const ReasoningStep* step = trajectory.step_at(idx);
    if (step == nullptr) continue;
    cited.insert(step->evidence_refs.begin(), step->evidence_refs.end());
  }
  return static_cast<int>(cited.size());
}

}  // namespace

std::vector<ViolationInstance> detect_support(const Trajectory& trajectory, const Task& task,
                                              const AuditOptions& options) {
  std::vector<ViolationInstance> instances;
  const int L = trajectory.length();

  for (const auto& step : trajectory.steps) {
    // Unjustified_Inference: an inference with nothing behind it.
    if (step.kind == StepKind::Inference && step.premise_refs.empty() &&
        step.evidence_refs.empty()) {
      ViolationInstance inst;
      inst.type = ViolationType::UnjustifiedInference;
      inst.step = step.index;
      inst.evidence.detector_id = "unjustified_inference";
      inst.evidence.explanation = "inference step cites no premises and no evidence";
      inst.acceptance.criterion_id = "attach_evidence";
      inst.acceptance.params = {{"step", step.index}};
      instances.push_back(std::move(inst));
    }

    // Invalid_Precondition: references that do not resolve.
    std::vector<std::string> dangling;
    for (int ref : step.premise_refs) {
      if (ref < 1 || ref > L) dangling.push_back("step:" + std::to_string(ref));
    }
    if (options.check_evidence_resolution) {
      for (const auto& ev : step.evidence_refs) {
        if (!task.resolves(ev)) {
          dangling.push_back(ev.doc + ":" + std::to_string(ev.sent));
        }
      }
    }
    if (!dangling.empty()) {
      ViolationInstance inst;
      inst.type = ViolationType::InvalidPrecondition;
      inst.step = step.index;
      inst.evidence.detector_id = "dangling_reference";
      inst.evidence.offending_refs = dangling;
      inst.evidence.explanation = "step cites premises or evidence that do not exist";
      inst.acceptance.criterion_id = "fix_reference";
      inst.acceptance.params = {{"step", step.index}};
      instances.push_back(std::move(inst));
    }
  }

  // Missing_Assumption: an assumption that inferences lean on without scope
  // or hedge, flagged at the assumption step.
  for (const auto& assumption : trajectory.steps) {
    if (assumption.kind != StepKind::Assumption) continue;
    std::vector<int> citing;
    for (const auto& step : trajectory.steps) {
      if (step.kind == StepKind::Inference && step.premise_refs.count(assumption.index) > 0) {
        citing.push_back(step.index);
      }
    }
    if (citing.empty()) continue;
    bool scoped = !assumption.assumption_scope.empty();
    bool hedged = text_has_token(assumption.text, options.hedge_lexicon);
    if (scoped && hedged) continue;

    ViolationInstance inst;
    inst.type = ViolationType::MissingAssumption;
    inst.step = assumption.index;
    inst.evidence.detector_id = "unscoped_assumption";
    for (int c : citing) inst.evidence.offending_refs.push_back("step:" + std::to_string(c));
    inst.evidence.explanation =
        scoped ? "assumption lacks hedging language but is used by inference steps"
               : "assumption has no declared scope but is used by inference steps";
    inst.acceptance.criterion_id = "scope_assumption";
    inst.acceptance.params = {{"assumption_step", assumption.index}, {"citing_steps", citing}};
    instances.push_back(std::move(inst));
  }

  // Overgeneralization: a universally quantified conclusion resting on at
  // most one cited evidence sentence.
  for (const auto& step : trajectory.steps) {
    if (step.kind != StepKind::Conclusion) continue;
    std::vector<std::string> universals;
    for (const auto& tok : normalize_tokens(step.text)) {
      if (contains_token(options.universal_lexicon, tok)) universals.push_back(tok);
    }
    if (universals.empty()) continue;
    int cited = closure_evidence_sentences(trajectory, step.index);
    if (cited > 1) continue;

    ViolationInstance inst;
    inst.type = ViolationType::Overgeneralization;
    inst.step = step.index;
    inst.evidence.detector_id = "universal_conclusion";
    for (const auto& u : universals) inst.evidence.offending_refs.push_back("token:" + u);
    inst.evidence.explanation = "universally quantified conclusion cites " +
                                std::to_string(cited) + " evidence sentence(s) in its closure";
    inst.acceptance.criterion_id = "hedge_conclusion";
    inst.acceptance.params = {{"step", step.index}};
    instances.push_back(std::move(inst));
  }

  return instances;
}

// ---------------------------------------------------------------------------
// Contradiction

namespace {

struct NegationView {
  std::vector<std::string> stripped;  // normalized tokens minus negations
  int negations = 0;
};

NegationView negation_view(const std::string& text, const std::vector<std::string>& lexicon) {
  NegationView view;
  for (const auto& tok : normalize_tokens(text)) {
    if (contains_token(lexicon, tok)) {
      ++view.negations;
    } else {
      view.stripped.push_back(tok);
    }
  }
  return view;
}

ViolationInstance contradiction_instance(int earlier, int later, const std::string& detector,
                                         const std::string& explanation) {
  ViolationInstance inst;
  inst.type = ViolationType::Contradiction;
  inst.step = later;
  inst.evidence.detector_id = detector;
  inst.evidence.offending_refs.push_back("step:" + std::to_string(earlier));
  inst.evidence.explanation = explanation;
  inst.acceptance.criterion_id = "revise_step_text";
  inst.acceptance.params = {{"step", later}, {"conflicting_with", earlier}};
  return inst;
}

}  // namespace

std::vector<ViolationInstance> detect_contradiction(const Trajectory& trajectory,
                                                    const AuditOptions& options,
                                                    std::vector<std::string>* warnings) {
  std::vector<ViolationInstance> instances;
  std::vector<const ReasoningStep*> candidates;
  for (const auto& step : trajectory.steps) {
    if (step.kind == StepKind::Claim || step.kind == StepKind::Inference) {
      candidates.push_back(&step);
    }
  }
  for (size_t i = 0; i < candidates.size(); ++i) {
    NegationView a = negation_view(candidates[i]->text, options.negation_lexicon);
    for (size_t j = i + 1; j < candidates.size(); ++j) {
      NegationView b = negation_view(candidates[j]->text, options.negation_lexicon);
      if (a.stripped.empty() || a.stripped != b.stripped) continue;
      if (a.negations == b.negations) continue;
      int earlier = std::min(candidates[i]->index, candidates[j]->index);
      int later = std::max(candidates[i]->index, candidates[j]->index);
      instances.push_back(contradiction_instance(
          earlier, later, "negation_pair",
          "step text matches step " + std::to_string(earlier) + " up to a negation token"));
    }
  }

  if (options.mode == AuditMode::RuleLlm && options.judge != nullptr) {
    std::ostringstream steps_text;
    for (const auto& step : trajectory.steps) {
      if (step.kind == StepKind::Claim) {
        steps_text << '[' << step.index << "] " << step.text << '\n';
      }
    }
    std::string prompt = options.judge_prompt_template;
    size_t pos = prompt.find("{steps}");
    if (pos != std::string::npos) prompt.replace(pos, 7, steps_text.str());
    GenRequest req;
    req.system_prompt = "You are a logical consistency judge.";
    req.user_prompt = prompt;
    req.temperature = 0.0;
    try {
      GenResponse resp = options.judge->generate(req);
      size_t open = resp.text.find('{');
      size_t close = resp.text.rfind('}');
      if (open == std::string::npos || close == std::string::npos || close < open) {
        throw std::runtime_error("no JSON object in judge output");
      }
      auto j = nlohmann::json::parse(resp.text.substr(open, close - open + 1));
      if (j.value("conflict", false)) {
        auto steps = j.at("steps");
        int a = steps.at(0).get<int>();
        int b = steps.at(1).get<int>();
        instances.push_back(contradiction_instance(std::min(a, b), std::max(a, b),
                                                   "llm_judge",
                                                   "judge reported an entailment conflict"));
      }
    } catch (const std::exception& e) {
      if (warnings) warnings->push_back(std::string("contradiction judge skipped: ") + e.what());
    }
  }
  return instances;
}

// ---------------------------------------------------------------------------

std::vector<ViolationInstance> audit(const Trajectory& trajectory, const Task& task,
                                     const AuditOptions& options,
                                     std::vector<std::string>* warnings) {
  std::vector<ViolationInstance> all;
  for (auto& inst : detect_circular(trajectory)) all.push_back(std::move(inst));
  for (auto& inst : detect_support(trajectory, task, options)) all.push_back(std::move(inst));
  for (auto& inst : detect_contradiction(trajectory, options, warnings)) {
    all.push_back(std::move(inst));
  }

  // Dedup by (type, step); rule detectors ran first, so they win.
  std::set<std::pair<int, int>> seen;
  std::vector<ViolationInstance> unique;
  for (auto& inst : all) {
    if (seen.insert({static_cast<int>(inst.type), inst.step}).second) {
      unique.push_back(std::move(inst));
    }
  }
  std::sort(unique.begin(), unique.end(), [](const ViolationInstance& a,
                                             const ViolationInstance& b) {
    if (a.step != b.step) return a.step < b.step;
    return static_cast<int>(a.type) < static_cast<int>(b.type);
  });
  return unique;
}

UnfaithfulnessProfile profile(const std::vector<ViolationInstance>& instances) {
  UnfaithfulnessProfile p;
  for (const auto& inst : instances) {
    ++p.counts[static_cast<size_t>(inst.type)];
  }
  return p;
}

SupportAssessment assessment_from_audit(const Trajectory& trajectory,
                                        const std::vector<ViolationInstance>& instances,
                                        double epsilon) {
  SupportAssessment assessment;
  assessment.threshold = epsilon;
  assessment.scores.assign(static_cast<size_t>(trajectory.length()), 1.0);
  for (const auto& inst : instances) {
    for (size_t pos = 0; pos < trajectory.steps.size(); ++pos) {
      if (trajectory.steps[pos].index == inst.step) assessment.scores[pos] = 0.0;
    }
  }
  return assessment;
}

int distinct_flagged_steps(const std::vector<ViolationInstance>& instances) {
  std::set<int> steps;
  for (const auto& inst : instances) steps.insert(inst.step);
  return static_cast<int>(steps.size());
}

nlohmann::ordered_json instance_to_json(const ViolationInstance& instance) {
  return nlohmann::ordered_json{
      {"type", std::string(to_string(instance.type))},
      {"step", instance.step},
      {"detector", instance.evidence.detector_id},
      {"offending_refs", instance.evidence.offending_refs},
      {"explanation", instance.evidence.explanation},
      {"acceptance",
       {{"id", instance.acceptance.criterion_id}, {"params", instance.acceptance.params}}}};
}

ViolationInstance instance_from_json(const nlohmann::ordered_json& j) {
  ViolationInstance inst;
  inst.type = violation_type_from_string(j.at("type").get<std::string>());
  inst.step = j.at("step").get<int>();
  inst.evidence.detector_id = j.value("detector", std::string{});
  if (j.contains("offending_refs")) {
    for (const auto& r : j.at("offending_refs")) {
      inst.evidence.offending_refs.push_back(r.get<std::string>());
    }
  }
  inst.evidence.explanation = j.value("explanation", std::string{});
  if (j.contains("acceptance")) {
    inst.acceptance.criterion_id = j.at("acceptance").value("id", std::string{});
    if (j.at("acceptance").contains("params")) {
      inst.acceptance.params = j.at("acceptance").at("params");
    }
  }
  return inst;
}

}  // namespace saver
