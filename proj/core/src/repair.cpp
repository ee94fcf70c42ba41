#include "saver/repair.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "saver/text.hpp"

namespace saver {

std::string_view to_string(EditKind kind) {
  switch (kind) {
    case EditKind::AttachEvidence: return "AttachEvidence";
    case EditKind::InsertAssumption: return "InsertAssumption";
    case EditKind::ScopeAssumption: return "ScopeAssumption";
    case EditKind::RemoveCycleEdge: return "RemoveCycleEdge";
    case EditKind::ReviseStepText: return "ReviseStepText";
    case EditKind::FixReference: return "FixReference";
    case EditKind::HedgeConclusion: return "HedgeConclusion";
  }
  return "AttachEvidence";
}

std::string_view to_string(EditOp::Kind kind) {
  switch (kind) {
    case EditOp::Kind::Insert: return "insert";
    case EditOp::Kind::Delete: return "delete";
    case EditOp::Kind::Modify: return "modify";
  }
  return "modify";
}

RepairConstraint constraint_from_instance(const ViolationInstance& instance) {
  RepairConstraint c;
  c.source = instance;
  c.sat_params = instance.acceptance.params;
  switch (instance.type) {
    case ViolationType::MissingAssumption: c.prescribed_edit = EditKind::ScopeAssumption; break;
    case ViolationType::InvalidPrecondition: c.prescribed_edit = EditKind::FixReference; break;
    case ViolationType::UnjustifiedInference: c.prescribed_edit = EditKind::AttachEvidence; break;
    case ViolationType::CircularReasoning: c.prescribed_edit = EditKind::RemoveCycleEdge; break;
    case ViolationType::Contradiction: c.prescribed_edit = EditKind::ReviseStepText; break;
    case ViolationType::Overgeneralization: c.prescribed_edit = EditKind::HedgeConclusion; break;
  }
  return c;
}

std::vector<RepairConstraint> constraints_from_instances(
    const std::vector<ViolationInstance>& instances) {
  std::vector<RepairConstraint> out;
  out.reserve(instances.size());
  for (const auto& inst : instances) out.push_back(constraint_from_instance(inst));
  return out;
}

// ---------------------------------------------------------------------------
// Edit-distance diff

std::vector<EditOp> step_edit_ops(const Trajectory& base, const Trajectory& edited) {
  const size_t n = base.steps.size();
  const size_t m = edited.steps.size();
  // Levenshtein DP over steps with unit costs.
  std::vector<std::vector<int>> dist(n + 1, std::vector<int>(m + 1, 0));
  for (size_t i = 0; i <= n; ++i) dist[i][0] = static_cast<int>(i);
  for (size_t j = 0; j <= m; ++j) dist[0][j] = static_cast<int>(j);
  for (size_t i = 1; i <= n; ++i) {
    for (size_t j = 1; j <= m; ++j) {
      int sub = dist[i - 1][j - 1] + (base.steps[i - 1] == edited.steps[j - 1] ? 0 : 1);
      dist[i][j] = std::min({sub, dist[i - 1][j] + 1, dist[i][j - 1] + 1});
    }
  }
  std::vector<EditOp> ops;
  size_t i = n;
  size_t j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 &&
        dist[i][j] == dist[i - 1][j - 1] + (base.steps[i - 1] == edited.steps[j - 1] ? 0 : 1)) {
      if (!(base.steps[i - 1] == edited.steps[j - 1])) {
        ops.push_back({EditOp::Kind::Modify, edited.steps[j - 1].index,
                       "modify step " + std::to_string(edited.steps[j - 1].index)});
      }
      --i;
      --j;
    } else if (j > 0 && dist[i][j] == dist[i][j - 1] + 1) {
      ops.push_back({EditOp::Kind::Insert, edited.steps[j - 1].index,
                     "insert step " + std::to_string(edited.steps[j - 1].index)});
      --j;
    } else {
      ops.push_back({EditOp::Kind::Delete, base.steps[i - 1].index,
                     "delete step " + std::to_string(base.steps[i - 1].index)});
      --i;
    }
  }
  std::reverse(ops.begin(), ops.end());
  return ops;
}

// ---------------------------------------------------------------------------
// Sat

namespace {

std::vector<int> int_list(const nlohmann::ordered_json& j, const char* key) {
  std::vector<int> out;
  if (j.contains(key)) {
    for (const auto& v : j.at(key)) out.push_back(v.get<int>());
  }
  return out;
}

bool step_text_has_token(const ReasoningStep& step, const std::vector<std::string>& lexicon) {
  for (const auto& tok : normalize_tokens(step.text)) {
    if (std::find(lexicon.begin(), lexicon.end(), tok) != lexicon.end()) return true;
  }
  return false;
}

int closure_evidence_count(const Trajectory& trajectory, int start) {
  std::set<int> visited;
  std::vector<int> stack{start};
  std::set<EvidenceRef> cited;
  while (!stack.empty()) {
    int node = stack.back();
    stack.pop_back();
    if (!visited.insert(node).second) continue;
    const ReasoningStep* step = trajectory.step_at(node);
    if (step == nullptr) continue;
    cited.insert(step->evidence_refs.begin(), step->evidence_refs.end());
    for (int ref : step->premise_refs) stack.push_back(ref);
  }
  return static_cast<int>(cited.size());
}

}  // namespace

bool sat(const Trajectory& trajectory, const RepairConstraint& constraint, const Task& task,
         const RepairOptions& options) {
  const std::string& id = constraint.source.acceptance.criterion_id;
  const auto& params = constraint.sat_params;

  if (id == "attach_evidence") {
    const ReasoningStep* step = trajectory.step_at(params.at("step").get<int>());
    if (step == nullptr) return false;
    for (const auto& ev : step->evidence_refs) {
      if (task.resolves(ev)) return true;
    }
    return false;
  }

  if (id == "fix_reference") {
    const ReasoningStep* step = trajectory.step_at(params.at("step").get<int>());
    if (step == nullptr) return true;  // flagged step no longer exists
    for (int ref : step->premise_refs) {
      if (ref < 1 || ref > trajectory.length()) return false;
    }
    for (const auto& ev : step->evidence_refs) {
      if (options.audit.check_evidence_resolution && !task.resolves(ev)) return false;
    }
    return true;
  }

  if (id == "remove_cycle_edge") {
    // The recorded cycle no longer closes once any of its edges is gone.
    for (const auto& edge : params.at("edges")) {
      int u = edge.at(0).get<int>();
      int v = edge.at(1).get<int>();
      const ReasoningStep* step = trajectory.step_at(u);
      if (step == nullptr || step->premise_refs.count(v) == 0) return true;
    }
    return false;
  }

  if (id == "scope_assumption") {
    // Satisfied when a hedged Assumption with a scope covering all citing
    // steps sits upstream of them (the flagged assumption itself, or an
    // inserted replacement).
    std::vector<int> citing = int_list(params, "citing_steps");
    int upstream_of = citing.empty() ? trajectory.length() + 1
                                     : *std::min_element(citing.begin(), citing.end());
    for (const auto& step : trajectory.steps) {
      if (step.kind != StepKind::Assumption) continue;
      if (step.index > upstream_of) continue;
      if (step.assumption_scope.empty()) continue;
      if (!step_text_has_token(step, options.audit.hedge_lexicon)) continue;
      bool covers = true;
      for (int c : citing) {
        if (step.assumption_scope.count(c) == 0) covers = false;
      }
      if (covers) return true;
    }
    return false;
  }

  if (id == "hedge_conclusion") {
    const ReasoningStep* step = trajectory.step_at(params.at("step").get<int>());
    if (step == nullptr) return true;
    if (!step_text_has_token(*step, options.audit.universal_lexicon)) return true;
    return closure_evidence_count(trajectory, step->index) >= 2;
  }

  if (id == "revise_step_text") {
    // Re-run the source detector and require no instance at (type, step).
    std::vector<ViolationInstance> found =
        detect_contradiction(trajectory, options.audit, nullptr);
    int at = params.at("step").get<int>();
    for (const auto& inst : found) {
      if (inst.step == at) return false;
    }
    return true;
  }

  throw std::runtime_error("unknown acceptance criterion: " + id);
}

// ---------------------------------------------------------------------------
// Rule-mode repair templates

namespace {

struct SentenceRef {
  EvidenceRef ref;
  int shared_tokens = 0;
};

// Context sentences ranked by shared normalized token count with `text`,
// document order breaking ties.
std::vector<SentenceRef> rank_context_sentences(const Task& task, const std::string& text) {
  std::vector<std::string> step_tokens = normalize_tokens(text);
  std::sort(step_tokens.begin(), step_tokens.end());
  step_tokens.erase(std::unique(step_tokens.begin(), step_tokens.end()), step_tokens.end());

  std::vector<SentenceRef> ranked;
  for (const auto& doc : task.contexts) {
    for (size_t s = 0; s < doc.sentences.size(); ++s) {
      std::vector<std::string> sent_tokens = normalize_tokens(doc.sentences[s]);
      std::sort(sent_tokens.begin(), sent_tokens.end());
      sent_tokens.erase(std::unique(sent_tokens.begin(), sent_tokens.end()), sent_tokens.end());
      std::vector<std::string> shared;
      std::set_intersection(step_tokens.begin(), step_tokens.end(), sent_tokens.begin(),
                            sent_tokens.end(), std::back_inserter(shared));
      ranked.push_back({{doc.doc_id, static_cast<int>(s)}, static_cast<int>(shared.size())});
    }
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const SentenceRef& a, const SentenceRef& b) {
                     return a.shared_tokens > b.shared_tokens;
                   });
  return ranked;
}

Trajectory with_modified_step(const Trajectory& base, int index,
                              const std::function<void(ReasoningStep&)>& edit) {
  Trajectory out = base;
  for (auto& step : out.steps) {
    if (step.index == index) edit(step);
  }
  return out;
}

RepairCandidate make_candidate(const Trajectory& pre_round, Trajectory edited,
                               std::string description) {
  RepairCandidate cand;
  cand.edit_ops = step_edit_ops(pre_round, edited);
  cand.delta = static_cast<int>(cand.edit_ops.size());
  cand.trajectory = std::move(edited);
  cand.description = std::move(description);
  return cand;
}

std::string ensure_hedged(const std::string& text) {
  return "Assuming that " + text;
}

// Replace universal quantifiers with bounded counterparts, preserving
// the original casing of untouched tokens.
std::string soften_universals(const std::string& text,
                              const std::vector<std::string>& lexicon) {
  static const std::map<std::string, std::string> replacements{
      {"all", "most"}, {"always", "often"}, {"every", "many"}, {"never", "rarely"}};
  std::ostringstream out;
  bool first = true;
  for (const auto& tok : tokenize(text)) {
    std::string key = normalize_answer(tok);
    std::string emit = tok;
    if (std::find(lexicon.begin(), lexicon.end(), key) != lexicon.end()) {
      auto it = replacements.find(key);
      emit = it != replacements.end() ? it->second : "some";
    }
    out << (first ? "" : " ") << emit;
    first = false;
  }
  return out.str();
}

std::string strip_negations(const std::string& text,
                            const std::vector<std::string>& lexicon) {
  std::ostringstream out;
  bool first = true;
  for (const auto& tok : tokenize(text)) {
    if (std::find(lexicon.begin(), lexicon.end(), normalize_answer(tok)) != lexicon.end()) {
      continue;
    }
    out << (first ? "" : " ") << tok;
    first = false;
  }
  return out.str();
}

// Insert a new step before position `before_index`, renumbering subsequent
// steps and remapping premise/scope references.
Trajectory with_inserted_step(const Trajectory& base, int before_index, ReasoningStep step) {
  Trajectory out;
  auto remap = [&](int ref) { return ref >= before_index ? ref + 1 : ref; };
  step.index = before_index;
  for (const auto& s : base.steps) {
    if (s.index == before_index) out.steps.push_back(step);
    ReasoningStep moved = s;
    moved.index = remap(s.index);
    std::set<int> premises;
    for (int p : s.premise_refs) premises.insert(remap(p));
    moved.premise_refs = std::move(premises);
    std::set<int> scope;
    for (int sc : s.assumption_scope) scope.insert(remap(sc));
    moved.assumption_scope = std::move(scope);
    out.steps.push_back(std::move(moved));
  }
  if (before_index > base.length()) out.steps.push_back(step);  // append
  return out;
}

std::vector<RepairCandidate> llm_propose(const Trajectory& trajectory,
                                         const RepairConstraint& constraint, const Task& task,
                                         const RepairOptions& options,
                                         const Trajectory& pre_round) {
  std::vector<RepairCandidate> candidates;
  if (options.backend == nullptr) return candidates;
  const ReasoningStep* flagged = trajectory.step_at(constraint.source.step);
  if (flagged == nullptr) return candidates;

  std::string prompt = options.repair_prompt_template;
  auto fill = [&prompt](const std::string& key, const std::string& value) {
    size_t pos = prompt.find(key);
    if (pos != std::string::npos) prompt.replace(pos, key.size(), value);
  };
  std::ostringstream step_line;
  step_line << '[' << flagged->index << "] " << to_string(flagged->kind) << ' ' << flagged->text;
  fill("{step}", step_line.str());
  fill("{explanation}", constraint.source.evidence.explanation);
  fill("{question}", task.question);

  for (int attempt = 0; attempt < options.proposals_per_constraint; ++attempt) {
    GenRequest req;
    req.system_prompt = "Rewrite exactly the flagged reasoning step.";
    req.user_prompt = prompt;
    req.temperature = 0.7;
    req.seed = attempt;
    try {
      GenResponse resp = options.backend->generate(req);
      std::string text = trim(resp.text);
      if (text.empty()) continue;
      Trajectory edited = with_modified_step(trajectory, flagged->index,
                                             [&](ReasoningStep& s) { s.text = text; });
      if (!validate_trajectory(edited).empty()) continue;
      candidates.push_back(make_candidate(
          pre_round, std::move(edited),
          "llm rewrite step " + std::to_string(flagged->index) + " v" + std::to_string(attempt)));
    } catch (const BackendError&) {
      break;  // degrade to whatever rule candidates exist
    }
  }
  return candidates;
}

}  // namespace

std::vector<RepairCandidate> propose_repairs(const Trajectory& trajectory,
                                             const RepairConstraint& constraint, const Task& task,
                                             const RepairOptions& options,
                                             const Trajectory* pre_round_ptr) {
  const Trajectory& pre_round = pre_round_ptr ? *pre_round_ptr : trajectory;
  const auto& params = constraint.sat_params;
  std::vector<RepairCandidate> candidates;

  switch (constraint.prescribed_edit) {
    case EditKind::AttachEvidence: {
      int at = params.at("step").get<int>();
      const ReasoningStep* step = trajectory.step_at(at);
      if (step == nullptr) break;
      auto ranked = rank_context_sentences(task, step->text);
      int emitted = 0;
      for (const auto& sent : ranked) {
        if (emitted >= options.proposals_per_constraint) break;
        Trajectory edited = with_modified_step(
            trajectory, at, [&](ReasoningStep& s) { s.evidence_refs.insert(sent.ref); });
        candidates.push_back(make_candidate(
            pre_round, std::move(edited),
            "attach evidence " + sent.ref.doc + ":" + std::to_string(sent.ref.sent) +
                " to step " + std::to_string(at)));
        ++emitted;
      }
      break;
    }

    case EditKind::FixReference: {
      int at = params.at("step").get<int>();
      const ReasoningStep* step = trajectory.step_at(at);
      if (step == nullptr) break;
      auto ranked = rank_context_sentences(task, step->text);
      Trajectory edited = with_modified_step(trajectory, at, [&](ReasoningStep& s) {
        std::set<int> premises;
        for (int p : s.premise_refs) {
          if (p >= 1 && p <= trajectory.length()) premises.insert(p);
        }
        s.premise_refs = std::move(premises);
        std::set<EvidenceRef> evidence;
        for (const auto& ev : s.evidence_refs) {
          if (task.resolves(ev)) {
            evidence.insert(ev);
          } else if (!ranked.empty()) {
            evidence.insert(ranked.front().ref);  // remap to best-overlap sentence
          }
        }
        s.evidence_refs = std::move(evidence);
      });
      candidates.push_back(make_candidate(pre_round, std::move(edited),
                                          "fix references of step " + std::to_string(at)));
      break;
    }

    case EditKind::RemoveCycleEdge: {
      // Delete a cycle-closing reference; every premise cycle contains at
      // least one forward or self edge.
      for (const auto& edge : params.at("edges")) {
        int u = edge.at(0).get<int>();
        int v = edge.at(1).get<int>();
        if (u > v) continue;
        const ReasoningStep* step = trajectory.step_at(u);
        if (step == nullptr || step->premise_refs.count(v) == 0) continue;
        Trajectory edited = with_modified_step(
            trajectory, u, [&](ReasoningStep& s) { s.premise_refs.erase(v); });
        candidates.push_back(make_candidate(
            pre_round, std::move(edited),
            "remove cycle edge " + std::to_string(u) + "->" + std::to_string(v)));
      }
      break;
    }

    case EditKind::ScopeAssumption:
    case EditKind::InsertAssumption: {
      std::vector<int> citing = int_list(params, "citing_steps");
      int assumption_at = params.contains("assumption_step")
                              ? params.at("assumption_step").get<int>()
                              : 0;
      const ReasoningStep* assumption =
          assumption_at > 0 ? trajectory.step_at(assumption_at) : nullptr;
      if (assumption != nullptr && assumption->kind == StepKind::Assumption) {
        Trajectory edited = with_modified_step(trajectory, assumption_at, [&](ReasoningStep& s) {
          s.assumption_scope.insert(citing.begin(), citing.end());
          if (s.assumption_scope.empty()) s.assumption_scope.insert(s.index);
          if (!step_text_has_token(s, options.audit.hedge_lexicon)) {
            s.text = ensure_hedged(s.text);
          }
        });
        candidates.push_back(make_candidate(
            pre_round, std::move(edited),
            "scope assumption step " + std::to_string(assumption_at)));
      } else {
        // No assumption step to scope: insert a hedged one upstream.
        int before = citing.empty() ? constraint.source.step
                                    : *std::min_element(citing.begin(), citing.end());
        ReasoningStep inserted;
        inserted.kind = StepKind::Assumption;
        inserted.text = "Assuming that the premise supporting step " +
                        std::to_string(constraint.source.step) + " holds";
        auto remap = [&](int ref) { return ref >= before ? ref + 1 : ref; };
        for (int c : citing) inserted.assumption_scope.insert(remap(c));
        if (citing.empty()) inserted.assumption_scope.insert(remap(constraint.source.step));
        Trajectory edited = with_inserted_step(trajectory, before, inserted);
        if (validate_trajectory(edited).empty()) {
          candidates.push_back(make_candidate(
              pre_round, std::move(edited),
              "insert assumption before step " + std::to_string(before)));
        }
      }
      break;
    }

    case EditKind::HedgeConclusion: {
      int at = params.at("step").get<int>();
      const ReasoningStep* step = trajectory.step_at(at);
      if (step == nullptr) break;
      Trajectory softened = with_modified_step(trajectory, at, [&](ReasoningStep& s) {
        s.text = soften_universals(s.text, options.audit.universal_lexicon);
      });
      candidates.push_back(make_candidate(pre_round, std::move(softened),
                                          "soften universal quantifiers in step " +
                                              std::to_string(at)));
      // Alternative route: widen the evidential base of the conclusion.
      auto ranked = rank_context_sentences(task, step->text);
      for (const auto& sent : ranked) {
        if (step->evidence_refs.count(sent.ref) > 0) continue;
        Trajectory grounded = with_modified_step(
            trajectory, at, [&](ReasoningStep& s) { s.evidence_refs.insert(sent.ref); });
        if (closure_evidence_count(grounded, at) >= 2) {
          candidates.push_back(make_candidate(
              pre_round, std::move(grounded),
              "widen conclusion evidence with " + sent.ref.doc + ":" +
                  std::to_string(sent.ref.sent)));
          break;
        }
      }
      break;
    }

    case EditKind::ReviseStepText: {
      int at = params.at("step").get<int>();
      int other = params.contains("conflicting_with") ? params.at("conflicting_with").get<int>()
                                                      : 0;
      const ReasoningStep* step = trajectory.step_at(at);
      const ReasoningStep* earlier = other > 0 ? trajectory.step_at(other) : nullptr;
      if (step == nullptr) break;
      std::string stripped = strip_negations(step->text, options.audit.negation_lexicon);
      std::string revised =
          !stripped.empty() && stripped != step->text
              ? stripped
              : (earlier != nullptr ? earlier->text : step->text);
      if (revised != step->text) {
        Trajectory edited =
            with_modified_step(trajectory, at, [&](ReasoningStep& s) { s.text = revised; });
        candidates.push_back(make_candidate(pre_round, std::move(edited),
                                            "revise step " + std::to_string(at) +
                                                " to agree with step " + std::to_string(other)));
      }
      break;
    }
  }

  if (options.use_llm) {
    for (auto& cand : llm_propose(trajectory, constraint, task, options, pre_round)) {
      candidates.push_back(std::move(cand));
    }
  }

  // Drop schema-invalid candidates.
  std::vector<RepairCandidate> valid;
  for (auto& cand : candidates) {
    if (validate_trajectory(cand.trajectory).empty()) valid.push_back(std::move(cand));
  }
  return valid;
}

// ---------------------------------------------------------------------------
// Greedy round

namespace {

int count_unsat(const Trajectory& trajectory, const std::vector<RepairConstraint>& constraints,
                const Task& task, const RepairOptions& options) {
  int unsat = 0;
  for (const auto& c : constraints) {
    if (!sat(trajectory, c, task, options)) ++unsat;
  }
  return unsat;
}

// Shift step references held inside constraint parameters after an insert at
// `at` (every index >= at moved up by one).
void shift_constraint_refs(RepairConstraint& constraint, int at) {
  auto shift = [&](int v) { return v >= at ? v + 1 : v; };
  if (constraint.source.step >= at) ++constraint.source.step;
  auto& params = constraint.sat_params;
  for (const char* key : {"step", "assumption_step", "conflicting_with"}) {
    if (params.contains(key)) params[key] = shift(params[key].get<int>());
  }
  if (params.contains("citing_steps")) {
    for (auto& v : params["citing_steps"]) v = shift(v.get<int>());
  }
  if (params.contains("edges")) {
    for (auto& edge : params["edges"]) {
      edge[0] = shift(edge[0].get<int>());
      edge[1] = shift(edge[1].get<int>());
    }
  }
  constraint.source.acceptance.params = params;
}

}  // namespace

int select_repair_candidate(const std::vector<RepairCandidate>& candidates,
                            const std::vector<RepairConstraint>& constraints, const Task& task,
                            const RepairOptions& options) {
  int best = -1;
  int best_unsat = 0;
  double best_score = 0.0;
  for (size_t i = 0; i < candidates.size(); ++i) {
    const RepairCandidate& cand = candidates[i];
    int unsat = count_unsat(cand.trajectory, constraints, task, options);
    double score = static_cast<double>(unsat) + options.lambda * cand.delta;
    bool better = false;
    if (best < 0) {
      better = true;
    } else if (score != best_score) {
      better = score < best_score;
    } else if (cand.delta != candidates[static_cast<size_t>(best)].delta) {
      better = cand.delta < candidates[static_cast<size_t>(best)].delta;
    } else {
      better = cand.description < candidates[static_cast<size_t>(best)].description;
    }
    if (better) {
      best = static_cast<int>(i);
      best_unsat = unsat;
      best_score = score;
    }
  }
  (void)best_unsat;
  return best;
}

Trajectory repair_round(const Trajectory& trajectory, std::vector<RepairConstraint> constraints,
                        const Task& task, const RepairOptions& options,
                        std::vector<EditOp>* edits_out) {
  std::stable_sort(constraints.begin(), constraints.end(),
                   [](const RepairConstraint& a, const RepairConstraint& b) {
                     return a.source.step < b.source.step;
                   });
  const Trajectory pre_round = trajectory;
  Trajectory current = trajectory;

  for (size_t ci = 0; ci < constraints.size(); ++ci) {
    const RepairConstraint& constraint = constraints[ci];
    if (sat(current, constraint, task, options)) continue;
    std::vector<RepairCandidate> candidates =
        propose_repairs(current, constraint, task, options, &pre_round);
    if (candidates.empty()) continue;  // carried to residual via re-audit

    const int current_unsat = count_unsat(current, constraints, task, options);
    int pick = select_repair_candidate(candidates, constraints, task, options);
    const RepairCandidate* best = pick >= 0 ? &candidates[static_cast<size_t>(pick)] : nullptr;
    // Never apply an edit that raises the unsatisfied count.
    if (best == nullptr ||
        count_unsat(best->trajectory, constraints, task, options) > current_unsat) {
      continue;
    }

    int inserted_at = 0;
    if (best->trajectory.length() == current.length() + 1) {
      for (const auto& op : step_edit_ops(current, best->trajectory)) {
        if (op.kind == EditOp::Kind::Insert) inserted_at = op.step;
      }
    }
    current = best->trajectory;
    if (inserted_at > 0) {
      for (size_t cj = ci + 1; cj < constraints.size(); ++cj) {
        shift_constraint_refs(constraints[cj], inserted_at);
      }
    }
  }

  if (edits_out != nullptr) *edits_out = step_edit_ops(pre_round, current);
  return current;
}

// ---------------------------------------------------------------------------
// Loop and commit

int RoundTrace::flagged_steps() const { return distinct_flagged_steps(instances); }

double RoundTrace::usr() const {
  if (trajectory_length == 0) return 0.0;
  return static_cast<double>(flagged_steps()) / static_cast<double>(trajectory_length);
}

RepairOutcome audit_repair_loop(const Belief& belief, const Task& task,
                                const LoopOptions& options) {
  RepairOutcome outcome;
  Trajectory current = belief.trajectory;

  std::vector<ViolationInstance> violations = audit(current, task, options.repair.audit);
  outcome.trace.push_back({1, violations, {}, current.length()});
  if (violations.empty()) {
    outcome.final_trajectory = current;
    outcome.rounds_used = 1;
    outcome.converged = true;
    return outcome;
  }

  for (int round = 1; round <= options.max_rounds; ++round) {
    std::vector<RepairConstraint> constraints = constraints_from_instances(violations);
    std::vector<EditOp> edits;
    Trajectory repaired = repair_round(current, constraints, task, options.repair, &edits);
    outcome.trace.back().edits = edits;
    if (edits.empty()) {
      // Stalled: nothing this round could safely change.
      outcome.final_trajectory = current;
      outcome.rounds_used = round;
      outcome.converged = false;
      outcome.residual = violations;
      return outcome;
    }
    ++outcome.repair_rounds_executed;
    current = std::move(repaired);

    violations = audit(current, task, options.repair.audit);
    outcome.trace.push_back({round + 1, violations, {}, current.length()});
    if (violations.empty()) {
      outcome.final_trajectory = current;
      outcome.rounds_used = round;
      outcome.converged = true;
      return outcome;
    }
  }

  outcome.final_trajectory = current;
  outcome.rounds_used = options.max_rounds;
  outcome.converged = false;
  outcome.residual = violations;
  return outcome;
}

int commit(const std::vector<CommitEntry>& entries, double alpha,
           const std::array<double, kViolationTypeCount>& weights) {
  if (entries.empty()) throw std::invalid_argument("commit requires at least one candidate");
  int best = 0;
  double best_score = 0.0;
  int best_residual = 0;
  for (size_t i = 0; i < entries.size(); ++i) {
    double penalty = 0.0;
    for (int t = 0; t < kViolationTypeCount; ++t) {
      penalty += weights[static_cast<size_t>(t)] *
                 static_cast<double>(entries[i].profile.counts[static_cast<size_t>(t)]);
    }
    double score = entries[i].q_tilde - alpha * penalty;
    int residual = entries[i].profile.total();
    bool better = false;
    if (i == 0) {
      better = true;
    } else if (score != best_score) {
      better = score > best_score;
    } else if (residual != best_residual) {
      better = residual < best_residual;
    }
    if (better) {
      best = static_cast<int>(i);
      best_score = score;
      best_residual = residual;
    }
  }
  return best;
}

}  // namespace saver
