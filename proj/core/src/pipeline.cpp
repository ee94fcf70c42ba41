#include "saver/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <set>
#include <sstream>
#include <thread>

#include "saver/features.hpp"
#include "saver/injection.hpp"
#include "saver/rng.hpp"
#include "saver/selection.hpp"
#include "saver/text.hpp"

namespace saver {

namespace fs = std::filesystem;

std::string_view to_string(RunMode mode) {
  switch (mode) {
    case RunMode::Saver: return "saver";
    case RunMode::Vanilla: return "vanilla";
    case RunMode::Cot: return "cot";
  }
  return "saver";
}

std::optional<RunMode> run_mode_from_string(std::string_view name) {
  if (name == "saver") return RunMode::Saver;
  if (name == "vanilla") return RunMode::Vanilla;
  if (name == "cot") return RunMode::Cot;
  return std::nullopt;
}

bool RunResult::ok() const {
  if (outcomes.empty()) return true;
  return static_cast<double>(n_failed) <= 0.05 * static_cast<double>(outcomes.size());
}

namespace {

std::string load_prompt(const RunConfig& config, const std::string& name) {
  fs::path path = fs::path(config.prompts_dir) / name;
  if (!fs::exists(path)) throw ConfigError("missing prompt template: " + path.string());
  return read_text_file(path.string());
}

std::string fill_placeholder(std::string text, const std::string& key, const std::string& value) {
  size_t pos = 0;
  while ((pos = text.find(key, pos)) != std::string::npos) {
    text.replace(pos, key.size(), value);
    pos += value.size();
  }
  return text;
}

Persona cot_pseudo_persona(const RunConfig& config) {
  Persona persona;
  persona.id = "cot";
  persona.bias_label = "chain-of-thought";
  persona.instruction_template = load_prompt(config, "cot.txt");
  persona.step_format_contract = load_prompt(config, "step_format.txt");
  return persona;
}

GenRequest vanilla_request(const Task& task, const RunConfig& config, std::uint64_t run_seed) {
  GenRequest req;
  req.system_prompt = "You are a precise question answering assistant.";
  std::string body = load_prompt(config, "vanilla.txt");
  body = fill_placeholder(body, "{question}", task.question);
  body = fill_placeholder(body, "{contexts}", render_contexts(task));
  req.user_prompt = body;
  req.temperature = config.temperature;
  req.max_tokens = config.max_tokens;
  req.seed = static_cast<std::int64_t>(derive_seed(run_seed, task.id + "/vanilla"));
  return req;
}

std::string extract_answer_line(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::string t = trim(line);
    if (starts_with_ci(t, "ANSWER:")) return trim(t.substr(7));
  }
  return trim(text);
}

Json edit_op_to_json(const EditOp& op) {
  return Json{{"op", std::string(to_string(op.kind))},
              {"step", op.step},
              {"description", op.description}};
}

Json round_trace_to_json(const std::string& task_id, const std::string& belief_id,
                         const RoundTrace& trace) {
  Json instances = Json::array();
  for (const auto& inst : trace.instances) instances.push_back(instance_to_json(inst));
  Json edits = Json::array();
  for (const auto& op : trace.edits) edits.push_back(edit_op_to_json(op));
  return Json{{"task_id", task_id},   {"belief", belief_id},
              {"round", trace.round}, {"instances", instances},
              {"edits", edits},       {"length", trace.trajectory_length},
              {"flagged_steps", trace.flagged_steps()}};
}

Json profile_to_json(const UnfaithfulnessProfile& p) {
  Json counts = Json::object();
  for (int t = 0; t < kViolationTypeCount; ++t) {
    counts[std::string(to_string(static_cast<ViolationType>(t)))] =
        p.counts[static_cast<size_t>(t)];
  }
  return counts;
}

Json stats_to_json(const TrajectoryAuditStats& s) {
  return Json{{"violations", s.violations},
              {"flagged_steps", s.flagged_steps},
              {"length", s.length},
              {"repair_rounds_executed", s.repair_rounds_executed},
              {"residual_violations", s.residual_violations}};
}

TrajectoryAuditStats stats_from_json(const Json& j) {
  TrajectoryAuditStats s;
  s.violations = j.at("violations").get<int>();
  s.flagged_steps = j.at("flagged_steps").get<int>();
  s.length = j.at("length").get<int>();
  s.repair_rounds_executed = j.at("repair_rounds_executed").get<bool>();
  s.residual_violations = j.at("residual_violations").get<int>();
  return s;
}

double commit_score(const CommitEntry& entry, const RunConfig& config) {
  double penalty = 0.0;
  for (int t = 0; t < kViolationTypeCount; ++t) {
    penalty += config.severity_weights[static_cast<size_t>(t)] *
               static_cast<double>(entry.profile.counts[static_cast<size_t>(t)]);
  }
  return entry.q_tilde - config.alpha * penalty;
}

struct PipelineContext {
  const RunConfig& config;
  const PipelineOptions& options;
  TextBackend& backend;
  std::vector<Persona> coalition;  // saver mode
  std::optional<Persona> cot_persona;
  LoopOptions loop_options;
};

TaskOutcome run_saver_task(const Task& task, const PipelineContext& ctx) {
  TaskOutcome outcome;
  outcome.task_id = task.id;
  const RunConfig& config = ctx.config;

  CandidateSet candidates =
      generate_candidates(task, ctx.coalition, ctx.backend, config, config.seed);

  std::vector<double> q_tilde;
  Json candidates_json = Json::array();
  for (const auto& belief : candidates.beliefs) {
    QualityScore q = quality_score(belief, task);
    q_tilde.push_back(q.normalized);
    candidates_json.push_back({{"persona_id", belief.persona_id},
                               {"q_tilde", q.normalized},
                               {"degraded", belief.degraded},
                               {"length", belief.trajectory.length()},
                               {"claim", belief.claim}});
  }

  const int k = std::min(config.audit_subset_size, static_cast<int>(candidates.beliefs.size()));
  std::vector<int> survivors = usability_filter(q_tilde, config.q_min, k);

  std::vector<FeatureVector> features;
  std::vector<double> survivor_q;
  for (int idx : survivors) {
    features.push_back(extract_features(candidates.beliefs[static_cast<size_t>(idx)]));
    survivor_q.push_back(q_tilde[static_cast<size_t>(idx)]);
  }
  KernelMatrix kernel = build_kernel(features, survivor_q, {config.beta, std::nullopt});
  Rng selection_rng(derive_seed(config.seed, task.id + "#kdpp"));
  SubsetSample sample = kdpp_sample(kernel, std::min(k, kernel.size()), selection_rng);

  std::vector<int> selected;  // original candidate indices
  for (int idx : sample.indices) selected.push_back(survivors[static_cast<size_t>(idx)]);

  Json selection_json{{"survivors", survivors},
                      {"indices", selected},
                      {"degenerate", sample.degenerate_kernel}};
  if (std::isfinite(sample.log_det)) selection_json["log_det"] = sample.log_det;
  if (ctx.options.dump_selection) {
    Json kernel_json = Json::array();
    for (int r = 0; r < kernel.size(); ++r) {
      Json row = Json::array();
      for (int c = 0; c < kernel.size(); ++c) row.push_back(kernel.entries(r, c));
      kernel_json.push_back(row);
    }
    Json weights_json = Json::array();
    for (const auto& w : enumerate_subset_weights(kernel, std::min(k, kernel.size()))) {
      weights_json.push_back({{"subset", w.indices}, {"det", w.det}});
    }
    selection_json["kernel"] = kernel_json;
    selection_json["subset_weights"] = weights_json;
  }

  // Audit-repair loops for the selected beliefs, run concurrently, results
  // consumed in selection order.
  std::vector<RepairOutcome> loops(selected.size());
  if (selected.size() > 1) {
    std::vector<std::future<RepairOutcome>> futures;
    futures.reserve(selected.size());
    for (size_t i = 0; i < selected.size(); ++i) {
      const Belief& belief = candidates.beliefs[static_cast<size_t>(selected[i])];
      futures.push_back(std::async(std::launch::async, [&, i]() {
        return audit_repair_loop(belief, task, ctx.loop_options);
      }));
    }
    for (size_t i = 0; i < selected.size(); ++i) loops[i] = futures[i].get();
  } else {
    for (size_t i = 0; i < selected.size(); ++i) {
      loops[i] = audit_repair_loop(candidates.beliefs[static_cast<size_t>(selected[i])], task,
                                   ctx.loop_options);
    }
  }

  std::vector<CommitEntry> entries;
  std::vector<Belief> repaired;
  Json loops_json = Json::array();
  for (size_t i = 0; i < selected.size(); ++i) {
    const Belief& original = candidates.beliefs[static_cast<size_t>(selected[i])];
    Belief fixed = original;
    fixed.trajectory = loops[i].final_trajectory;
    repaired.push_back(fixed);

    CommitEntry entry;
    entry.q_tilde = quality_score(fixed, task).normalized;
    entry.profile = profile(loops[i].residual);
    entries.push_back(entry);

    for (const auto& trace : loops[i].trace) {
      outcome.audit_log_lines.push_back(
          round_trace_to_json(task.id, original.persona_id, trace));
    }
    loops_json.push_back({{"persona_id", original.persona_id},
                          {"rounds_used", loops[i].rounds_used},
                          {"converged", loops[i].converged},
                          {"residual", static_cast<int>(loops[i].residual.size())},
                          {"repair_rounds", loops[i].repair_rounds_executed}});
  }

  const int chosen = commit(entries, config.alpha, config.severity_weights);
  const Belief& committed = repaired[static_cast<size_t>(chosen)];
  const RepairOutcome& committed_loop = loops[static_cast<size_t>(chosen)];
  const double score = commit_score(entries[static_cast<size_t>(chosen)], config);

  outcome.stats.violations = static_cast<int>(committed_loop.residual.size());
  outcome.stats.flagged_steps = distinct_flagged_steps(committed_loop.residual);
  outcome.stats.length = committed.trajectory.length();
  outcome.stats.repair_rounds_executed = committed_loop.repair_rounds_executed > 0;
  outcome.stats.residual_violations = static_cast<int>(committed_loop.residual.size());
  outcome.committed_trace = committed_loop.trace;

  if (!task.gold_answers.empty()) outcome.answer = em_f1(committed.claim, task.gold_answers);

  outcome.memory_line = Json{{"task_id", task.id},
                             {"belief_id", committed.persona_id},
                             {"claim", committed.claim},
                             {"trajectory", trajectory_to_json(committed.trajectory)},
                             {"rounds_used", committed_loop.rounds_used},
                             {"profile", profile_to_json(entries[static_cast<size_t>(chosen)].profile)},
                             {"score", score}};

  outcome.record = Json{{"task_id", task.id},
                        {"mode", "saver"},
                        {"failed", false},
                        {"candidates", candidates_json},
                        {"selection", selection_json},
                        {"loops", loops_json},
                        {"commit",
                         {{"persona_id", committed.persona_id},
                          {"claim", committed.claim},
                          {"score", score}}},
                        {"answer", outcome.answer
                                       ? Json{{"em", outcome.answer->em}, {"f1", outcome.answer->f1}}
                                       : Json(nullptr)},
                        {"stats", stats_to_json(outcome.stats)}};
  return outcome;
}

TaskOutcome run_single_belief_task(const Task& task, const PipelineContext& ctx) {
  TaskOutcome outcome;
  outcome.task_id = task.id;
  const RunConfig& config = ctx.config;
  const bool is_cot = ctx.options.mode == RunMode::Cot;

  Belief belief;
  if (is_cot) {
    belief = generate_belief(task, *ctx.cot_persona, ctx.backend, config, config.seed);
  } else {
    GenRequest req = vanilla_request(task, config, config.seed);
    GenResponse resp = ctx.backend.generate(req);
    std::string answer = extract_answer_line(resp.text);
    if (answer.empty()) answer = "unknown";
    belief.persona_id = "vanilla";
    belief.claim = answer;
    ReasoningStep step;
    step.index = 1;
    step.kind = StepKind::Conclusion;
    step.text = answer;
    belief.trajectory.steps.push_back(std::move(step));
  }

  // Audited for the faithfulness metrics; never repaired in these modes.
  std::vector<ViolationInstance> instances =
      audit(belief.trajectory, task, ctx.loop_options.repair.audit);
  RoundTrace trace{1, instances, {}, belief.trajectory.length()};
  outcome.committed_trace.push_back(trace);
  outcome.audit_log_lines.push_back(round_trace_to_json(task.id, belief.persona_id, trace));

  outcome.stats.violations = static_cast<int>(instances.size());
  outcome.stats.flagged_steps = distinct_flagged_steps(instances);
  outcome.stats.length = belief.trajectory.length();
  outcome.stats.repair_rounds_executed = false;
  outcome.stats.residual_violations = static_cast<int>(instances.size());

  if (!task.gold_answers.empty()) outcome.answer = em_f1(belief.claim, task.gold_answers);

  CommitEntry entry;
  entry.q_tilde = quality_score(belief, task).normalized;
  entry.profile = profile(instances);
  const double score = commit_score(entry, config);

  outcome.memory_line = Json{{"task_id", task.id},
                             {"belief_id", belief.persona_id},
                             {"claim", belief.claim},
                             {"trajectory", trajectory_to_json(belief.trajectory)},
                             {"rounds_used", 1},
                             {"profile", profile_to_json(entry.profile)},
                             {"score", score}};

  outcome.record = Json{{"task_id", task.id},
                        {"mode", std::string(to_string(ctx.options.mode))},
                        {"failed", false},
                        {"candidates", Json::array({Json{{"persona_id", belief.persona_id},
                                                         {"q_tilde", entry.q_tilde},
                                                         {"degraded", belief.degraded},
                                                         {"length", belief.trajectory.length()},
                                                         {"claim", belief.claim}}})},
                        {"commit",
                         {{"persona_id", belief.persona_id},
                          {"claim", belief.claim},
                          {"score", score}}},
                        {"answer", outcome.answer
                                       ? Json{{"em", outcome.answer->em}, {"f1", outcome.answer->f1}}
                                       : Json(nullptr)},
                        {"stats", stats_to_json(outcome.stats)}};
  return outcome;
}

}  // namespace

RunResult run_pipeline(const Dataset& dataset, const RunConfig& config,
                       const PipelineOptions& options, TextBackend& backend) {
  PipelineContext ctx{config, options, backend, {}, std::nullopt, {}};
  // The persona directory is the source of truth for M.
  if (options.mode == RunMode::Saver) ctx.coalition = build_coalition(config);
  if (options.mode == RunMode::Cot) ctx.cot_persona = cot_pseudo_persona(config);
  ctx.loop_options.max_rounds = config.max_rounds;
  ctx.loop_options.repair.lambda = config.lambda;
  ctx.loop_options.repair.audit = AuditOptions::from_config(config);

  RunResult result;
  result.mode = options.mode;
  result.outcomes.resize(dataset.records.size());

  auto process = [&](size_t i) {
    const Task& task = dataset.records[i];
    try {
      result.outcomes[i] = options.mode == RunMode::Saver ? run_saver_task(task, ctx)
                                                          : run_single_belief_task(task, ctx);
    } catch (const std::exception& e) {
      TaskOutcome failed;
      failed.task_id = task.id;
      failed.failed = true;
      failed.error = e.what();
      failed.record = Json{{"task_id", task.id},
                           {"mode", std::string(to_string(options.mode))},
                           {"failed", true},
                           {"error", failed.error}};
      result.outcomes[i] = std::move(failed);
    }
  };

  const int workers = std::max(1, config.parallelism);
  if (workers == 1 || dataset.records.size() <= 1) {
    for (size_t i = 0; i < dataset.records.size(); ++i) process(i);
  } else {
    std::atomic<size_t> next{0};
    auto worker = [&]() {
      while (true) {
        size_t i = next.fetch_add(1);
        if (i >= dataset.records.size()) return;
        process(i);
      }
    };
    std::vector<std::thread> threads;
    for (int w = 0; w < std::min<int>(workers, static_cast<int>(dataset.records.size())); ++w) {
      threads.emplace_back(worker);
    }
    for (auto& t : threads) t.join();
  }

  std::vector<TrajectoryAuditStats> stats;
  double em_sum = 0.0;
  double f1_sum = 0.0;
  for (const auto& outcome : result.outcomes) {
    if (outcome.failed) {
      ++result.n_failed;
      continue;
    }
    stats.push_back(outcome.stats);
    if (outcome.answer) {
      em_sum += outcome.answer->em;
      f1_sum += outcome.answer->f1;
      ++result.n_scored;
    }
  }
  if (!stats.empty()) result.faithfulness = faithfulness_metrics(stats);
  if (result.n_scored > 0) {
    result.em = em_sum / result.n_scored;
    result.f1 = f1_sum / result.n_scored;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Output files

namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

void write_reports_from_records(const std::vector<Json>& records, const std::string& mode,
                                const fs::path& dir) {
  int n_failed = 0;
  std::vector<TrajectoryAuditStats> stats;
  double em_sum = 0.0;
  double f1_sum = 0.0;
  int n_scored = 0;
  std::ostringstream tasks_csv;
  tasks_csv << "task_id,em,f1,violations,flagged_steps,length,residual\n";
  for (const auto& record : records) {
    if (record.value("failed", false)) {
      ++n_failed;
      continue;
    }
    TrajectoryAuditStats s = stats_from_json(record.at("stats"));
    stats.push_back(s);
    std::string em_cell;
    std::string f1_cell;
    if (record.contains("answer") && !record.at("answer").is_null()) {
      em_sum += record.at("answer").at("em").get<int>();
      f1_sum += record.at("answer").at("f1").get<double>();
      ++n_scored;
      em_cell = std::to_string(record.at("answer").at("em").get<int>());
      f1_cell = format_double(record.at("answer").at("f1").get<double>());
    }
    tasks_csv << record.at("task_id").get<std::string>() << ',' << em_cell << ',' << f1_cell
              << ',' << s.violations << ',' << s.flagged_steps << ',' << s.length << ','
              << s.residual_violations << '\n';
  }

  Json report{{"mode", mode},
              {"n_tasks", records.size()},
              {"n_failed", n_failed},
              {"n_scored", n_scored}};
  if (n_scored > 0) {
    report["em"] = em_sum / n_scored;
    report["f1"] = f1_sum / n_scored;
  } else {
    report["em"] = nullptr;
    report["f1"] = nullptr;
  }
  std::ostringstream report_csv;
  report_csv << "metric,value\n";
  report_csv << "n_tasks," << records.size() << '\n';
  report_csv << "n_failed," << n_failed << '\n';
  if (n_scored > 0) {
    report_csv << "em," << format_double(em_sum / n_scored) << '\n';
    report_csv << "f1," << format_double(f1_sum / n_scored) << '\n';
  }
  if (!stats.empty()) {
    FaithfulnessReport fr = faithfulness_metrics(stats);
    report["faithfulness"] = Json{{"avg_viol", fr.avg_viol},
                                  {"vfr", fr.vfr},
                                  {"usr", fr.usr},
                                  {"post_res", fr.post_res},
                                  {"n_trajectories", fr.n_trajectories}};
    report_csv << "avg_viol," << format_double(fr.avg_viol) << '\n';
    report_csv << "vfr," << format_double(fr.vfr) << '\n';
    report_csv << "usr," << format_double(fr.usr) << '\n';
    report_csv << "post_res," << format_double(fr.post_res) << '\n';
  } else {
    report["faithfulness"] = nullptr;
  }

  write_text_file((dir / "report.json").string(), report.dump(2) + "\n");
  write_text_file((dir / "report.csv").string(), report_csv.str());
  write_text_file((dir / "tasks.csv").string(), tasks_csv.str());
}

}  // namespace

void write_run_outputs(const RunResult& result, const std::string& out_dir) {
  fs::path dir(out_dir);
  fs::create_directories(dir);

  std::ostringstream records;
  std::ostringstream audit_log;
  std::ostringstream memory_log;
  std::vector<Json> record_list;
  for (const auto& outcome : result.outcomes) {
    records << outcome.record.dump() << '\n';
    record_list.push_back(outcome.record);
    for (const auto& line : outcome.audit_log_lines) audit_log << line.dump() << '\n';
    if (!outcome.failed) memory_log << outcome.memory_line.dump() << '\n';
  }
  write_text_file((dir / "records.jsonl").string(), records.str());
  write_text_file((dir / "audit_log.jsonl").string(), audit_log.str());
  write_text_file((dir / "memory_log.jsonl").string(), memory_log.str());
  write_reports_from_records(record_list, std::string(to_string(result.mode)), dir);
}

void recompute_reports(const std::string& run_dir) {
  fs::path dir(run_dir);
  std::ifstream in(dir / "records.jsonl");
  if (!in) throw std::runtime_error("cannot open " + (dir / "records.jsonl").string());
  std::vector<Json> records;
  std::string line;
  std::string mode = "saver";
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    records.push_back(Json::parse(line));
    if (records.back().contains("mode")) mode = records.back().at("mode").get<std::string>();
  }
  write_reports_from_records(records, mode, dir);
}

// ---------------------------------------------------------------------------
// Fixture synthesis

namespace {

struct SentencePick {
  std::string doc;
  int sent = 0;
  std::string text;
};

std::vector<SentencePick> pick_sentences(const Task& task, size_t limit) {
  std::vector<SentencePick> picks;
  for (const auto& doc : task.contexts) {
    for (size_t s = 0; s < doc.sentences.size() && picks.size() < limit; ++s) {
      picks.push_back({doc.doc_id, static_cast<int>(s), doc.sentences[s]});
    }
    if (picks.size() >= limit) break;
  }
  return picks;
}

std::string guessed_answer(const Task& task) {
  if (!task.gold_answers.empty()) return task.gold_answers.front();
  if (!task.contexts.empty() && !task.contexts.front().title.empty()) {
    return task.contexts.front().title;
  }
  return "unknown";
}

// Structured responses grounded in the task contexts, one house style per
// persona slot. Styles 1 and 2 carry deliberate flaws (a dangling evidence
// reference, an unjustified inference) so end-to-end runs exercise the
// audit-repair loop.
std::string synth_persona_response(const Task& task, size_t style) {
  const std::string answer = guessed_answer(task);
  auto sentences = pick_sentences(task, 3);
  std::ostringstream out;
  if (sentences.empty()) {
    out << "[1] CLAIM the contexts are empty\n";
    out << "[2] CONCLUSION (premises: 1) the answer is " << answer << "\n";
    out << "ANSWER: " << answer << "\n";
    return out.str();
  }
  const auto& s0 = sentences.front();
  const auto& s1 = sentences.size() > 1 ? sentences[1] : sentences.front();
  switch (style % 4) {
    case 0:  // assumption-first, clean
      out << "[1] ASSUMPTION (scope: 2) Assuming the listed contexts are complete\n";
      out << "[2] INFERENCE (premises: 1) (evidence: " << s0.doc << ":" << s0.sent << ") "
          << s0.text << "\n";
      out << "[3] CONCLUSION (premises: 2) the answer is " << answer << "\n";
      break;
    case 1:  // evidence-first with one dangling reference
      out << "[1] CLAIM (evidence: " << s0.doc << ":" << s0.sent << ") " << s0.text << "\n";
      out << "[2] INFERENCE (premises: 1) (evidence: missing_doc:9) " << s1.text << "\n";
      out << "[3] CONCLUSION (premises: 2) the answer is " << answer << "\n";
      break;
    case 2:  // decomposition with an unjustified middle step
      out << "[1] CLAIM (evidence: " << s0.doc << ":" << s0.sent << ") " << s0.text << "\n";
      out << "[2] INFERENCE " << s1.text << "\n";
      out << "[3] INFERENCE (premises: 1, 2) combining both parts points at " << answer << "\n";
      out << "[4] CONCLUSION (premises: 3) the answer is " << answer << "\n";
      break;
    default:  // verification-heavy, clean
      out << "[1] CLAIM (evidence: " << s0.doc << ":" << s0.sent << ") " << s0.text << "\n";
      out << "[2] VERIFICATION (premises: 1) (evidence: " << s1.doc << ":" << s1.sent << ") "
          << "checked against " << s1.text << "\n";
      out << "[3] CONCLUSION (premises: 1, 2) the answer is " << answer << "\n";
      break;
  }
  out << "ANSWER: " << answer << "\n";
  return out.str();
}

}  // namespace

ScriptedFixture synthesize_fixture(const Dataset& dataset, const RunConfig& config,
                                   RunMode mode) {
  ScriptedFixture fixture;
  fixture.fallback = FixturePolicy::Error;
  if (mode == RunMode::Saver) {
    std::vector<Persona> coalition = build_coalition(config);
    for (const auto& task : dataset.records) {
      for (size_t p = 0; p < coalition.size(); ++p) {
        GenRequest req = build_persona_request(task, coalition[p], config, config.seed);
        fixture.add(req, synth_persona_response(task, p));
      }
    }
  } else if (mode == RunMode::Cot) {
    Persona persona = cot_pseudo_persona(config);
    for (const auto& task : dataset.records) {
      GenRequest req = build_persona_request(task, persona, config, config.seed);
      fixture.add(req, synth_persona_response(task, 0));
    }
  } else {
    for (const auto& task : dataset.records) {
      GenRequest req = vanilla_request(task, config, config.seed);
      fixture.add(req, "ANSWER: " + guessed_answer(task) + "\n");
    }
  }
  return fixture;
}

}  // namespace saver
