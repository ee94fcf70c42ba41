#pragma once

#include <optional>
#include <string>
#include <vector>

#include "saver/audit.hpp"
#include "saver/backend.hpp"
#include "saver/config.hpp"
#include "saver/dataset.hpp"
#include "saver/generation.hpp"
#include "saver/json_io.hpp"
#include "saver/metrics.hpp"
#include "saver/repair.hpp"

namespace saver {

enum class RunMode { Saver, Vanilla, Cot };

std::string_view to_string(RunMode mode);
std::optional<RunMode> run_mode_from_string(std::string_view name);

struct PipelineOptions {
  RunMode mode = RunMode::Saver;
  bool dump_selection = false;  // embed kernel + subset weights in records
};

struct TaskOutcome {
  std::string task_id;
  bool failed = false;
  std::string error;

  Json record;                        // records.jsonl line
  std::vector<Json> audit_log_lines;  // audit_log.jsonl lines (round order)
  Json memory_line;                   // memory_log.jsonl line

  std::optional<EmF1> answer;         // absent when the task has no golds
  TrajectoryAuditStats stats;         // committed-belief audit stats
  std::vector<RoundTrace> committed_trace;
};

struct RunResult {
  RunMode mode = RunMode::Saver;
  std::vector<TaskOutcome> outcomes;  // dataset order
  int n_failed = 0;
  // Aggregates over non-failed tasks.
  std::optional<FaithfulnessReport> faithfulness;
  double em = 0.0;
  double f1 = 0.0;
  int n_scored = 0;  // tasks with gold answers

  bool ok() const;  // false when more than 5% of tasks failed
};

// Full closed loop per task: coalition -> M beliefs -> usability filter ->
// kernel -> k-DPP subset -> per-belief audit-repair -> commitment -> logs.
// Vanilla and Cot are single-belief reference modes (Cot is audited but
// never repaired). Per-task failures are isolated into their outcome slots.
RunResult run_pipeline(const Dataset& dataset, const RunConfig& config,
                       const PipelineOptions& options, TextBackend& backend);

// Writes records.jsonl, audit_log.jsonl, memory_log.jsonl, report.json,
// report.csv, and tasks.csv into out_dir (created if needed). Output bytes
// are a pure function of the RunResult.
void write_run_outputs(const RunResult& result, const std::string& out_dir);

// Rebuilds report.json / report.csv / tasks.csv from an existing run
// directory's records.jsonl; byte-identical to what the run itself wrote.
void recompute_reports(const std::string& run_dir);

// Deterministic mock fixture covering every request the pipeline will issue
// for this dataset in the given mode (persona calls for Saver, single calls
// for Vanilla/Cot). Responses are synthesized structured answers grounded in
// each task's contexts, varied per persona.
ScriptedFixture synthesize_fixture(const Dataset& dataset, const RunConfig& config, RunMode mode);

}  // namespace saver
