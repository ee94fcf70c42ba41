#pragma once

#include <string>

#include "json.hpp"
#include "saver/trajectory.hpp"

namespace saver {

using Json = nlohmann::ordered_json;

// Trajectory wire format:
//   {"steps":[{"index":1,"kind":"Inference","text":"...",
//              "premises":[1],"evidence":[{"doc":"d1","sent":0}],"scope":[]}]}
// Field names are stable; fixture corpora depend on them.
Json trajectory_to_json(const Trajectory& trajectory);
Trajectory trajectory_from_json(const Json& j);

Json step_to_json(const ReasoningStep& step);
ReasoningStep step_from_json(const Json& j);

// Task wire format (dataset JSONL line):
//   {"id":"...","question":"...",
//    "contexts":[{"doc_id":"d1","title":"...","sentences":["..."]}],
//    "gold_answers":["..."]}
Json task_to_json(const Task& task);
Task task_from_json(const Json& j);

Json belief_to_json(const Belief& belief);
Belief belief_from_json(const Json& j);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace saver
