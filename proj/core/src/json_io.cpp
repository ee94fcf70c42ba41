#include "saver/json_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace saver {

Json step_to_json(const ReasoningStep& step) {
  Json evidence = Json::array();
  for (const auto& ref : step.evidence_refs) {
    evidence.push_back({{"doc", ref.doc}, {"sent", ref.sent}});
  }
  return Json{{"index", step.index},
              {"kind", std::string(to_string(step.kind))},
              {"text", step.text},
              {"premises", step.premise_refs},
              {"evidence", evidence},
              {"scope", step.assumption_scope}};
}

ReasoningStep step_from_json(const Json& j) {
  ReasoningStep step;
  step.index = j.at("index").get<int>();
  auto kind = step_kind_from_string(j.at("kind").get<std::string>());
  if (!kind) throw std::runtime_error("unknown step kind: " + j.at("kind").get<std::string>());
  step.kind = *kind;
  step.text = j.at("text").get<std::string>();
  if (j.contains("premises")) {
    for (const auto& p : j.at("premises")) step.premise_refs.insert(p.get<int>());
  }
  if (j.contains("evidence")) {
    for (const auto& e : j.at("evidence")) {
      step.evidence_refs.insert({e.at("doc").get<std::string>(), e.at("sent").get<int>()});
    }
  }
  if (j.contains("scope")) {
    for (const auto& s : j.at("scope")) step.assumption_scope.insert(s.get<int>());
  }
  return step;
}

Json trajectory_to_json(const Trajectory& trajectory) {
  Json steps = Json::array();
  for (const auto& s : trajectory.steps) steps.push_back(step_to_json(s));
  return Json{{"steps", steps}};
}

Trajectory trajectory_from_json(const Json& j) {
  Trajectory t;
  for (const auto& s : j.at("steps")) t.steps.push_back(step_from_json(s));
  return t;
}

Json task_to_json(const Task& task) {
  Json contexts = Json::array();
  for (const auto& doc : task.contexts) {
    contexts.push_back(
        {{"doc_id", doc.doc_id}, {"title", doc.title}, {"sentences", doc.sentences}});
  }
  return Json{{"id", task.id},
              {"question", task.question},
              {"contexts", contexts},
              {"gold_answers", task.gold_answers}};
}

Task task_from_json(const Json& j) {
  Task task;
  task.id = j.at("id").get<std::string>();
  task.question = j.at("question").get<std::string>();
  if (j.contains("contexts")) {
    for (const auto& c : j.at("contexts")) {
      EvidenceDoc doc;
      doc.doc_id = c.at("doc_id").get<std::string>();
      doc.title = c.value("title", std::string{});
      if (c.contains("sentences")) {
        for (const auto& s : c.at("sentences")) doc.sentences.push_back(s.get<std::string>());
      }
      task.contexts.push_back(std::move(doc));
    }
  }
  if (j.contains("gold_answers")) {
    for (const auto& g : j.at("gold_answers")) task.gold_answers.push_back(g.get<std::string>());
  }
  return task;
}

Json belief_to_json(const Belief& belief) {
  return Json{{"persona_id", belief.persona_id},
              {"claim", belief.claim},
              {"trajectory", trajectory_to_json(belief.trajectory)},
              {"degraded", belief.degraded}};
}

Belief belief_from_json(const Json& j) {
  Belief b;
  b.persona_id = j.at("persona_id").get<std::string>();
  b.claim = j.at("claim").get<std::string>();
  b.trajectory = trajectory_from_json(j.at("trajectory"));
  b.degraded = j.value("degraded", false);
  return b;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << content;
}

}  // namespace saver
