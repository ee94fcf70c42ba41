#pragma once

#include <string>
#include <vector>

#include "saver/trajectory.hpp"

namespace saver {

struct DatasetLoadError {
  int line = 0;
  std::string message;
};

struct Dataset {
  std::vector<Task> records;
  std::vector<DatasetLoadError> malformed;
};

// JSONL dataset: one {id, question, contexts:[{doc_id,title,sentences[]}],
// gold_answers[]} object per line. Malformed lines are collected; the load
// aborts (throws) when more than 1% of nonempty lines are malformed.
Dataset load_dataset(const std::string& path);

}  // namespace saver
