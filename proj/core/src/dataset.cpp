#include "saver/dataset.hpp"

#include <fstream>
#include <stdexcept>

#include "saver/json_io.hpp"
#include "saver/text.hpp"

namespace saver {

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file: " + path);

  Dataset dataset;
  std::string line;
  int lineno = 0;
  int nonempty = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    ++nonempty;
    try {
      Json j = Json::parse(line);
      Task task = task_from_json(j);
      if (task.id.empty()) throw std::runtime_error("record id is empty");
      dataset.records.push_back(std::move(task));
    } catch (const std::exception& e) {
      dataset.malformed.push_back({lineno, e.what()});
    }
  }
  if (nonempty > 0 &&
      static_cast<double>(dataset.malformed.size()) > 0.01 * static_cast<double>(nonempty)) {
    throw std::runtime_error("dataset has " + std::to_string(dataset.malformed.size()) +
                             " malformed lines out of " + std::to_string(nonempty) +
                             " (over the 1% threshold): first at line " +
                             std::to_string(dataset.malformed.front().line) + ": " +
                             dataset.malformed.front().message);
  }
  return dataset;
}

}  // namespace saver
