#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace dogsgd {

/// Error rates per task, read from a CSV with an `error` column and an
/// optional `task` column (missing task means a single task named "all").
using TaskErrors = std::map<std::string, std::vector<double>>;

TaskErrors read_task_errors(std::istream& in);
TaskErrors load_task_errors(const std::string& path);

struct RedRow {
  std::string task;
  std::size_t pairs = 0;
  double mean = 0.0;
  double median = 0.0;
  double min = 0.0;
  double max = 0.0;
};

/// RED of every (baseline, DoG) pair for each task present in both inputs,
/// sorted by task name.
std::vector<RedRow> red_table(const TaskErrors& baseline, const TaskErrors& dog);

/// task,pairs,mean,median,min,max
std::string red_csv(const std::vector<RedRow>& rows);

}  // namespace dogsgd
