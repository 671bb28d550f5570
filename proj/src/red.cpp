#include "dogsgd/red.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <numeric>
#include <optional>
#include <sstream>

#include "dogsgd/analysis.hpp"
#include "dogsgd/emit.hpp"
#include "dogsgd/errors.hpp"

namespace dogsgd {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  const auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
  while (!s.empty() && ws(s.back())) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && ws(s[i])) ++i;
  return s.substr(i);
}

}  // namespace

TaskErrors read_task_errors(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "", "empty file, expected a header");
  const auto header = split(line);
  std::optional<std::size_t> task_col;
  std::optional<std::size_t> err_col;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string h = trim(header[i]);
    if (h == "task") task_col = i;
    if (h == "error") err_col = i;
  }
  if (!err_col) throw ParseError(1, "error", "no such column");

  TaskErrors out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(line);
    if (fields.size() != header.size()) {
      throw ParseError(line_no, "", "expected " + std::to_string(header.size()) + " fields");
    }
    const std::string text = trim(fields[*err_col]);
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size()) {
      throw ParseError(line_no, "error", "value '" + text + "' is not a number");
    }
    out[task_col ? trim(fields[*task_col]) : std::string("all")].push_back(v);
  }
  return out;
}

TaskErrors load_task_errors(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  return read_task_errors(in);
}

std::vector<RedRow> red_table(const TaskErrors& baseline, const TaskErrors& dog) {
  std::vector<RedRow> rows;
  for (const auto& [task, base_errs] : baseline) {
    const auto it = dog.find(task);
    if (it == dog.end()) continue;
    std::vector<double> reds;
    for (const double e_dog : it->second) {
      for (const double e_x : base_errs) reds.push_back(red_score(e_x, e_dog));
    }
    if (reds.empty()) continue;
    std::sort(reds.begin(), reds.end());
    RedRow row;
    row.task = task;
    row.pairs = reds.size();
    row.mean = std::accumulate(reds.begin(), reds.end(), 0.0) / static_cast<double>(reds.size());
    const std::size_t m = reds.size() / 2;
    row.median = reds.size() % 2 == 1 ? reds[m] : 0.5 * (reds[m - 1] + reds[m]);
    row.min = reds.front();
    row.max = reds.back();
    rows.push_back(row);
  }
  return rows;
}

std::string red_csv(const std::vector<RedRow>& rows) {
  std::string out = "task,pairs,mean,median,min,max\n";
  for (const RedRow& r : rows) {
    out += r.task + ',' + std::to_string(r.pairs);
    for (const double v : {r.mean, r.median, r.min, r.max}) out += ',' + format_double(v);
    out += '\n';
  }
  return out;
}

}  // namespace dogsgd
