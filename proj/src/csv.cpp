#include "survbench/csv.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "survbench/textio.hpp"

namespace survbench {

namespace {

constexpr std::size_t kMaxReportedErrors = 20;

}  // namespace

Dataset parse_dataset_csv(const std::string& text,
                          const std::vector<std::string>& covariate_columns) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line))
    throw std::invalid_argument("empty input: header row required");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const std::vector<std::string> header = split(line, ',');
  auto column = [&](const std::string& name) -> long {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (trim(header[i]) == name) return static_cast<long>(i);
    return -1;
  };

  const long col_center = column("center_id");
  const long col_time = column("time");
  const long col_status = column("status");
  const long col_entry = column("entry_time");
  if (col_center < 0) throw std::invalid_argument("missing required column: center_id");
  if (col_time < 0) throw std::invalid_argument("missing required column: time");
  if (col_status < 0) throw std::invalid_argument("missing required column: status");

  std::vector<long> cov_cols;
  for (const auto& name : covariate_columns) {
    const long c = column(name);
    if (c < 0) throw std::invalid_argument("missing covariate column: " + name);
    cov_cols.push_back(c);
  }

  Dataset data;
  data.covariate_names = covariate_columns;
  std::vector<std::string> errors;
  int line_no = 1;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const std::vector<std::string> cells = split(line, ',');
    auto fail = [&](const std::string& what) {
      if (errors.size() < kMaxReportedErrors)
        errors.push_back("line " + std::to_string(line_no) + ": " + what);
      else if (errors.size() == kMaxReportedErrors)
        errors.push_back("...");
    };
    if (cells.size() != header.size()) {
      fail("expected " + std::to_string(header.size()) + " cells, found " +
           std::to_string(cells.size()));
      continue;
    }

    SubjectRecord r;
    r.center_id = trim(cells[static_cast<std::size_t>(col_center)]);
    if (r.center_id.empty()) {
      fail("empty center_id");
      continue;
    }
    try {
      r.time = parse_double(cells[static_cast<std::size_t>(col_time)]);
    } catch (const std::exception&) {
      fail("bad time value '" + trim(cells[static_cast<std::size_t>(col_time)]) + "'");
      continue;
    }
    const std::string status_cell = trim(cells[static_cast<std::size_t>(col_status)]);
    if (status_cell == "0") {
      r.status = 0;
    } else if (status_cell == "1") {
      r.status = 1;
    } else {
      fail("status must be 0 or 1, found '" + status_cell + "'");
      continue;
    }
    if (col_entry >= 0) {
      const std::string cell = trim(cells[static_cast<std::size_t>(col_entry)]);
      if (!cell.empty()) {
        try {
          r.entry_time = parse_double(cell);
        } catch (const std::exception&) {
          fail("bad entry_time value '" + cell + "'");
          continue;
        }
      }
    }
    if (!std::isfinite(r.time) || r.time < 0.0) {
      fail("time must be finite and >= 0");
      continue;
    }
    if (!(r.time > r.entry_time)) {
      fail("time must exceed entry_time");
      continue;
    }
    bool cov_ok = true;
    for (std::size_t k = 0; k < cov_cols.size(); ++k) {
      const std::string cell = trim(cells[static_cast<std::size_t>(cov_cols[k])]);
      if (cell.empty() || cell == "NA" || cell == "na" || cell == ".") {
        r.covariates.push_back(kMissing);
      } else {
        try {
          r.covariates.push_back(parse_double(cell));
        } catch (const std::exception&) {
          fail("bad value for covariate " + covariate_columns[k] + ": '" +
               cell + "'");
          cov_ok = false;
          break;
        }
      }
    }
    if (!cov_ok) continue;
    data.records.push_back(std::move(r));
  }

  if (!errors.empty()) {
    std::string msg = "invalid rows:";
    for (const auto& e : errors) msg += "\n  " + e;
    throw std::invalid_argument(msg);
  }
  if (data.records.empty()) throw std::invalid_argument("no data rows");
  data.rebuild_index();
  return data;
}

Dataset load_dataset_csv(const std::string& path,
                         const std::vector<std::string>& covariate_columns) {
  return parse_dataset_csv(read_text_file(path), covariate_columns);
}

std::string dataset_to_csv(const Dataset& data) {
  std::string out = "center_id,entry_time,time,status";
  for (const auto& name : data.covariate_names) out += "," + name;
  out += "\n";
  for (const auto& r : data.records) {
    out += r.center_id + "," + fmt_g(r.entry_time) + "," + fmt_g(r.time) +
           "," + std::to_string(r.status);
    for (double v : r.covariates) {
      out += ",";
      if (!is_missing(v)) out += fmt_g(v);
    }
    out += "\n";
  }
  return out;
}

}  // namespace survbench
