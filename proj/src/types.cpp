#include "survbench/types.hpp"

#include <algorithm>
#include <stdexcept>

#include "survbench/textio.hpp"

namespace survbench {

std::size_t Dataset::n_events() const {
  std::size_t n = 0;
  for (const auto& r : records)
    if (r.status == 1) ++n;
  return n;
}

void Dataset::rebuild_index() {
  center_index.clear();
  for (std::size_t i = 0; i < records.size(); ++i)
    center_index[records[i].center_id].push_back(i);
}

void Dataset::validate() const {
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (!std::isfinite(r.time) || r.time < 0.0)
      throw std::invalid_argument("record " + std::to_string(i) +
                                  ": time must be finite and >= 0");
    if (!(r.time > r.entry_time))
      throw std::invalid_argument("record " + std::to_string(i) +
                                  ": time must exceed entry_time");
    if (r.status != 0 && r.status != 1)
      throw std::invalid_argument("record " + std::to_string(i) +
                                  ": status must be 0 or 1");
    if (r.covariates.size() != covariate_names.size())
      throw std::invalid_argument("record " + std::to_string(i) +
                                  ": covariate arity mismatch");
    if (center_index.find(r.center_id) == center_index.end())
      throw std::invalid_argument("record " + std::to_string(i) +
                                  ": center missing from index");
  }
  std::size_t indexed = 0;
  for (const auto& [id, idx] : center_index) indexed += idx.size();
  if (indexed != records.size())
    throw std::invalid_argument("center index does not partition records");
  if (!records.empty() && n_events() == 0)
    throw std::invalid_argument("dataset has no events");
}

StepFunction::StepFunction(double initial_value, std::vector<double> knots,
                           std::vector<double> values)
    : initial_(initial_value),
      knots_(std::move(knots)),
      values_(std::move(values)) {
  if (knots_.size() != values_.size())
    throw std::invalid_argument("step function: knots/values size mismatch");
  for (std::size_t k = 1; k < knots_.size(); ++k)
    if (!(knots_[k] > knots_[k - 1]))
      throw std::invalid_argument("step function: knots must be strictly increasing");
}

double StepFunction::eval(double t) const {
  // last knot <= t
  auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
  if (it == knots_.begin()) return initial_;
  return values_[static_cast<std::size_t>(it - knots_.begin()) - 1];
}

double StepFunction::eval_left(double t) const {
  // last knot < t
  auto it = std::lower_bound(knots_.begin(), knots_.end(), t);
  if (it == knots_.begin()) return initial_;
  return values_[static_cast<std::size_t>(it - knots_.begin()) - 1];
}

double StepFunction::jump(std::size_t k) const {
  if (k >= knots_.size()) throw std::out_of_range("step function jump index");
  return values_[k] - (k == 0 ? initial_ : values_[k - 1]);
}

std::string StepFunction::to_csv() const {
  std::string out = "time,value\n";
  out += "0," + fmt_g(initial_) + "\n";
  for (std::size_t k = 0; k < knots_.size(); ++k)
    out += fmt_g(knots_[k]) + "," + fmt_g(values_[k]) + "\n";
  return out;
}

}  // namespace survbench
