#pragma once

#include <cstddef>
#include <vector>

#include "survbench/types.hpp"

namespace survbench {

// Product-limit estimator of the event-time survival S(t). Knots at event
// times only. Risk set at time s is {entry_time < s <= time}; within a tied
// time, events precede censorings. Throws "empty cohort" on empty input and
// "empty risk set" when an event time has nobody at risk.
StepFunction kaplan_meier(const std::vector<SubjectRecord>& records);
StepFunction kaplan_meier(const Dataset& data,
                          const std::vector<std::size_t>& indices);

// Kaplan-Meier with the roles of event and censoring swapped: estimates the
// follow-up curve G(t) = P(C > t). An all-events cohort yields G == 1.
StepFunction reverse_kaplan_meier(const std::vector<SubjectRecord>& records);
StepFunction reverse_kaplan_meier(const Dataset& data,
                                  const std::vector<std::size_t>& indices);

// Cumulative discrete hazard recovered from a survival-type step function:
// jumps 1 - S(s)/S(s-) at the curve's knots (0 once S(s-) reaches 0).
StepFunction hazard_steps_from_survival(const StepFunction& survival);

}  // namespace survbench
