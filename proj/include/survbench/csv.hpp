#pragma once

#include <string>
#include <vector>

#include "survbench/types.hpp"

namespace survbench {

// Loads a subject-level CSV with required columns center_id, time, status, an
// optional entry_time column and the configured covariate columns. Empty
// covariate cells become the missing marker. Row-level problems are collected
// and reported together, each with its line number.
Dataset load_dataset_csv(const std::string& path,
                         const std::vector<std::string>& covariate_columns);

// Parses CSV text directly (same contract as load_dataset_csv).
Dataset parse_dataset_csv(const std::string& text,
                          const std::vector<std::string>& covariate_columns);

std::string dataset_to_csv(const Dataset& data);

}  // namespace survbench
