// Experiment configs and report emission for the command-line driver.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sofdim/homdim.hpp"

namespace sofdim::cli {

struct RepresentationConfig {
  std::string kind = "regular";  // regular | constant_fiber | fields
  std::vector<int> points;       // regular: atoms of the projection (empty = all)
  std::vector<int> dims;         // constant_fiber: per orbit; fields: per atom
  std::vector<std::string> field_texts;  // fields: raw {"fibers": ..} objects
};

struct ExperimentConfig {
  std::string source;      // config file path
  std::string model_path;  // resolved against the config's directory
  std::string task;        // dim | c1 | quality | cost
  RepresentationConfig representation;
  EstimateGrid grid;
  std::vector<int> copies;  // sofic scales as copies of the atom set
  EstimateOptions options;
  int word_length = 2;      // quality task
  std::string output;       // report path; the CSV goes next to it
  std::string echo;         // canonical dump of the parsed config
};

// Throws ModelError with a field path ("grid.eps[1]: ...").
ExperimentConfig parse_config(const std::string& text, const std::string& source);
ExperimentConfig load_config(const std::string& path);

struct Report {
  std::string json;
  std::string csv;  // empty for tasks without per-scale rows
};

Report run_experiment(const ExperimentConfig& config);

// CSV with a versioned header comment and the fixed per-scale columns.
std::string per_scale_csv(const std::vector<ScaleRow>& rows);

// Path of the CSV written next to a JSON report ("x.json" -> "x.csv").
std::string csv_path_for(const std::string& report_path);

}  // namespace sofdim::cli
