#pragma once

#include <string>
#include <vector>

#include "sqlab/config.hpp"
#include "sqlab/estimator.hpp"

namespace sqlab {

class ExperimentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One pass/fail assertion inside an experiment.
struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;  // measured quantity vs bound
};

// A measured quantity published without an attached assertion.
struct ReportEntry {
  std::string name;
  double value = 0.0;
  std::string note;
};

struct ExperimentResult {
  std::string id;
  bool passed = true;  // conjunction of the asserted checks
  std::vector<CheckResult> asserted;
  std::vector<ReportEntry> reported;
  std::vector<ScanResult> scans;
  std::string summary;  // self-contained statement of what was checked
};

struct ExperimentInfo {
  std::string id;
  std::string description;
  bool randomized = true;  // needs a seed
};

const std::vector<ExperimentInfo>& experiment_list();

// Runs one experiment by id; throws ExperimentError on unknown ids and
// ConfigError when a randomized experiment lacks a seed.
ExperimentResult run_experiment(const std::string& id, const RunConfig& cfg);

// Report bundle: config echo, asserted block, reported block, scans.
std::string experiment_json(const ExperimentResult& r, const RunConfig& cfg);
// Plain-text rendering, one line per check.
std::string experiment_text(const ExperimentResult& r);

}  // namespace sqlab
