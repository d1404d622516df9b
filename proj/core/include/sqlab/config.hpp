#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "sqlab/estimator.hpp"
#include "sqlab/field.hpp"
#include "sqlab/kernel.hpp"
#include "sqlab/signal.hpp"

namespace sqlab {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// t_min <= 0 stands for "span [2h, box side] with `levels` levels".
struct TGridSpec {
  double t_min = 0.0;
  double ratio = 0.0;
  int L = 0;
};

// One run of the tool: grid, kernel, scale grid, randomness, experiment
// parameters. Loaded from versioned JSON; unknown keys are rejected so a
// typo cannot silently fall back to a default.
struct RunConfig {
  int version = 1;
  int n = 1;
  int J = -1;
  int K = 12;
  std::string kernel = "haar";
  TGridSpec tgrid;
  int levels = 48;
  std::uint64_t seed = 1;
  bool seed_set = false;  // true once a file or flag supplied the seed
  std::string experiment;
  std::vector<double> alphas{1.0, 2.0, 4.0, 8.0};
  std::vector<double> deltas{0.5, 0.25, 0.125};
  std::vector<int> shifts{1, 2, 3, 4, 5, 6};
  double mu = 3.0;
  double p = 2.0;
  double lambda = 0.0;  // 0 = decomposition default
  int trials = 0;       // 0 = experiment default
  std::string scope = "all";
  std::string out_dir;
};

RunConfig config_from_json(const std::string& text);
std::string config_json(const RunConfig& cfg);

// Enforces the cross-field invariants (dimension, K > J + 4, parameter
// ranges, known kernel/scope names). Throws ConfigError naming the field.
void validate_config(const RunConfig& cfg);

KernelSpec config_kernel(const RunConfig& cfg);
TGrid config_tgrid(const RunConfig& cfg, const Signal& f);
ApScope scope_from_name(const std::string& name);

}  // namespace sqlab
