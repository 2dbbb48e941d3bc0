#ifndef BURGERS_RB_CONFIG_HPP
#define BURGERS_RB_CONFIG_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

#include "burgers_rb/parametrization.hpp"

// Run configuration, read from a flat text format of sectioned keys:
//
//   # comment
//   problem.num_intervals = 40
//   problem.dt            = 0.02
//   freq.omega_u0         = 3.0          (space-separated list; may be empty)
//   ranges.nu             = 0.8 1.2      (interval "lo hi")
//   ranges.amp_u0_1       = 1.1 3.0      (one key per amplitude coordinate)
//   rb.basis_size         = 5
//   scm.constraint_count  = 10
//
// Unknown keys are rejected, missing required keys and malformed values are
// reported by key name. Amplitude range keys must match the frequency
// structure exactly (one interval per listed frequency).

namespace burgers_rb {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Offline construction knobs (rb.* section).
struct RbOptions {
  int basis_size = 5;        // snapshot-driven reduced dimension N
                             // (enrichment prepends further modes on top)
  int snapshot_count = 30;   // parameter points S feeding the POD
  int greedy_candidates = 100;  // size of the greedy training sample
  bool enrich = false;       // prepend initial-condition modes
  int sweep_min = 2;         // benchmark N-sweep bounds (inclusive)
  int sweep_max = 10;
  int benchmark_samples = 100;  // certified test points per benchmark row
  std::uint64_t seed = 42;   // offline sampling seed (POD/greedy/benchmark)
};

// Stability-factor training knobs (scm.* section).
struct ScmOptions {
  int constraint_count = 10;   // exact eigensolve budget
  int nearest_count = 10;      // constraints kept per query
  int sample_size = 100;       // training sample of (mu, k) pairs
  double sharpness_tol = 1e-10;  // early stop when bounds are this tight
  std::uint64_t seed = 7;
};

struct ProblemConfig {
  int num_intervals = 40;    // mesh elements
  double dt = 0.02;          // time step
  double horizon = 2.0;      // final time T; T/dt must be integral
  double penalty = 1e7;      // Dirichlet penalty P
  double newton_tol = 3e-16; // accepted squared update norm
  int newton_cap = 50;       // max Newton iterations per step
  std::uint64_t seed = 1;    // parameter sampling seed for single solves
  FrequencyStructure freq;
  ParameterRanges ranges;
  RbOptions rb;
  ScmOptions scm;
};

struct TimeGrid {
  double dt = 0.0;
  double horizon = 0.0;
  int num_steps = 0;  // T/dt

  double time(int k) const { return dt * k; }
};

// Validates dt/horizon consistency and returns the discrete grid.
TimeGrid time_grid(const ProblemConfig& config);

// Parses the text format above; `origin` labels error messages (file name).
ProblemConfig parse_config(const std::string& text,
                           const std::string& origin = "<string>");
ProblemConfig load_config(const std::string& path);

}  // namespace burgers_rb

#endif
