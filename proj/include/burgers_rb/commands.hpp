#ifndef BURGERS_RB_COMMANDS_HPP
#define BURGERS_RB_COMMANDS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "burgers_rb/certification.hpp"
#include "burgers_rb/full_solver.hpp"
#include "burgers_rb/model_io.hpp"

// Command dispatch behind the CLI plus the CSV emitters it shares with the
// test suites. All CSV numbers are printed with %.17g, so identical inputs
// produce byte-identical files.

namespace burgers_rb {

struct CommandOptions {
  std::string command;      // full-solve | offline-build | online-solve |
                            // benchmark | scm-report
  std::string config_path;  // --config
  std::string model_path;   // --model
  std::string out_path;     // --out
  std::string basis = "pod";  // --basis pod|greedy
  bool basis_given = false;   // --basis present (benchmark runs both when absent)
  bool enrich = false;        // --enrich
  int n_override = 0;         // --N (0 = keep the config value)
  bool has_seed = false;      // --seed present
  std::uint64_t seed = 0;     // --seed value (overrides problem seed)
};

// Runs one command; prints errors to stderr and returns a nonzero status
// instead of throwing.
int run_command(const CommandOptions& options);

// Full trajectory: header `t,x0,...,xN`, one row per timestep.
std::string trajectory_csv(const FullTrajectory& trajectory);

// Reduced solution: header `t,coeff_1,...,coeff_N,bound`.
std::string online_csv(const CertifiedSolution& certified);

// Bound diagnostics: header `k,t,eps_k[,actual_error],C_inf,C_sup,r_norm`;
// the actual-error column appears when a full trajectory is supplied for
// comparison (reconstruction then needs the mesh and the basis).
std::string certification_csv(const CertifiedSolution& certified);
std::string certification_csv(const CertifiedSolution& certified,
                              const FemSpace& space,
                              const Eigen::MatrixXd& basis,
                              const FullTrajectory& full);

// Stability sandwich along one trajectory: header `k,C_exact,C_inf,C_sup`.
std::string scm_report_csv(const ReducedModel& model, const ParameterPoint& mu);

// One row of the N-sweep benchmark. Error statistics aggregate the certified
// relative bound eps_k/|u~^k| and the true relative error over every
// (sample, timestep) pair; the same parameter sample and the same full
// trajectories are reused across all rows.
struct BenchmarkRow {
  std::string method;
  int n = 0;
  double max_rel_bound = 0.0;
  double mean_rel_bound = 0.0;
  double max_rel_error = 0.0;
  double mean_rel_error = 0.0;
  double offline_seconds = 0.0;
  double mean_online_seconds = 0.0;
  double mean_full_seconds = 0.0;
};

std::vector<BenchmarkRow> run_benchmark(const ProblemConfig& config,
                                        const std::vector<BasisMethod>& methods);

std::string benchmark_csv(const std::vector<BenchmarkRow>& rows);

}  // namespace burgers_rb

#endif
