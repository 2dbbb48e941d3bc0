#pragma once

// Offline stage: snapshot generation, basis extraction (POD or greedy),
// initial-mode enrichment, and the precomputation of every reduced tensor the
// online stage consumes.  Everything here may touch fine-grid vectors; the
// produced OnlineData never does.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "burgers_rb/config.hpp"
#include "burgers_rb/fem.hpp"
#include "burgers_rb/full_solver.hpp"
#include "burgers_rb/online.hpp"
#include "burgers_rb/parametrization.hpp"

namespace burgers_rb {

// POD asked for more modes than the snapshot family supports.
struct RankDeficiencyError : std::runtime_error {
  int available_rank;
  RankDeficiencyError(int rank, const std::string& msg)
      : std::runtime_error(msg), available_rank(rank) {}
};

// Greedy selected a snapshot already contained in the basis span.
struct StagnationError : std::runtime_error {
  int achieved_size;
  StagnationError(int size, const std::string& msg)
      : std::runtime_error(msg), achieved_size(size) {}
};

// Raw material for the POD: all states of one full trajectory per sample.
struct SnapshotSet {
  Eigen::MatrixXd matrix;              // dim x (S * (num_steps + 1))
  std::vector<ParameterPoint> sample;  // the S parameter points
};

// One full solve per sample point; nonconvergence is rethrown tagged with
// the offending sample index.
SnapshotSet build_snapshots(const ProblemConfig& config,
                            const std::vector<ParameterPoint>& sample);

// Orthonormal family of global functions, columns of nodal coefficients.
struct ReducedBasis {
  Eigen::MatrixXd vectors;  // dim x N, column i holds zeta_{i+1}
  int enriched_count = 0;   // leading modes owed to initial-data enrichment
  int size() const { return static_cast<int>(vectors.cols()); }
};

// Modified Gram-Schmidt (two orthogonalization passes) in the exact L2 inner
// product. Columns whose remainder norm falls below drop_tol are dropped.
Eigen::MatrixXd orthonormalize(const FemSpace& space,
                               const Eigen::MatrixXd& columns,
                               double drop_tol = 1e-10);

// POD basis of dimension n: z_i are the leading eigenvectors of the snapshot
// correlation (Gram) matrix in the L2 inner product and zeta_i is the
// normalized image of z_i under the snapshot matrix; the resulting family is
// re-orthonormalized. When the family has more columns than the fine space
// has nodes, the equivalent node-sized eigenproblem is solved instead.
// Throws RankDeficiencyError, reporting the achievable rank, when fewer
// than n correlation eigenvalues are positive or when modes collapse as
// dependent during re-orthonormalization. When spectrum is non-null it
// receives all eigenvalues of the solved problem in descending order.
ReducedBasis pod_basis(const FemSpace& space, const SnapshotSet& snapshots,
                       int n, Eigen::VectorXd* spectrum = nullptr);

// Diagnostics of one greedy outer iteration.
struct GreedyStep {
  int sample_index = 0;   // candidate chosen
  int time_index = 0;     // snapshot time index chosen
  double indicator = 0.0; // max error indicator over the candidate grid
                          // (0 for the randomly seeded first vector)
};

struct GreedyResult {
  ReducedBasis basis;
  std::vector<GreedyStep> steps;  // one per accepted basis vector
};

// Greedy basis selection: seeds with a random (sample, time) snapshot, then
// repeatedly adds the snapshot at the argmax of the per-step error indicator
// (the certified bound evaluated with eps_{k-1} = 0 and the exact stability
// constant) over candidates x {0..T}. Candidates whose reduced solve or
// bound evaluation fails score +infinity, so the basis is refined exactly
// where the model breaks down. Ties resolve to the lowest sample index, then
// the lowest time index. Throws StagnationError when the selected snapshot
// is numerically dependent on the basis (remainder norm < 1e-10).
GreedyResult greedy_basis(const ProblemConfig& config, const FemSpace& space,
                          const AssembledForms& forms,
                          const std::vector<ParameterPoint>& candidates,
                          int target_size);

// Prepends the constant function and the interpolated initial sine modes,
// then re-orthonormalizes the whole family (prepended modes first). Existing
// columns that become dependent are dropped; afterwards every compliant
// initial datum projects onto the span exactly.
ReducedBasis enrich_with_initial_modes(const FemSpace& space,
                                       const FrequencyStructure& freq,
                                       const ReducedBasis& basis);

// Precomputes every parameter-independent reduced quantity (operators,
// loads, projections, boundary auxiliaries, certification Grams, stability
// box). The stability training set starts empty; see scm_train.
OnlineData build_online_data(const ProblemConfig& config,
                             const FemSpace& space,
                             const AssembledForms& forms,
                             const Eigen::MatrixXd& basis);

// Greedy stability-constant training: exact eigensolves at the training
// (mu, k) pairs whose lower/upper bound gap is widest, until the constraint
// budget is exhausted or all gaps fall below scm.sharpness_tol.
void scm_train(const ProblemConfig& config, const FemSpace& space,
               const AssembledForms& forms, const Eigen::MatrixXd& basis,
               OnlineData& data);

enum class BasisMethod { pod, greedy };

// The full offline artifact: basis, reduced tensors, trained stability data,
// and the configuration everything was built against.
struct ReducedModel {
  ProblemConfig config;
  ReducedBasis basis;
  OnlineData online;
};

// One-call offline pipeline: basis construction, optional enrichment, tensor
// precomputation, stability training.
ReducedModel build_reduced_model(const ProblemConfig& config,
                                 BasisMethod method, bool enrich);

// Fine-grid nodal trajectory from reduced coefficients.
Eigen::MatrixXd reconstruct(const Eigen::MatrixXd& basis,
                            const Eigen::MatrixXd& reduced_states);

}  // namespace burgers_rb
