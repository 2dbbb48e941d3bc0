#ifndef BURGERS_RB_SCM_HPP
#define BURGERS_RB_SCM_HPP

#include <vector>

#include "burgers_rb/fem.hpp"

// Successive constraint method for the stability factor of the linearized
// operator. For a reduced solution u~ = sum_j u_j zeta_j the factor
//
//   C_k(mu) = inf { nu a(v,v) + 2 c(u~^k, v, v) : v in X0, ||v|| = 1 }
//
// is a minimum of the linear functional
//
//   J(mu, k, y) = 2 sum_j u_j^k(mu) y_j + nu y_{N+1}
//
// over the set Y of vectors y(v) = ( c(zeta_j, v, v), a(v,v) ) with unit v.
// Y is sandwiched between a box of per-coordinate Rayleigh bounds (sigma) and
// the finitely many exactly computed values stored as constraints; minimizing
// J over box + constraints by LP gives a lower bound of C_k, and evaluating J
// at stored minimizers gives an upper bound.

namespace burgers_rb {

struct InfeasibleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// min objective . y  s.t.  lower <= y <= upper  and  rows * y >= row_bounds.
struct LinearProgram {
  Eigen::VectorXd objective;
  Eigen::VectorXd lower, upper;  // finite box
  Eigen::MatrixXd rows;          // may have zero rows
  Eigen::VectorXd row_bounds;
};

struct SimplexResult {
  Eigen::VectorXd minimizer;
  double value = 0.0;
};

// Bounded-variable primal simplex (two phases). Pricing picks the most
// violating reduced cost; after a pivot budget it falls back to Bland's
// least-index rule, which cannot cycle, so termination is guaranteed. A
// context can be kept across solves that share box and rows and differ only
// in the objective: the previous basis stays primal feasible and
// re-optimization usually costs zero or very few pivots.
class SimplexContext {
 public:
  // reuse = true promises the caller kept lower/upper/rows/row_bounds
  // identical to the previous solve on this context. The returned reference
  // stays valid until the next solve on the same context.
  const SimplexResult& solve(const LinearProgram& lp, bool reuse);

 private:
  static constexpr double kDualTol = 1e-9;
  static constexpr double kPivotTol = 1e-11;

  void cold_start(const LinearProgram& lp);
  void optimize(const Eigen::VectorXd& costs);
  void refactor();

  int n_ = 0, m_ = 0, total_ = 0;
  Eigen::MatrixXd A_;
  Eigen::VectorXd b_, lo_, hi_, x_;
  std::vector<int> basis_;
  // 0 = nonbasic at lower, 1 = nonbasic at upper, 2 = basic
  std::vector<signed char> status_;
  // Explicit basis inverse, updated in place on basis changes and rebuilt
  // from scratch every few dozen updates to keep rounding drift bounded.
  Eigen::MatrixXd binv_, bscratch_;
  int updates_ = 0;
  bool have_basis_ = false;
  // Basic values are updated incrementally during bound-flip pivots; this
  // requests a refresh from the factorization before the next pricing loop.
  bool needs_refresh_ = true;
  // Reused scratch so repeated warm solves stay allocation-free.
  Eigen::VectorXd costs_, cb_, pi_, w_, rhs_, xb_, d_;
  SimplexResult result_;
};

SimplexResult simplex_solve(const LinearProgram& lp);

// Per-coordinate Rayleigh bounds of Y: for j < N the extreme generalized
// eigenvalues of the symmetrized c(zeta_j, ., .) against the interior mass,
// for j = N those of the interior stiffness.
struct SigmaBounds {
  Eigen::VectorXd lo, hi;  // size N+1
};

SigmaBounds sigma_bounds(const FemSpace& space, const AssembledForms& forms,
                         const Eigen::MatrixXd& basis);

// Exact stability factor: smallest eigenvalue of
//   nu a(w,v) + c(u_tilde,w,v) + c(u_tilde,v,w)  against  <w,v>  on X0,
// plus the minimizing vector (unit in the interior mass norm, zero-extended
// to the boundary nodes).
struct StabilityResult {
  double value = 0.0;
  Eigen::VectorXd eigenvector;
};

StabilityResult exact_stability(const FemSpace& space,
                                const AssembledForms& forms,
                                const Eigen::VectorXd& u_tilde, double nu);

// One exactly solved training point.
struct ScmConstraint {
  int k = 0;                  // time index
  Eigen::VectorXd mu_coords;  // free coordinates of mu'
  double c_value = 0.0;       // C_{k'}(mu')
  Eigen::VectorXd y_star;     // (c(zeta_j, w, w), a(w,w)) at the minimizer
  Eigen::VectorXd state;      // reduced coefficients u^{k'}(mu')
  double nu = 0.0;
};

struct SCMData {
  SigmaBounds sigma;
  std::vector<ScmConstraint> constraints;
  int nearest_count = 10;        // constraints kept per query
  Eigen::VectorXd coord_spans;   // parameter box spans, for the metric
  int num_steps = 0;             // T, for the metric's time term
};

// Squared parameter-time distance used to pick the active constraints:
// sum_i ((mu_i - mu'_i)/span_i)^2 + ((k - k')/T)^2, zero-span coordinates
// contribute nothing.
double scm_distance_sq(const SCMData& scm, const Eigen::VectorXd& mu_coords,
                       int k, const ScmConstraint& constraint);

// Reusable query state: constraint selection and simplex basis survive
// between successive time steps of one trajectory. A context caches pieces
// of the LP, so it must always be used with the same SCMData instance.
struct ScmQueryContext {
  SimplexContext simplex;
  std::vector<int> selection;
  LinearProgram lp;
  bool primed = false;
};

// LP lower bound of C_k(mu) at a reduced state. ctx may be null (cold solve).
double scm_lower_bound(const SCMData& scm, const Eigen::VectorXd& mu_coords,
                       int k, const Eigen::Ref<const Eigen::VectorXd>& state,
                       double nu, ScmQueryContext* ctx = nullptr);

// min over stored minimizers of J: an upper bound of C_k(mu).
double scm_upper_bound(const SCMData& scm,
                       const Eigen::Ref<const Eigen::VectorXd>& state,
                       double nu);

}  // namespace burgers_rb

#endif
