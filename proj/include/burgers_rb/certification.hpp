#pragma once

// A-posteriori error certification for the reduced solver.  The per-step
// bound eps_k is driven by a recursion in eps_{k-1} whose ingredients --
// boundary errors, residual dual norm, stability-constant bounds -- are all
// computable from OnlineData alone.  The Gram matrices that make the initial
// error and the residual zero-norm cheap online are assembled here as well.

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "burgers_rb/fem.hpp"
#include "burgers_rb/online.hpp"

namespace burgers_rb {

// Raised when 1/dt + C_inf <= 0: the bound recursion's hypothesis fails and
// no certificate can be produced for this trajectory at this time step.
struct CertificationUnavailableError : std::runtime_error {
  int step;
  CertificationUnavailableError(int step_, const std::string& msg)
      : std::runtime_error(msg), step(step_) {}
};

// Every ingredient of the certified bound at one time step, kept for
// diagnostics and CSV output.
struct BoundState {
  double eps = 0.0;       // certified error bound eps_k
  double c_inf = 0.0;     // stability constant lower bound
  double c_sup = 0.0;     // stability constant upper bound
  double a_inf = 0.0;     // 1/dt + c_inf
  double a_sup = 0.0;     // 1/dt + c_sup
  double b_sup = 0.0;     // eps_{k-1}/dt + sigma + f + res_norm
  double gamma_sup = 0.0;
  double disc_sup = 0.0;  // discriminant (negative -> linear fallback)
  double res_norm = 0.0;  // ||r_k||_0
  double eta = 0.0;
  double sigma_sup = 0.0;
  double f_term = 0.0;
  double e_left = 0.0;    // e_k(0)
  double e_right = 0.0;   // e_k(1)
};

struct CertifiedSolution {
  ReducedTrajectory trajectory;
  std::vector<BoundState> steps;  // size num_steps+1; steps[0] carries ||e_0||

  Eigen::VectorXd bounds() const {
    Eigen::VectorXd b(steps.size());
    for (std::size_t k = 0; k < steps.size(); ++k) b(k) = steps[k].eps;
    return b;
  }
};

// Scratch for the per-step bound evaluation; reuse across steps and
// trajectories to keep certification allocation-free.
struct CertificationWorkspace {
  Eigen::VectorXd rho, grho;   // residual expansion vector and res_gram * rho
  Eigen::VectorXd psi_tri;     // tri_pair^T * state (six pair values)
  Eigen::VectorXd gsin;        // per-step source coefficients g_p(t_k)
  Eigen::VectorXd tmp_state;   // scratch for boundary trilinear products
  ScmQueryContext scm_ctx;

  // Whole-trajectory batches used by certify_trajectory: the state-dependent
  // bound ingredients for every step are formed in a few dense products
  // (column k-1 belongs to step k), and only the scalar recursion and the
  // stability-constant queries then run step by step. Sizes depend on the
  // basis size, the parametrization structure, and the step count only.
  Eigen::MatrixXd rho_all, grho_all;        // residual expansions, q x T
  Eigen::MatrixXd gmat;                     // source coefficients, n_fS x T
  Eigen::MatrixXd psi_all;                  // hat-pair convection, 6 x T
  Eigen::MatrixXd massb_all;                // <state, hat_w>, 2 x (T+1)
  Eigen::MatrixXd stiffb_all, loadsin_all;  // boundary stiffness/source, 2 x T
  Eigen::MatrixXd tri_prod;                 // boundary trilinear scratch, N x T
  Eigen::RowVectorXd trace0, trace1;        // boundary traces of the states
  Eigen::RowVectorXd quad0, quad1;          // state^T c(.,.,hat_w) state
  Eigen::RowVectorXd res_sq;                // squared residual zero-norms
  Eigen::VectorXd b0v, b1v;                 // boundary data per step
};

// --- Offline builders ------------------------------------------------------

// Gram matrix H of the initial projection defects
// {1 - proj(1), pi(sin(omega_l x)) - proj(pi(sin(omega_l x)))} in the L2
// inner product; ||e_0|| = sqrt(e0^T H e0) with e0 = (u0m, A^{u0}).
Eigen::MatrixXd build_initial_gram(const FemSpace& space,
                                   const AssembledForms& forms,
                                   const FrequencyStructure& freq,
                                   const Eigen::MatrixXd& basis);

// Gram matrix G of the Riesz representers (w.r.t. the L2 inner product on the
// zero-boundary subspace) of the residual expansion functionals, ordered
// {int, fS_1.., <>_1.., c_{1,1}..c_{N,N} row-major, a_1..}; size
// (1 + n_fS + 2N + N^2)^2.
Eigen::MatrixXd build_residual_gram(const FemSpace& space,
                                    const AssembledForms& forms,
                                    const FrequencyStructure& freq,
                                    const Eigen::MatrixXd& basis);

// --- Online evaluations -----------------------------------------------------

// sqrt(e0^T H e0), clamped at zero against rounding.
double initial_error_norm(const Eigen::MatrixXd& init_gram,
                          const ParameterPoint& mu);

// ||r_k||_0 = sqrt(rho^T G rho) for the step ending at time t_k.
double residual_zero_norm(const OnlineData& data, const ParameterPoint& mu,
                          double t_k,
                          const Eigen::Ref<const Eigen::VectorXd>& state_k,
                          const Eigen::Ref<const Eigen::VectorXd>& state_km1,
                          CertificationWorkspace* workspace = nullptr);

// One step of the bound recursion given the stability-constant bounds.
// Throws CertificationUnavailableError when 1/dt + c_inf <= 0.
BoundState certified_bound_step(const OnlineData& data,
                                const ParameterPoint& mu, int k,
                                double eps_prev,
                                const Eigen::Ref<const Eigen::VectorXd>& state_k,
                                const Eigen::Ref<const Eigen::VectorXd>& state_km1,
                                double c_inf, double c_sup,
                                CertificationWorkspace* workspace = nullptr);

// Reduced solve plus full certification: stability bounds from the trained
// SCM data, bound recursion seeded with ||e_0||.
CertifiedSolution certify_trajectory(const OnlineData& data,
                                     const ParameterPoint& mu,
                                     CertificationWorkspace* workspace = nullptr,
                                     OnlineWorkspace* online_workspace = nullptr);

}  // namespace burgers_rb
