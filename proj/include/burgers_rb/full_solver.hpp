#ifndef BURGERS_RB_FULL_SOLVER_HPP
#define BURGERS_RB_FULL_SOLVER_HPP

#include <vector>

#include "burgers_rb/config.hpp"
#include "burgers_rb/fem.hpp"
#include "burgers_rb/parametrization.hpp"

// Backward-Euler / Newton solver for the penalized weak form of viscous
// Burgers on [0,1]: find u^k with
//
//   1/dt <u^k - u^{k-1}, v> + c(u^k, u^k, v) + nu a(u^k, v) + B(u^k, v)
//     = l_pi(v, t_k) + b_0(t_k) beta_0(v) + b_1(t_k) beta_1(v)
//
// for all nodal hats v, starting from the interpolated initial condition.
// The Dirichlet data enters only through the penalty terms; how well the
// trajectory tracks it is measured by boundary_error_indicator.

namespace burgers_rb {

struct NonconvergenceError : std::runtime_error {
  int step;
  NonconvergenceError(int step_, const std::string& msg)
      : std::runtime_error(msg), step(step_) {}
};

struct FullTrajectory {
  TimeGrid grid;
  Eigen::MatrixXd states;              // (N+1) x (T+1); column k is u^k
  std::vector<int> newton_iterations;  // iterations spent on step k (1-based)
};

// One Newton update for the step system at time t_k, linearized at `guess`:
//   [M/dt + 2C(guess) + nu A + B] delta = -F(guess)
// where `load` carries l_pi(phi_i, t_k) and b0_k/b1_k the boundary data.
// Returns delta.
Eigen::VectorXd newton_step_full(const FemSpace& space,
                                 const AssembledForms& forms, double nu,
                                 double dt, const Eigen::VectorXd& guess,
                                 const Eigen::VectorXd& prev,
                                 const Eigen::VectorXd& load, double b0_k,
                                 double b1_k);

// Full trajectory over the configured grid. Throws NonconvergenceError if a
// step exceeds config.newton_cap iterations.
FullTrajectory solve_full(const ProblemConfig& config,
                          const ParameterPoint& mu);

// eps_b: worst-case nodal mismatch with the Dirichlet data over all steps,
//   sup_k max( |u^k(0) - b_0(t_k)|, |u^k(1) - b_1(t_k)| ).
double boundary_error_indicator(const FullTrajectory& traj,
                                const ParameterPoint& mu,
                                const FrequencyStructure& freq);

// Nodal interpolants of sin(omega^{fS}_p x), one column per spatial source
// frequency; shared by the solver and the offline precomputation.
Eigen::MatrixXd source_space_modes(const FemSpace& space,
                                   const FrequencyStructure& freq);

// Time-dependent source coefficients g_p(t) = sum_l A^f_{lp} sin(omega^{fT}_l t),
// so that pi(f(t, .)) = f_m * 1 + sum_p g_p(t) * source_space_modes[:,p].
Eigen::VectorXd source_time_coefficients(const ParameterPoint& mu,
                                         const FrequencyStructure& freq,
                                         double t);

}  // namespace burgers_rb

#endif
