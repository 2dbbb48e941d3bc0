#include "burgers_rb/full_solver.hpp"

#include <cmath>
#include <string>

namespace burgers_rb {

Eigen::MatrixXd source_space_modes(const FemSpace& space,
                                   const FrequencyStructure& freq) {
  Eigen::MatrixXd modes(space.dim(), freq.n_fS());
  for (int p = 0; p < freq.n_fS(); ++p) {
    const double omega = freq.omega_fS[p];
    for (int i = 0; i < space.dim(); ++i) {
      modes(i, p) = std::sin(omega * space.nodes(i));
    }
  }
  return modes;
}

Eigen::VectorXd source_time_coefficients(const ParameterPoint& mu,
                                         const FrequencyStructure& freq,
                                         double t) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(freq.n_fS());
  for (int l = 0; l < freq.n_fT(); ++l) {
    const double st = std::sin(freq.omega_fT[l] * t);
    for (int p = 0; p < freq.n_fS(); ++p) g(p) += mu.amp_f(l, p) * st;
  }
  return g;
}

namespace {

// System matrix K = M/dt + 2 C(guess) + nu A + B, assembled in one sweep.
void build_step_matrix(const FemSpace& space, const AssembledForms& forms,
                       double nu, double dt, const Eigen::VectorXd& guess,
                       Tridiagonal& K) {
  const int n = space.dim();
  K.diag = forms.mass.diag / dt + nu * forms.stiffness.diag;
  K.diag += forms.boundary_penalty_diag;
  K.lower = forms.mass.lower / dt + nu * forms.stiffness.lower;
  K.upper = forms.mass.upper / dt + nu * forms.stiffness.upper;
  // 2 C(guess): per element (e, e+1), column weights from the linearization
  // of the advection form (see convect_matrix).
  for (int e = 0; e + 1 < n; ++e) {
    const double wa = guess(e), wb = guess(e + 1);
    const double col_a = wa / 3.0 + wb / 6.0;
    const double col_b = wa / 6.0 + wb / 3.0;
    K.diag(e) += col_a;        // 2 * 0.5 * col_a
    K.upper(e) += col_b;
    K.lower(e) -= col_a;
    K.diag(e + 1) -= col_b;
  }
}

// -F(guess): everything the step equation wants minus what the guess gives.
void build_step_residual(const AssembledForms& forms, double nu, double dt,
                         const Eigen::VectorXd& guess,
                         const Eigen::VectorXd& prev,
                         const Eigen::VectorXd& load, double b0_k, double b1_k,
                         const FemSpace& space, Eigen::VectorXd& r) {
  r = forms.mass.apply(prev - guess) / dt;
  r += load;
  r += b0_k * forms.beta0 + b1_k * forms.beta1;
  r -= trilinear_sweep(space, guess, guess);
  r -= nu * forms.stiffness.apply(guess);
  r -= forms.boundary_penalty_diag.cwiseProduct(guess);
}

}  // namespace

Eigen::VectorXd newton_step_full(const FemSpace& space,
                                 const AssembledForms& forms, double nu,
                                 double dt, const Eigen::VectorXd& guess,
                                 const Eigen::VectorXd& prev,
                                 const Eigen::VectorXd& load, double b0_k,
                                 double b1_k) {
  Tridiagonal K = Tridiagonal::zero(space.dim());
  Eigen::VectorXd r(space.dim());
  build_step_matrix(space, forms, nu, dt, guess, K);
  build_step_residual(forms, nu, dt, guess, prev, load, b0_k, b1_k, space, r);
  return thomas_solve(K, std::move(r));
}

FullTrajectory solve_full(const ProblemConfig& config,
                          const ParameterPoint& mu) {
  if (!(mu.nu > 0.0)) {
    throw std::invalid_argument("solve_full: viscosity must be positive");
  }
  const TimeGrid grid = time_grid(config);
  const FemSpace space = build_space(config.num_intervals);
  const AssembledForms forms = assemble_forms(space, config.penalty);
  const DataFunctions data(mu, config.freq);
  const int n = space.dim();

  FullTrajectory traj;
  traj.grid = grid;
  traj.states.resize(n, grid.num_steps + 1);
  traj.newton_iterations.assign(grid.num_steps + 1, 0);
  traj.states.col(0) =
      interpolate(space, [&](double x) { return data.initial(x); });

  const Eigen::MatrixXd fs_modes = source_space_modes(space, config.freq);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);

  Tridiagonal K = Tridiagonal::zero(n);
  Eigen::VectorXd f_nodal(n), load(n), delta(n), r(n), scratch(n - 1);
  Eigen::VectorXd iter = traj.states.col(0);

  for (int k = 1; k <= grid.num_steps; ++k) {
    const double t = grid.time(k);
    // l_pi(., t_k) = M [ f_m 1 + sum_p g_p(t_k) pi(sin(omega_p .)) ]
    f_nodal = mu.f_m * ones;
    if (fs_modes.cols() > 0) {
      f_nodal.noalias() +=
          fs_modes * source_time_coefficients(mu, config.freq, t);
    }
    load = forms.mass.apply(f_nodal);
    const double b0_k = data.boundary0(t);
    const double b1_k = data.boundary1(t);

    const Eigen::VectorXd prev = traj.states.col(k - 1);
    bool converged = false;
    for (int it = 1; it <= config.newton_cap; ++it) {
      build_step_matrix(space, forms, mu.nu, grid.dt, iter, K);
      build_step_residual(forms, mu.nu, grid.dt, iter, prev, load, b0_k, b1_k,
                          space, r);
      thomas_solve_inplace(K, r, scratch);
      iter += r;
      traj.newton_iterations[k] = it;
      if (r.squaredNorm() <= config.newton_tol) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      throw NonconvergenceError(
          k, "solve_full: Newton did not converge within " +
                 std::to_string(config.newton_cap) + " iterations at step " +
                 std::to_string(k) + " (t = " + std::to_string(t) + ")");
    }
    traj.states.col(k) = iter;
  }
  return traj;
}

double boundary_error_indicator(const FullTrajectory& traj,
                                const ParameterPoint& mu,
                                const FrequencyStructure& freq) {
  const DataFunctions data(mu, freq);
  const int last = static_cast<int>(traj.states.rows()) - 1;
  double eps_b = 0.0;
  for (int k = 0; k <= traj.grid.num_steps; ++k) {
    const double t = traj.grid.time(k);
    eps_b = std::max(eps_b, std::abs(traj.states(0, k) - data.boundary0(t)));
    eps_b = std::max(eps_b, std::abs(traj.states(last, k) - data.boundary1(t)));
  }
  return eps_b;
}

}  // namespace burgers_rb
