#include "burgers_rb/certification.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace burgers_rb {

namespace {

// Nodal interpolant of sin(omega x) on the mesh.
NodalVector sine_interpolant(const FemSpace& space, double omega) {
  return interpolate(space,
                     [omega](double x) { return std::sin(omega * x); });
}

// g_p(t) = sum_l A^f_{lp} sin(omega^{fT}_l t): the time coefficient of the
// p-th spatial source mode.
void source_time_values(const ParameterPoint& mu, const FrequencyStructure& freq,
                        double t, Eigen::VectorXd& out) {
  const int n_fs = freq.n_fS();
  const int n_ft = freq.n_fT();
  out.resize(n_fs);
  for (int p = 0; p < n_fs; ++p) {
    double g = 0.0;
    for (int l = 0; l < n_ft; ++l) {
      g += mu.amp_f(l, p) * std::sin(freq.omega_fT[l] * t);
    }
    out(p) = g;
  }
}

}  // namespace

Eigen::MatrixXd build_initial_gram(const FemSpace& space,
                                   const AssembledForms& forms,
                                   const FrequencyStructure& freq,
                                   const Eigen::MatrixXd& basis) {
  const int n_u0 = freq.n_u0();
  const int count = 1 + n_u0;
  const int dim = space.dim();
  const int n = static_cast<int>(basis.cols());
  if (basis.rows() != dim) {
    throw std::invalid_argument("build_initial_gram: basis/mesh mismatch");
  }

  // The functions whose projection defects span the initial error: the
  // constant one and the interpolated initial sine modes.
  Eigen::MatrixXd modes(dim, count);
  modes.col(0).setOnes();
  for (int l = 0; l < n_u0; ++l) {
    modes.col(1 + l) = sine_interpolant(space, freq.omega_u0[l]);
  }

  Eigen::MatrixXd mass_basis(dim, n);
  for (int j = 0; j < n; ++j) {
    mass_basis.col(j) = forms.mass.apply(basis.col(j));
  }
  Eigen::MatrixXd red_mass(n, n);
  red_mass.noalias() = basis.transpose() * mass_basis;
  Eigen::LDLT<Eigen::MatrixXd> mass_solver(red_mass);

  Eigen::MatrixXd defects = modes;
  if (n > 0) {
    Eigen::MatrixXd coeffs =
        mass_solver.solve(mass_basis.transpose() * modes);
    defects.noalias() -= basis * coeffs;
  }

  Eigen::MatrixXd gram(count, count);
  for (int j = 0; j < count; ++j) {
    const Eigen::VectorXd weighted = forms.mass.apply(defects.col(j));
    for (int i = 0; i < count; ++i) {
      gram(i, j) = defects.col(i).dot(weighted);
    }
  }
  Eigen::MatrixXd sym = 0.5 * (gram + gram.transpose());
  return sym;
}

Eigen::MatrixXd build_residual_gram(const FemSpace& space,
                                    const AssembledForms& forms,
                                    const FrequencyStructure& freq,
                                    const Eigen::MatrixXd& basis) {
  const int n = static_cast<int>(basis.cols());
  const int n_fs = freq.n_fS();
  const int q = 1 + n_fs + 2 * n + n * n;
  const int idim = space.interior_dim();
  if (basis.rows() != space.dim()) {
    throw std::invalid_argument("build_residual_gram: basis/mesh mismatch");
  }

  // Interior coordinates of the residual expansion functionals, ordered
  // {int, fS, <.,zeta_j>, c(zeta_j, zeta_j', .) row-major, a(zeta_j, .)}.
  Eigen::MatrixXd funcs(idim, q);
  int col = 0;
  funcs.col(col++) = forms.hat_integrals.segment(1, idim);
  for (int p = 0; p < n_fs; ++p) {
    const NodalVector mode = sine_interpolant(space, freq.omega_fS[p]);
    funcs.col(col++) = forms.mass.apply(mode).segment(1, idim);
  }
  for (int j = 0; j < n; ++j) {
    funcs.col(col++) = forms.mass.apply(basis.col(j)).segment(1, idim);
  }
  const int conv_off = col;
  for (int j = 0; j < n; ++j) {
    for (int jp = j; jp < n; ++jp) {
      const Eigen::VectorXd sweep =
          trilinear_sweep(space, basis.col(j), basis.col(jp));
      funcs.col(conv_off + j * n + jp) = sweep.segment(1, idim);
      if (jp != j) {
        // c is symmetric in its first two arguments.
        funcs.col(conv_off + jp * n + j) = funcs.col(conv_off + j * n + jp);
      }
    }
  }
  col = conv_off + n * n;
  for (int j = 0; j < n; ++j) {
    funcs.col(col++) = forms.stiffness.apply(basis.col(j)).segment(1, idim);
  }

  // Riesz representers in the zero-boundary subspace: M0 z = functional.
  const Tridiagonal interior_mass = forms.mass.interior();
  Eigen::MatrixXd riesz(idim, q);
  Eigen::VectorXd rhs;
  Eigen::VectorXd scratch(std::max(idim - 1, 1));
  for (int j = 0; j < q; ++j) {
    rhs = funcs.col(j);
    thomas_solve_inplace(interior_mass, rhs, scratch);
    riesz.col(j) = rhs;
  }

  Eigen::MatrixXd gram(q, q);
  gram.noalias() = funcs.transpose() * riesz;
  Eigen::MatrixXd sym = 0.5 * (gram + gram.transpose());
  return sym;
}

double initial_error_norm(const Eigen::MatrixXd& init_gram,
                          const ParameterPoint& mu) {
  const int n_u0 = static_cast<int>(mu.amp_u0.size());
  if (init_gram.rows() != 1 + n_u0 || init_gram.cols() != 1 + n_u0) {
    throw std::invalid_argument(
        "initial_error_norm: Gram size does not match the initial structure");
  }
  Eigen::VectorXd coeff(1 + n_u0);
  coeff(0) = mu.u0m;
  coeff.tail(n_u0) = mu.amp_u0;
  const double sq = coeff.dot(init_gram * coeff);
  return std::sqrt(std::max(sq, 0.0));
}

double residual_zero_norm(const OnlineData& data, const ParameterPoint& mu,
                          double t_k,
                          const Eigen::Ref<const Eigen::VectorXd>& state_k,
                          const Eigen::Ref<const Eigen::VectorXd>& state_km1,
                          CertificationWorkspace* workspace) {
  CertificationWorkspace local;
  CertificationWorkspace& ws = workspace ? *workspace : local;

  const int n = data.basis_size;
  const int n_fs = data.freq.n_fS();
  const int q = 1 + n_fs + 2 * n + n * n;
  if (data.res_gram.rows() != q) {
    throw std::invalid_argument(
        "residual_zero_norm: Gram size does not match the model");
  }
  ws.rho.resize(q);
  ws.grho.resize(q);

  ws.rho(0) = mu.f_m;
  source_time_values(mu, data.freq, t_k, ws.gsin);
  ws.rho.segment(1, n_fs) = ws.gsin;
  ws.rho.segment(1 + n_fs, n) = (state_km1 - state_k) / data.dt;
  Eigen::Map<Eigen::MatrixXd> conv_block(ws.rho.data() + 1 + n_fs + n, n, n);
  conv_block.noalias() = -state_k * state_k.transpose();
  ws.rho.tail(n) = -mu.nu * state_k;

  ws.grho.noalias() = data.res_gram.selfadjointView<Eigen::Lower>() * ws.rho;
  const double sq = ws.rho.dot(ws.grho);
  return std::sqrt(std::max(sq, 0.0));
}

BoundState certified_bound_step(const OnlineData& data,
                                const ParameterPoint& mu, int k,
                                double eps_prev,
                                const Eigen::Ref<const Eigen::VectorXd>& state_k,
                                const Eigen::Ref<const Eigen::VectorXd>& state_km1,
                                double c_inf, double c_sup,
                                CertificationWorkspace* workspace) {
  CertificationWorkspace local;
  CertificationWorkspace& ws = workspace ? *workspace : local;

  BoundState out;
  out.c_inf = c_inf;
  out.c_sup = c_sup;
  out.a_inf = 1.0 / data.dt + c_inf;
  out.a_sup = 1.0 / data.dt + c_sup;
  if (out.a_inf <= 0.0) {
    throw CertificationUnavailableError(
        k, "certified_bound_step: 1/dt + C_inf <= 0 at step " +
               std::to_string(k) +
               "; a smaller time step is needed to certify this trajectory");
  }

  const double t_k = k * data.dt;
  const double b0 = boundary0_value(mu, data.freq, t_k);
  const double b1 = boundary1_value(mu, data.freq, t_k);
  const double u_at0 = data.zeta_at_0.dot(state_k);
  const double u_at1 = data.zeta_at_1.dot(state_k);
  out.e_left = b0 - u_at0;
  out.e_right = b1 - u_at1;
  const double abs_el = std::abs(out.e_left);
  const double abs_er = std::abs(out.e_right);
  out.eta = (abs_el + abs_er) * data.aux.hat_norm;

  // psi(v, w) = 2 c(u~, v, w) + nu a(v, w) evaluated on the stored hat pairs
  // (0,0), (n,n), (1,0), (0,1), (n-1,n), (n,n-1).
  ws.psi_tri.resize(6);
  ws.psi_tri.noalias() = data.aux.tri_pair.transpose() * state_k;
  const auto psi_pair = [&](int pair) {
    return 2.0 * ws.psi_tri(pair) + mu.nu * data.aux.stiff_pair(pair);
  };
  const double cross_left = psi_pair(2) + psi_pair(3);
  const double cross_right = psi_pair(4) + psi_pair(5);
  out.f_term = data.aux.node_dual *
               (abs_el * std::abs(cross_left) + abs_er * std::abs(cross_right));

  out.res_norm = residual_zero_norm(data, mu, t_k, state_k, state_km1, &ws);
  out.sigma_sup = 2.0 * out.eta * std::max(std::abs(c_sup), std::abs(c_inf));
  out.b_sup = eps_prev / data.dt + out.sigma_sup + out.f_term + out.res_norm;

  // Residual functional at the two boundary hats. residual_zero_norm left
  // the source time coefficients for t_k in ws.gsin.
  ws.tmp_state.resize(data.basis_size);
  double r_bnd[2];
  for (int w = 0; w < 2; ++w) {
    double r = mu.f_m * data.aux.load_const(w);
    r += ws.gsin.dot(data.aux.load_sin.col(w));
    r += data.penalty * (w == 0 ? out.e_left : out.e_right);
    const auto mass_col = data.aux.mass_bnd.col(w);
    r -= (state_k.dot(mass_col) - state_km1.dot(mass_col)) / data.dt;
    ws.tmp_state.noalias() =
        (w == 0 ? data.aux.tri_bnd0 : data.aux.tri_bnd1) * state_k;
    r -= state_k.dot(ws.tmp_state);
    r -= mu.nu * state_k.dot(data.aux.stiff_bnd.col(w));
    r_bnd[w] = r;
  }

  const double e0 = out.e_left;
  const double e1 = out.e_right;
  out.gamma_sup = -e0 * e0 * psi_pair(0) - e1 * e1 * psi_pair(1) -
                  c_inf * out.eta * out.eta + out.eta * out.f_term +
                  out.eta * out.res_norm + e0 * r_bnd[0] + e1 * r_bnd[1] -
                  data.penalty * (e0 * e0 + e1 * e1) +
                  (e1 * e1 * e1 - e0 * e0 * e0) / 6.0;

  out.disc_sup =
      out.b_sup * out.b_sup +
      4.0 * (out.gamma_sup >= 0.0 ? out.a_sup : out.a_inf) * out.gamma_sup;
  if (out.disc_sup >= 0.0) {
    out.eps = (out.b_sup + std::sqrt(out.disc_sup)) / (2.0 * out.a_inf);
  } else {
    out.eps = out.b_sup / out.a_inf;
  }
  return out;
}

CertifiedSolution certify_trajectory(const OnlineData& data,
                                     const ParameterPoint& mu,
                                     CertificationWorkspace* workspace,
                                     OnlineWorkspace* online_workspace) {
  if (data.scm.constraints.empty()) {
    throw std::logic_error(
        "certify_trajectory: the model carries no stability training points");
  }
  CertificationWorkspace local;
  CertificationWorkspace& ws = workspace ? *workspace : local;

  CertifiedSolution out;
  out.trajectory = solve_reduced(data, mu, online_workspace);
  out.steps.resize(data.num_steps + 1);
  out.steps[0].eps = initial_error_norm(data.init_gram, mu);

  const int T = data.num_steps;
  if (T == 0) return out;
  const int n = data.basis_size;
  const int n_fs = data.freq.n_fS();
  const int n_ft = data.freq.n_fT();
  const int q = 1 + n_fs + 2 * n + n * n;
  const Eigen::MatrixXd& states = out.trajectory.states;
  const auto states_k = states.rightCols(T);    // columns 1..T
  const auto states_km1 = states.leftCols(T);   // columns 0..T-1

  // Batch every state- and time-dependent bound ingredient; the per-step
  // formulas below then match certified_bound_step term by term.
  ws.gmat.resize(n_fs, T);
  ws.b0v.resize(T);
  ws.b1v.resize(T);
  for (int k = 1; k <= T; ++k) {
    const double t_k = k * data.dt;
    ws.b0v(k - 1) = boundary0_value(mu, data.freq, t_k);
    ws.b1v(k - 1) = boundary1_value(mu, data.freq, t_k);
    for (int p = 0; p < n_fs; ++p) {
      double g = 0.0;
      for (int l = 0; l < n_ft; ++l) {
        g += mu.amp_f(l, p) * std::sin(data.freq.omega_fT[l] * t_k);
      }
      ws.gmat(p, k - 1) = g;
    }
  }

  ws.rho_all.resize(q, T);
  ws.rho_all.row(0).setConstant(mu.f_m);
  ws.rho_all.middleRows(1, n_fs) = ws.gmat;
  ws.rho_all.middleRows(1 + n_fs, n) = (states_km1 - states_k) / data.dt;
  for (int j = 0; j < T; ++j) {
    Eigen::Map<Eigen::MatrixXd> conv_block(
        ws.rho_all.col(j).data() + 1 + n_fs + n, n, n);
    conv_block.noalias() = -states_k.col(j) * states_k.col(j).transpose();
  }
  ws.rho_all.bottomRows(n) = -mu.nu * states_k;
  ws.grho_all.resize(q, T);
  ws.grho_all.noalias() =
      data.res_gram.selfadjointView<Eigen::Lower>() * ws.rho_all;
  ws.res_sq = ws.rho_all.cwiseProduct(ws.grho_all).colwise().sum();

  ws.trace0.noalias() = data.zeta_at_0.transpose() * states_k;
  ws.trace1.noalias() = data.zeta_at_1.transpose() * states_k;
  ws.psi_all.noalias() = data.aux.tri_pair.transpose() * states_k;
  ws.massb_all.noalias() = data.aux.mass_bnd.transpose() * states;
  ws.stiffb_all.noalias() = data.aux.stiff_bnd.transpose() * states_k;
  ws.loadsin_all.noalias() = data.aux.load_sin.transpose() * ws.gmat;
  ws.tri_prod.noalias() = data.aux.tri_bnd0 * states_k;
  ws.quad0 = states_k.cwiseProduct(ws.tri_prod).colwise().sum();
  ws.tri_prod.noalias() = data.aux.tri_bnd1 * states_k;
  ws.quad1 = states_k.cwiseProduct(ws.tri_prod).colwise().sum();

  for (int k = 1; k <= T; ++k) {
    const auto state_k = states.col(k);
    const double c_inf = scm_lower_bound(data.scm, mu.free_coords, k, state_k,
                                         mu.nu, &ws.scm_ctx);
    const double c_sup = scm_upper_bound(data.scm, state_k, mu.nu);

    const int j = k - 1;  // batch column of step k
    BoundState& bs = out.steps[k];
    bs.c_inf = c_inf;
    bs.c_sup = c_sup;
    bs.a_inf = 1.0 / data.dt + c_inf;
    bs.a_sup = 1.0 / data.dt + c_sup;
    if (bs.a_inf <= 0.0) {
      throw CertificationUnavailableError(
          k, "certify_trajectory: 1/dt + C_inf <= 0 at step " +
                 std::to_string(k) +
                 "; a smaller time step is needed to certify this trajectory");
    }

    bs.e_left = ws.b0v(j) - ws.trace0(j);
    bs.e_right = ws.b1v(j) - ws.trace1(j);
    const double abs_el = std::abs(bs.e_left);
    const double abs_er = std::abs(bs.e_right);
    bs.eta = (abs_el + abs_er) * data.aux.hat_norm;

    const auto psi_pair = [&](int pair) {
      return 2.0 * ws.psi_all(pair, j) + mu.nu * data.aux.stiff_pair(pair);
    };
    const double cross_left = psi_pair(2) + psi_pair(3);
    const double cross_right = psi_pair(4) + psi_pair(5);
    bs.f_term = data.aux.node_dual * (abs_el * std::abs(cross_left) +
                                      abs_er * std::abs(cross_right));

    bs.res_norm = std::sqrt(std::max(ws.res_sq(j), 0.0));
    bs.sigma_sup = 2.0 * bs.eta * std::max(std::abs(c_sup), std::abs(c_inf));
    bs.b_sup = out.steps[k - 1].eps / data.dt + bs.sigma_sup + bs.f_term +
               bs.res_norm;

    double r_bnd[2];
    for (int w = 0; w < 2; ++w) {
      double r = mu.f_m * data.aux.load_const(w);
      r += ws.loadsin_all(w, j);
      r += data.penalty * (w == 0 ? bs.e_left : bs.e_right);
      r -= (ws.massb_all(w, k) - ws.massb_all(w, k - 1)) / data.dt;
      r -= w == 0 ? ws.quad0(j) : ws.quad1(j);
      r -= mu.nu * ws.stiffb_all(w, j);
      r_bnd[w] = r;
    }

    const double e0 = bs.e_left;
    const double e1 = bs.e_right;
    bs.gamma_sup = -e0 * e0 * psi_pair(0) - e1 * e1 * psi_pair(1) -
                   c_inf * bs.eta * bs.eta + bs.eta * bs.f_term +
                   bs.eta * bs.res_norm + e0 * r_bnd[0] + e1 * r_bnd[1] -
                   data.penalty * (e0 * e0 + e1 * e1) +
                   (e1 * e1 * e1 - e0 * e0 * e0) / 6.0;

    bs.disc_sup = bs.b_sup * bs.b_sup +
                  4.0 * (bs.gamma_sup >= 0.0 ? bs.a_sup : bs.a_inf) *
                      bs.gamma_sup;
    if (bs.disc_sup >= 0.0) {
      bs.eps = (bs.b_sup + std::sqrt(bs.disc_sup)) / (2.0 * bs.a_inf);
    } else {
      bs.eps = bs.b_sup / bs.a_inf;
    }
  }
  return out;
}

}  // namespace burgers_rb
