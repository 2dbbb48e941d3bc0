#include "burgers_rb/online.hpp"

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

#include "burgers_rb/full_solver.hpp"

namespace burgers_rb {

std::vector<std::size_t> OnlineData::size_signature() const {
  std::vector<std::size_t> sig;
  auto push_mat = [&sig](const Eigen::MatrixXd& m) {
    sig.push_back(static_cast<std::size_t>(m.rows()));
    sig.push_back(static_cast<std::size_t>(m.cols()));
  };
  auto push_vec = [&sig](const Eigen::VectorXd& v) {
    sig.push_back(static_cast<std::size_t>(v.size()));
  };
  sig.push_back(static_cast<std::size_t>(basis_size));
  sig.push_back(static_cast<std::size_t>(freq.free_dim()));
  push_mat(red_mass);
  push_mat(red_stiff);
  push_mat(red_bpen);
  sig.push_back(red_tri.size());
  for (const auto& t : red_tri) push_mat(t);
  push_vec(red_beta0);
  push_vec(red_beta1);
  push_vec(red_int);
  push_mat(red_fsin);
  push_vec(proj_one);
  push_mat(proj_u0sin);
  push_vec(zeta_at_0);
  push_vec(zeta_at_1);
  push_mat(aux.load_sin);
  push_mat(aux.mass_bnd);
  push_mat(aux.stiff_bnd);
  push_mat(aux.tri_bnd0);
  push_mat(aux.tri_bnd1);
  push_mat(aux.tri_pair);
  push_vec(aux.stiff_pair);
  push_mat(init_gram);
  push_mat(res_gram);
  push_vec(scm.sigma.lo);
  push_vec(scm.sigma.hi);
  sig.push_back(scm.constraints.size());
  for (const auto& con : scm.constraints) {
    push_vec(con.mu_coords);
    push_vec(con.y_star);
    push_vec(con.state);
  }
  push_vec(scm.coord_spans);
  return sig;
}

void OnlineWorkspace::resize(int n) {
  if (base.rows() == n) return;
  base.resize(n, n);
  tri_pack.resize(static_cast<Eigen::Index>(n) * n * n);
  jacobian.resize(n, n);
  fvec.resize(n);
  mult.resize(n);
  load.resize(n);
}

namespace {

// Solves a dense n-by-n system in place: Gaussian elimination with partial
// pivoting on column-major a, right-hand side b overwritten with the
// solution. mult is n doubles of scratch. A vanishing pivot leaves infinities
// behind, which the Newton convergence check then rejects.
void solve_dense_inplace(int n, double* a, double* b, double* mult) {
  for (int c = 0; c < n; ++c) {
    double* col = a + static_cast<std::ptrdiff_t>(c) * n;
    int piv = c;
    double big = std::abs(col[c]);
    for (int r = c + 1; r < n; ++r) {
      const double mag = std::abs(col[r]);
      if (mag > big) {
        big = mag;
        piv = r;
      }
    }
    if (piv != c) {
      for (int cc = 0; cc < n; ++cc) {
        std::swap(a[static_cast<std::ptrdiff_t>(cc) * n + c],
                  a[static_cast<std::ptrdiff_t>(cc) * n + piv]);
      }
      std::swap(b[c], b[piv]);
    }
    const double inv = 1.0 / col[c];
    for (int r = c + 1; r < n; ++r) mult[r] = col[r] * inv;
    for (int cc = c + 1; cc < n; ++cc) {
      double* tail = a + static_cast<std::ptrdiff_t>(cc) * n;
      const double head = tail[c];
      for (int r = c + 1; r < n; ++r) tail[r] -= mult[r] * head;
    }
    for (int r = c + 1; r < n; ++r) b[r] -= mult[r] * b[c];
  }
  for (int c = n - 1; c >= 0; --c) {
    double s = b[c];
    const double* col = a + static_cast<std::ptrdiff_t>(c) * n;
    for (int cc = c + 1; cc < n; ++cc) {
      s -= a[static_cast<std::ptrdiff_t>(cc) * n + c] * b[cc];
    }
    b[c] = s / col[c];
  }
}

void check_structure(const OnlineData& data, const ParameterPoint& mu) {
  const bool ok = mu.amp_b0.size() == data.freq.n_b0() &&
                  mu.amp_b1.size() == data.freq.n_b1() &&
                  mu.amp_u0.size() == data.freq.n_u0() &&
                  mu.amp_f.rows() == data.freq.n_fT() &&
                  mu.amp_f.cols() == data.freq.n_fS() &&
                  mu.free_coords.size() == data.freq.free_dim();
  if (!ok) {
    throw std::invalid_argument(
        "parameter point does not match the frequency structure of the "
        "reduced model");
  }
}

}  // namespace

Eigen::VectorXd reduced_initial(const OnlineData& data,
                                const ParameterPoint& mu) {
  check_structure(data, mu);
  Eigen::VectorXd coeffs = mu.u0m * data.proj_one;
  for (int l = 0; l < data.freq.n_u0(); ++l) {
    coeffs.noalias() += mu.amp_u0(l) * data.proj_u0sin.row(l).transpose();
  }
  return coeffs;
}

ReducedTrajectory solve_reduced(const OnlineData& data,
                                const ParameterPoint& mu,
                                OnlineWorkspace* workspace) {
  check_structure(data, mu);
  const int n = data.basis_size;
  OnlineWorkspace local;
  OnlineWorkspace& ws = workspace ? *workspace : local;
  ws.resize(n);

  ReducedTrajectory traj;
  traj.grid = data.grid();
  traj.states.resize(n, data.num_steps + 1);
  traj.newton_iterations.assign(data.num_steps + 1, 0);
  traj.states.col(0) = reduced_initial(data, mu);

  ws.base = data.red_mass / data.dt + mu.nu * data.red_stiff + data.red_bpen;

  // Repack the convection tensor with the basis index fastest, so the inner
  // Newton accumulation runs over contiguous memory.
  const int n_fs = data.freq.n_fS();
  const int n_ft = data.freq.n_fT();
  {
    double* tp = ws.tri_pack.data();
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        double* t = tp + (static_cast<std::ptrdiff_t>(j) * n + i) * n;
        for (int l = 0; l < n; ++l) t[l] = data.red_tri[l](i, j);
      }
    }
  }

  const double* basep = ws.base.data();
  const double* massp = data.red_mass.data();
  const double* tp = ws.tri_pack.data();
  double* jac = ws.jacobian.data();
  double* fv = ws.fvec.data();
  double* load = ws.load.data();
  // The march iterates directly in the trajectory columns: column k starts
  // as a copy of column k-1 and Newton refines it in place.
  double* sdata = traj.states.data();

  for (int k = 1; k <= data.num_steps; ++k) {
    const double* pv = sdata + static_cast<std::ptrdiff_t>(k - 1) * n;
    double* g = sdata + static_cast<std::ptrdiff_t>(k) * n;
    for (int i = 0; i < n; ++i) g[i] = pv[i];

    const double t_k = traj.grid.time(k);
    const double b0_k = boundary0_value(mu, data.freq, t_k);
    const double b1_k = boundary1_value(mu, data.freq, t_k);

    // l_pi(zeta_i, t_k) plus the boundary forcing and previous-state terms.
    for (int i = 0; i < n; ++i) {
      load[i] = mu.f_m * data.red_int(i) + b0_k * data.red_beta0(i) +
                b1_k * data.red_beta1(i);
    }
    for (int p = 0; p < n_fs; ++p) {
      double g_p = 0.0;
      for (int l = 0; l < n_ft; ++l) {
        g_p += mu.amp_f(l, p) * std::sin(data.freq.omega_fT[l] * t_k);
      }
      for (int i = 0; i < n; ++i) load[i] += g_p * data.red_fsin(p, i);
    }
    for (int j = 0; j < n; ++j) {
      const double pj = pv[j] / data.dt;
      const double* mcol = massp + static_cast<std::ptrdiff_t>(j) * n;
      for (int i = 0; i < n; ++i) load[i] += mcol[i] * pj;
    }

    bool converged = false;
    for (int it = 1; it <= data.newton_cap; ++it) {
      // With conv(i,j) = sum_l guess_l c(zeta_l, zeta_j, zeta_i):
      // F = (base + conv) guess - load, Jacobian = base + 2 conv.
      for (int i = 0; i < n; ++i) fv[i] = -load[i];
      for (int j = 0; j < n; ++j) {
        const double gj = g[j];
        const double* bcol = basep + static_cast<std::ptrdiff_t>(j) * n;
        double* jcol = jac + static_cast<std::ptrdiff_t>(j) * n;
        for (int i = 0; i < n; ++i) {
          const double* t = tp + (static_cast<std::ptrdiff_t>(j) * n + i) * n;
          double c = 0.0;
          for (int l = 0; l < n; ++l) c += g[l] * t[l];
          const double bc = bcol[i] + c;
          jcol[i] = bc + c;
          fv[i] += bc * gj;
        }
      }
      solve_dense_inplace(n, jac, fv, ws.mult.data());
      double sq = 0.0;
      for (int i = 0; i < n; ++i) {
        g[i] -= fv[i];
        sq += fv[i] * fv[i];
      }
      traj.newton_iterations[k] = it;
      if (sq <= data.newton_tol) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      throw NonconvergenceError(
          k, "solve_reduced: Newton did not converge within " +
                 std::to_string(data.newton_cap) + " iterations at step " +
                 std::to_string(k));
    }
  }
  return traj;
}

}  // namespace burgers_rb
