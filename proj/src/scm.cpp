#include "burgers_rb/scm.hpp"

#include <algorithm>
#include <cstddef>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace burgers_rb {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

SimplexResult simplex_solve(const LinearProgram& lp) {
  SimplexContext ctx;
  return ctx.solve(lp, false);
}

const SimplexResult& SimplexContext::solve(const LinearProgram& lp,
                                           bool reuse) {
  const int n = static_cast<int>(lp.objective.size());
  const int m = static_cast<int>(lp.rows.rows());
  if (lp.lower.size() != n || lp.upper.size() != n ||
      (m > 0 && lp.rows.cols() != n) || lp.row_bounds.size() != m) {
    throw std::invalid_argument("simplex: inconsistent program sizes");
  }
  for (int j = 0; j < n; ++j) {
    if (!(lp.lower(j) <= lp.upper(j)) || !std::isfinite(lp.lower(j)) ||
        !std::isfinite(lp.upper(j))) {
      throw std::invalid_argument("simplex: box must be finite and ordered");
    }
  }

  if (m == 0) {
    // Pure box problem: settle each variable at the bound its cost prefers.
    result_.minimizer.resize(n);
    for (int j = 0; j < n; ++j) {
      result_.minimizer(j) = lp.objective(j) > 0.0 ? lp.lower(j) : lp.upper(j);
    }
    result_.value = lp.objective.dot(result_.minimizer);
    have_basis_ = false;
    return result_;
  }

  if (!(reuse && have_basis_ && n == n_ && m == m_)) {
    cold_start(lp);
  }

  if (costs_.size() != total_) costs_.resize(total_);
  costs_.setZero();
  costs_.head(n_) = lp.objective;
  optimize(costs_);

  result_.minimizer = x_.head(n_);
  result_.value = lp.objective.dot(result_.minimizer);
  return result_;
}

void SimplexContext::refactor() {
  bscratch_.resize(m_, m_);
  for (int r = 0; r < m_; ++r) bscratch_.col(r) = A_.col(basis_[r]);
  binv_ = bscratch_.partialPivLu().inverse();
  updates_ = 0;
}

void SimplexContext::cold_start(const LinearProgram& lp) {
  n_ = static_cast<int>(lp.objective.size());
  m_ = static_cast<int>(lp.rows.rows());

  // Start with every structural variable at its lower bound; rows whose
  // surplus would go negative get a phase-1 artificial.
  Eigen::VectorXd y0 = lp.lower;
  Eigen::VectorXd slack = lp.rows * y0 - lp.row_bounds;
  int n_art = 0;
  for (int r = 0; r < m_; ++r) {
    if (slack(r) < 0.0) ++n_art;
  }

  total_ = n_ + m_ + n_art;
  A_.setZero(m_, total_);
  A_.leftCols(n_) = lp.rows;
  b_ = lp.row_bounds;
  lo_.resize(total_);
  hi_.resize(total_);
  lo_.head(n_) = lp.lower;
  hi_.head(n_) = lp.upper;
  x_.setZero(total_);
  x_.head(n_) = y0;
  basis_.assign(m_, -1);
  status_.assign(total_, 0);

  int art = n_ + m_;
  for (int r = 0; r < m_; ++r) {
    A_(r, n_ + r) = -1.0;  // surplus: rows * y - s = b
    lo_(n_ + r) = 0.0;
    hi_(n_ + r) = kInf;
    if (slack(r) >= 0.0) {
      basis_[r] = n_ + r;
      x_(n_ + r) = slack(r);
      status_[n_ + r] = 2;
    } else {
      A_(r, art) = 1.0;
      lo_(art) = 0.0;
      hi_(art) = kInf;
      basis_[r] = art;
      x_(art) = -slack(r);
      status_[art] = 2;
      ++art;
    }
  }
  have_basis_ = true;
  needs_refresh_ = true;
  refactor();

  if (n_art > 0) {
    Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(total_);
    for (int j = n_ + m_; j < total_; ++j) phase1(j) = 1.0;
    optimize(phase1);
    double infeasibility = 0.0;
    for (int j = n_ + m_; j < total_; ++j) infeasibility += std::max(0.0, x_(j));
    const double tol = 1e-9 * (1.0 + b_.cwiseAbs().maxCoeff());
    if (infeasibility > tol) {
      throw InfeasibleError(
          "simplex: constraints infeasible (phase-1 residual " +
          std::to_string(infeasibility) + "); inconsistent bound data");
    }
    // Freeze the artificials at zero; a basic one may sit degenerately at 0.
    for (int j = n_ + m_; j < total_; ++j) {
      lo_(j) = 0.0;
      hi_(j) = 0.0;
      if (status_[j] == 2) continue;
      status_[j] = 0;
      x_(j) = 0.0;
    }
  }
}

void SimplexContext::optimize(const Eigen::VectorXd& costs) {
  const int max_pivots = 4000;
  // Most-violating pricing until this many pivots, then Bland's rule.
  const int bland_after = 64 + 8 * total_;

  auto recompute_basics = [&]() {
    rhs_ = b_;
    for (int j = 0; j < total_; ++j) {
      if (status_[j] != 2 && x_(j) != 0.0) rhs_ -= A_.col(j) * x_(j);
    }
    xb_.noalias() = binv_ * rhs_;
    for (int r = 0; r < m_; ++r) x_(basis_[r]) = xb_(r);
    needs_refresh_ = false;
  };
  if (needs_refresh_) recompute_basics();

  if (cb_.size() != m_) cb_.resize(m_);
  for (int pivot = 0; pivot < max_pivots; ++pivot) {
    for (int r = 0; r < m_; ++r) cb_(r) = costs(basis_[r]);
    pi_.noalias() = binv_.transpose() * cb_;
    if (d_.size() != total_) d_.resize(total_);
    d_ = costs;
    d_.noalias() -= A_.transpose() * pi_;

    // Entering variable among eligible nonbasics: the most violating reduced
    // cost, or the first violating index once in Bland mode.
    const bool bland = pivot >= bland_after;
    int enter = -1;
    double dir = 0.0;
    double worst = kDualTol;
    for (int j = 0; j < total_; ++j) {
      if (status_[j] == 2 || lo_(j) == hi_(j)) continue;
      const double viol = status_[j] == 0 ? -d_(j) : d_(j);
      if (viol > worst) {
        enter = j;
        dir = status_[j] == 0 ? 1.0 : -1.0;
        worst = viol;
        if (bland) break;
      }
    }
    if (enter < 0) return;  // optimal

    w_.noalias() = binv_ * A_.col(enter);
    const Eigen::VectorXd& w = w_;

    // Ratio test against the entering bound flip and every basic bound.
    double theta = hi_(enter) - lo_(enter);
    int leave_row = -1;
    signed char leave_status = 0;
    for (int r = 0; r < m_; ++r) {
      const double delta = -dir * w(r);  // d x_{B_r} / d theta
      const int jb = basis_[r];
      double lim;
      signed char st;
      if (delta > kPivotTol) {
        lim = (hi_(jb) - x_(jb)) / delta;
        st = 1;
      } else if (delta < -kPivotTol) {
        lim = (lo_(jb) - x_(jb)) / delta;
        st = 0;
      } else {
        continue;
      }
      lim = std::max(lim, 0.0);
      const bool strictly_smaller = lim < theta - 1e-12;
      const bool tie_smaller_index =
          leave_row >= 0 && lim <= theta + 1e-12 && jb < basis_[leave_row];
      if (strictly_smaller || tie_smaller_index) {
        theta = std::min(theta, lim);
        leave_row = r;
        leave_status = st;
      }
    }
    if (!std::isfinite(theta)) {
      throw InfeasibleError(
          "simplex: unbounded improving direction; inconsistent bound data");
    }

    x_(enter) += dir * theta;
    for (int r = 0; r < m_; ++r) x_(basis_[r]) -= dir * theta * w(r);
    if (leave_row < 0) {
      // Bound flip, basis unchanged; the incremental basic update above is
      // refreshed from the factorization before the next warm solve.
      status_[enter] = status_[enter] == 0 ? 1 : 0;
      x_(enter) = status_[enter] == 1 ? hi_(enter) : lo_(enter);
      needs_refresh_ = true;
    } else {
      const int jb = basis_[leave_row];
      status_[jb] = leave_status;
      x_(jb) = leave_status == 1 ? hi_(jb) : lo_(jb);
      basis_[leave_row] = enter;
      status_[enter] = 2;
      if (++updates_ >= 64) {
        refactor();
      } else {
        // Replacing basis column leave_row by the entering column multiplies
        // B by E = I + (w - e_r) e_r^T; fold E^{-1} into the explicit inverse
        // with one Gauss-Jordan sweep (w = B^{-1} a_enter from above).
        const double alpha = w(leave_row);
        double* bi = binv_.data();
        for (int cc = 0; cc < m_; ++cc) {
          bi[static_cast<std::ptrdiff_t>(cc) * m_ + leave_row] /= alpha;
        }
        for (int i = 0; i < m_; ++i) {
          if (i == leave_row) continue;
          const double wi = w(i);
          if (wi == 0.0) continue;
          for (int cc = 0; cc < m_; ++cc) {
            double* col = bi + static_cast<std::ptrdiff_t>(cc) * m_;
            col[i] -= wi * col[leave_row];
          }
        }
      }
      recompute_basics();
    }
  }
  throw std::runtime_error("simplex: pivot limit exceeded");
}

namespace {

// Interior symmetric part of the quadratic form v -> c(w, v, v), as a dense
// matrix: 0.5 (Q + Q^T) with Q_ab = c(w, phi_a, phi_b), a,b interior.
Eigen::MatrixXd interior_symmetrized_convection(const FemSpace& space,
                                                const Eigen::VectorXd& w) {
  const Eigen::MatrixXd T = convect_matrix(space, w).interior().dense();
  return 0.5 * (T + T.transpose());
}

}  // namespace

SigmaBounds sigma_bounds(const FemSpace& space, const AssembledForms& forms,
                         const Eigen::MatrixXd& basis) {
  const int N = static_cast<int>(basis.cols());
  const int ni = space.interior_dim();
  const Eigen::MatrixXd M0 = forms.mass.interior().dense();
  SigmaBounds sb;
  sb.lo.resize(N + 1);
  sb.hi.resize(N + 1);
  for (int j = 0; j < N; ++j) {
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(
        interior_symmetrized_convection(space, basis.col(j)), M0);
    sb.lo(j) = es.eigenvalues()(0);
    sb.hi(j) = es.eigenvalues()(ni - 1);
  }
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(
      forms.stiffness.interior().dense(), M0);
  sb.lo(N) = es.eigenvalues()(0);
  sb.hi(N) = es.eigenvalues()(ni - 1);
  return sb;
}

StabilityResult exact_stability(const FemSpace& space,
                                const AssembledForms& forms,
                                const Eigen::VectorXd& u_tilde, double nu) {
  const int ni = space.interior_dim();
  const Eigen::MatrixXd M0 = forms.mass.interior().dense();
  const Eigen::MatrixXd Psi =
      nu * forms.stiffness.interior().dense() +
      2.0 * interior_symmetrized_convection(space, u_tilde);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Psi, M0);

  StabilityResult res;
  res.value = es.eigenvalues()(0);
  res.eigenvector = Eigen::VectorXd::Zero(space.dim());
  res.eigenvector.segment(1, ni) = es.eigenvectors().col(0);
  return res;
}

double scm_distance_sq(const SCMData& scm, const Eigen::VectorXd& mu_coords,
                       int k, const ScmConstraint& constraint) {
  if (mu_coords.size() != constraint.mu_coords.size() ||
      mu_coords.size() != scm.coord_spans.size()) {
    throw std::invalid_argument("scm_distance_sq: coordinate size mismatch");
  }
  double d = 0.0;
  for (int i = 0; i < mu_coords.size(); ++i) {
    const double span = scm.coord_spans(i);
    if (span > 0.0) {
      const double t = (mu_coords(i) - constraint.mu_coords(i)) / span;
      d += t * t;
    }
  }
  if (scm.num_steps > 0) {
    const double t =
        static_cast<double>(k - constraint.k) / scm.num_steps;
    d += t * t;
  }
  return d;
}

double scm_lower_bound(const SCMData& scm, const Eigen::VectorXd& mu_coords,
                       int k, const Eigen::Ref<const Eigen::VectorXd>& state,
                       double nu, ScmQueryContext* ctx) {
  const int N = static_cast<int>(state.size());
  if (scm.sigma.lo.size() != N + 1) {
    throw std::invalid_argument("scm_lower_bound: sigma/basis size mismatch");
  }

  ScmQueryContext local;
  ScmQueryContext& c = ctx ? *ctx : local;

  // Active constraints: the nearest_count closest in parameter-time distance
  // (all of them when the budget covers the full set, in which case the
  // selection is the identity and never changes between queries).
  const int total = static_cast<int>(scm.constraints.size());
  bool same_rows;
  if (total <= scm.nearest_count) {
    same_rows = c.primed && static_cast<int>(c.selection.size()) == total;
    if (!same_rows) {
      c.selection.resize(total);
      std::iota(c.selection.begin(), c.selection.end(), 0);
    }
  } else {
    std::vector<std::pair<double, int>> dist(total);
    for (int r = 0; r < total; ++r) {
      dist[r] = {scm_distance_sq(scm, mu_coords, k, scm.constraints[r]), r};
    }
    std::partial_sort(dist.begin(), dist.begin() + scm.nearest_count,
                      dist.end());
    std::vector<int> selection;
    selection.reserve(scm.nearest_count);
    for (int r = 0; r < scm.nearest_count; ++r) {
      selection.push_back(dist[r].second);
    }
    std::sort(selection.begin(), selection.end());
    same_rows = c.primed && c.selection == selection;
    if (!same_rows) c.selection = std::move(selection);
  }

  if (!same_rows) {
    const int m = static_cast<int>(c.selection.size());
    c.lp.lower = scm.sigma.lo;
    c.lp.upper = scm.sigma.hi;
    c.lp.rows.resize(m, N + 1);
    c.lp.row_bounds.resize(m);
    for (int r = 0; r < m; ++r) {
      const ScmConstraint& con = scm.constraints[c.selection[r]];
      if (con.state.size() != N) {
        throw std::invalid_argument("scm_lower_bound: constraint size mismatch");
      }
      c.lp.rows.row(r).head(N) = 2.0 * con.state.transpose();
      c.lp.rows(r, N) = con.nu;
      c.lp.row_bounds(r) = con.c_value;
    }
  }
  if (c.lp.objective.size() != N + 1) c.lp.objective.resize(N + 1);
  c.lp.objective.head(N) = 2.0 * state;
  c.lp.objective(N) = nu;

  const SimplexResult& res = c.simplex.solve(c.lp, same_rows);
  c.primed = true;
  return res.value;
}

double scm_upper_bound(const SCMData& scm,
                       const Eigen::Ref<const Eigen::VectorXd>& state,
                       double nu) {
  if (scm.constraints.empty()) {
    throw std::logic_error("scm_upper_bound: no stored constraints");
  }
  const int N = static_cast<int>(state.size());
  const double* sp = state.data();
  double best = kInf;
  for (const ScmConstraint& con : scm.constraints) {
    if (con.y_star.size() != N + 1) {
      throw std::invalid_argument("scm_upper_bound: constraint size mismatch");
    }
    const double* y = con.y_star.data();
    double dot = 0.0;
    for (int i = 0; i < N; ++i) dot += sp[i] * y[i];
    const double value = 2.0 * dot + nu * y[N];
    best = std::min(best, value);
  }
  return best;
}

}  // namespace burgers_rb
