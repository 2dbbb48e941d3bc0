#include "burgers_rb/fem.hpp"

#include <cmath>
#include <string>

namespace burgers_rb {

FemSpace build_space(int num_intervals) {
  if (num_intervals < 2) {
    throw InvalidMeshError("build_space: need at least 2 intervals, got " +
                           std::to_string(num_intervals));
  }
  FemSpace space;
  space.num_intervals = num_intervals;
  space.mesh_width = 1.0 / num_intervals;
  space.nodes = Eigen::VectorXd::LinSpaced(num_intervals + 1, 0.0, 1.0);
  return space;
}

Tridiagonal Tridiagonal::zero(int n) {
  Tridiagonal t;
  t.diag = Eigen::VectorXd::Zero(n);
  t.lower = Eigen::VectorXd::Zero(n > 0 ? n - 1 : 0);
  t.upper = Eigen::VectorXd::Zero(n > 0 ? n - 1 : 0);
  return t;
}

Eigen::VectorXd Tridiagonal::apply(const Eigen::VectorXd& x) const {
  const int n = size();
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    double s = diag(i) * x(i);
    if (i > 0) s += lower(i - 1) * x(i - 1);
    if (i + 1 < n) s += upper(i) * x(i + 1);
    y(i) = s;
  }
  return y;
}

double Tridiagonal::quadratic(const Eigen::VectorXd& x) const {
  const int n = size();
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += diag(i) * x(i) * x(i);
  for (int i = 0; i + 1 < n; ++i) s += (lower(i) + upper(i)) * x(i) * x(i + 1);
  return s;
}

Eigen::MatrixXd Tridiagonal::dense() const {
  const int n = size();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    A(i, i) = diag(i);
    if (i + 1 < n) {
      A(i + 1, i) = lower(i);
      A(i, i + 1) = upper(i);
    }
  }
  return A;
}

Tridiagonal Tridiagonal::interior() const {
  const int n = size();
  if (n < 3) throw InvalidMeshError("Tridiagonal::interior: size < 3");
  Tridiagonal t;
  t.diag = diag.segment(1, n - 2);
  t.lower = lower.segment(1, n - 3);
  t.upper = upper.segment(1, n - 3);
  return t;
}

void thomas_solve_inplace(const Tridiagonal& A, Eigen::VectorXd& rhs,
                          Eigen::VectorXd& scratch) {
  const int n = A.size();
  if (rhs.size() != n || scratch.size() < n - 1) {
    throw std::invalid_argument("thomas_solve: size mismatch");
  }
  // Forward elimination; scratch holds the modified upper diagonal.
  double piv = A.diag(0);
  if (std::abs(piv) < 1e-300) {
    throw SingularSystemError("thomas_solve: zero pivot at row 0");
  }
  if (n > 1) scratch(0) = A.upper(0) / piv;
  rhs(0) /= piv;
  for (int i = 1; i < n; ++i) {
    piv = A.diag(i) - A.lower(i - 1) * scratch(i - 1);
    if (std::abs(piv) < 1e-300) {
      throw SingularSystemError("thomas_solve: zero pivot at row " +
                                std::to_string(i));
    }
    if (i + 1 < n) scratch(i) = A.upper(i) / piv;
    rhs(i) = (rhs(i) - A.lower(i - 1) * rhs(i - 1)) / piv;
  }
  for (int i = n - 2; i >= 0; --i) rhs(i) -= scratch(i) * rhs(i + 1);
}

Eigen::VectorXd thomas_solve(const Tridiagonal& A, Eigen::VectorXd rhs) {
  Eigen::VectorXd scratch(A.size() > 0 ? A.size() - 1 : 0);
  thomas_solve_inplace(A, rhs, scratch);
  return rhs;
}

AssembledForms assemble_forms(const FemSpace& space, double penalty) {
  if (!(penalty > 0.0)) {
    throw std::invalid_argument("assemble_forms: penalty must be positive");
  }
  const int n = space.dim();
  const double h = space.mesh_width;
  AssembledForms f;
  f.penalty = penalty;

  // Element mass [h/3, h/6; h/6, h/3] and stiffness [1/h, -1/h; -1/h, 1/h].
  f.mass = Tridiagonal::zero(n);
  f.stiffness = Tridiagonal::zero(n);
  for (int e = 0; e < space.num_intervals; ++e) {
    f.mass.diag(e) += h / 3.0;
    f.mass.diag(e + 1) += h / 3.0;
    f.mass.lower(e) += h / 6.0;
    f.mass.upper(e) += h / 6.0;
    f.stiffness.diag(e) += 1.0 / h;
    f.stiffness.diag(e + 1) += 1.0 / h;
    f.stiffness.lower(e) -= 1.0 / h;
    f.stiffness.upper(e) -= 1.0 / h;
  }

  f.boundary_penalty_diag = Eigen::VectorXd::Zero(n);
  f.boundary_penalty_diag(0) = penalty;
  f.boundary_penalty_diag(n - 1) = penalty;

  f.beta0 = Eigen::VectorXd::Zero(n);
  f.beta0(0) = penalty;
  f.beta1 = Eigen::VectorXd::Zero(n);
  f.beta1(n - 1) = penalty;

  f.hat_integrals = Eigen::VectorXd::Constant(n, h);
  f.hat_integrals(0) = h / 2.0;
  f.hat_integrals(n - 1) = h / 2.0;
  return f;
}

NodalVector interpolate(const FemSpace& space,
                        const std::function<double(double)>& f) {
  const int n = space.dim();
  NodalVector v(n);
  for (int i = 0; i < n; ++i) v(i) = f(space.nodes(i));
  return v;
}

double l2_inner(const FemSpace& space, const Eigen::VectorXd& u,
                const Eigen::VectorXd& v) {
  const double h = space.mesh_width;
  double s = 0.0;
  for (int e = 0; e < space.num_intervals; ++e) {
    const double ua = u(e), ub = u(e + 1), va = v(e), vb = v(e + 1);
    s += h * (ua * va / 3.0 + (ua * vb + ub * va) / 6.0 + ub * vb / 3.0);
  }
  return s;
}

double l2_norm(const FemSpace& space, const Eigen::VectorXd& v) {
  return std::sqrt(std::max(0.0, l2_inner(space, v, v)));
}

// On element [x_a, x_b], with linear w, v and constant z' = (z_b - z_a)/h:
//   c|_e = -1/2 (z_b - z_a) * [ w_a v_a / 3 + (w_a v_b + w_b v_a) / 6
//                               + w_b v_b / 3 ].
static inline double element_wv(double wa, double wb, double va, double vb) {
  return wa * va / 3.0 + (wa * vb + wb * va) / 6.0 + wb * vb / 3.0;
}

double trilinear_c(const FemSpace& space, const Eigen::VectorXd& w,
                   const Eigen::VectorXd& v, const Eigen::VectorXd& z) {
  double s = 0.0;
  for (int e = 0; e < space.num_intervals; ++e) {
    s -= 0.5 * (z(e + 1) - z(e)) * element_wv(w(e), w(e + 1), v(e), v(e + 1));
  }
  return s;
}

Eigen::VectorXd trilinear_sweep(const FemSpace& space, const Eigen::VectorXd& w,
                                const Eigen::VectorXd& v) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(space.dim());
  // z = phi_m contributes (z_b - z_a) = -1 on its left element and +1 on its
  // right element.
  for (int e = 0; e < space.num_intervals; ++e) {
    const double val = element_wv(w(e), w(e + 1), v(e), v(e + 1));
    out(e) += 0.5 * val;
    out(e + 1) -= 0.5 * val;
  }
  return out;
}

Tridiagonal convect_matrix(const FemSpace& space, const Eigen::VectorXd& w) {
  Tridiagonal C = Tridiagonal::zero(space.dim());
  // Entry (i,j) = c(w, phi_j, phi_i); test hat phi_i sits in the derivative
  // slot. Per element with nodes (a, b): row a gains +1/2 of the w-weighted
  // products, row b the negative.
  for (int e = 0; e < space.num_intervals; ++e) {
    const double wa = w(e), wb = w(e + 1);
    const double col_a = wa / 3.0 + wb / 6.0;  // v = phi_a on this element
    const double col_b = wa / 6.0 + wb / 3.0;  // v = phi_b
    C.diag(e) += 0.5 * col_a;
    C.upper(e) += 0.5 * col_b;
    C.lower(e) -= 0.5 * col_a;
    C.diag(e + 1) -= 0.5 * col_b;
  }
  return C;
}

}  // namespace burgers_rb
