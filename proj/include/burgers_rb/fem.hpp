#ifndef BURGERS_RB_FEM_HPP
#define BURGERS_RB_FEM_HPP

#include <Eigen/Dense>
#include <functional>
#include <stdexcept>

// Piecewise-linear finite elements on a uniform grid over [0,1], plus the
// handful of forms the penalized Burgers discretization is built from:
//
//   <w,v>    = int_0^1 w v dx                   (mass)
//   a(w,v)   = int_0^1 w' v' dx                 (stiffness)
//   c(w,v,z) = -1/2 int_0^1 w v z' dx           (advection trilinear form)
//   B(w,v)   = P ( w(0) v(0) + w(1) v(1) )      (boundary penalty)
//   beta_0(v) = P v(0),  beta_1(v) = P v(1)     (penalty loads)
//
// All integrals of piecewise-linear arguments are evaluated exactly with
// closed element formulas; no numerical quadrature error enters anywhere.

namespace burgers_rb {

// Coefficient vector on the nodal hat basis, length num_intervals + 1.
using NodalVector = Eigen::VectorXd;

struct InvalidMeshError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct SingularSystemError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Uniform mesh of [0,1] with num_intervals elements of width 1/num_intervals.
struct FemSpace {
  int num_intervals = 0;     // number of elements
  double mesh_width = 0.0;   // h = 1 / num_intervals
  Eigen::VectorXd nodes;     // x_i = i * h, i = 0..num_intervals

  // Dimension of the full nodal space (hats at every node, boundary included).
  int dim() const { return num_intervals + 1; }
  // Dimension of the subspace of hats vanishing at both endpoints.
  int interior_dim() const { return num_intervals - 1; }
};

// Builds the uniform mesh. Throws InvalidMeshError for fewer than 2 elements
// (the interior subspace would be empty).
FemSpace build_space(int num_intervals);

// Symmetric-profile tridiagonal storage: diag has size n, lower/upper size
// n-1, with lower(i) = A(i+1,i) and upper(i) = A(i,i+1).
struct Tridiagonal {
  Eigen::VectorXd lower, diag, upper;

  static Tridiagonal zero(int n);
  int size() const { return static_cast<int>(diag.size()); }

  // y = A x
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  // x' A x without forming A
  double quadratic(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd dense() const;
  // A(rows/cols 1..n-2), i.e. the matrix restricted to interior nodes.
  Tridiagonal interior() const;
};

// Thomas elimination for a tridiagonal system. The rhs is taken by value and
// reused as workspace. Throws SingularSystemError on a vanishing pivot.
Eigen::VectorXd thomas_solve(const Tridiagonal& A, Eigen::VectorXd rhs);

// In-place variant: overwrites rhs with the solution; scratch must have
// size >= n-1 and is clobbered. No allocations.
void thomas_solve_inplace(const Tridiagonal& A, Eigen::VectorXd& rhs,
                          Eigen::VectorXd& scratch);

// All parameter-independent form data on a given mesh.
struct AssembledForms {
  Tridiagonal mass;                       // <phi_j, phi_i>
  Tridiagonal stiffness;                  // a(phi_j, phi_i)
  Eigen::VectorXd boundary_penalty_diag;  // diag of B: P at entries 0 and N
  Eigen::VectorXd beta0, beta1;           // beta_w(phi_i)
  Eigen::VectorXd hat_integrals;          // int_0^1 phi_i dx
  double penalty = 0.0;                   // P
};

AssembledForms assemble_forms(const FemSpace& space, double penalty);

// Nodal interpolant: v_i = f(x_i).
NodalVector interpolate(const FemSpace& space,
                        const std::function<double(double)>& f);

// Exact L2 inner product / norm of piecewise-linear functions given by nodal
// values (mass-matrix weighting, evaluated elementwise).
double l2_inner(const FemSpace& space, const Eigen::VectorXd& u,
                const Eigen::VectorXd& v);
double l2_norm(const FemSpace& space, const Eigen::VectorXd& v);

// c(w,v,z) for nodal vectors, exact.
double trilinear_c(const FemSpace& space, const Eigen::VectorXd& w,
                   const Eigen::VectorXd& v, const Eigen::VectorXd& z);

// Vector of c(w, v, phi_m) over all test hats m (the slot that carries the
// derivative). Single element sweep, O(N).
Eigen::VectorXd trilinear_sweep(const FemSpace& space, const Eigen::VectorXd& w,
                                const Eigen::VectorXd& v);

// Tridiagonal C with C(i,j) = c(w, phi_j, phi_i): the Jacobian block of the
// advection term, since d/du c(u,u,phi_i)[delta] = 2 c(u, delta, phi_i).
Tridiagonal convect_matrix(const FemSpace& space, const Eigen::VectorXd& w);

}  // namespace burgers_rb

#endif
