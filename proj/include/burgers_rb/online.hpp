#pragma once

// Online stage: everything needed to march the reduced-order model in time
// and to certify it, packed into a struct whose storage depends only on the
// basis size N and the parametrization structure -- never on the fine-grid
// dimension.  The offline stage populates OnlineData; the online stage reads
// it and nothing else.

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "burgers_rb/config.hpp"
#include "burgers_rb/parametrization.hpp"
#include "burgers_rb/scm.hpp"

namespace burgers_rb {

// Precomputed quantities attached to the two boundary hat functions; used by
// the error certification to evaluate residuals and stability pieces at the
// boundary without touching fine-grid vectors.
struct BoundaryAux {
  double hat_norm = 0.0;   // L2 norm of a boundary hat, sqrt(h/3)
  double node_dual = 0.0;  // dual norm of interior point evaluation next to
                           // the boundary: sqrt((M0^{-1})_{11})
  Eigen::Vector2d load_const = Eigen::Vector2d::Zero();  // integral of hats
  Eigen::MatrixXd load_sin;   // n_fS x 2: <pi(sin(omega_p x)), hat_w>
  Eigen::MatrixXd mass_bnd;   // N x 2:   <zeta_i, hat_w>
  Eigen::MatrixXd stiff_bnd;  // N x 2:   a(zeta_i, hat_w)
  Eigen::MatrixXd tri_bnd0;   // N x N:   c(zeta_i, zeta_j, hat_left)
  Eigen::MatrixXd tri_bnd1;   // N x N:   c(zeta_i, zeta_j, hat_right)
  // Convection/diffusion evaluated on the six hat pairs
  // (0,0), (n,n), (1,0), (0,1), (n-1,n), (n,n-1) where n is the last node.
  Eigen::MatrixXd tri_pair;   // N x 6:   c(zeta_i, hat_a, hat_b)
  Eigen::VectorXd stiff_pair;                            // 6: a(hat_a, hat_b)
};

// Reduced operators and certification data.  All matrices are dense and tiny
// (N x N or structure-sized); an online solve never allocates fine-grid data.
struct OnlineData {
  FrequencyStructure freq;

  double dt = 0.0;
  int num_steps = 0;
  double penalty = 0.0;
  double newton_tol = 0.0;
  int newton_cap = 0;

  int basis_size = 0;
  Eigen::MatrixXd red_mass;               // <zeta_j, zeta_i>
  Eigen::MatrixXd red_stiff;              // a(zeta_j, zeta_i)
  Eigen::MatrixXd red_bpen;               // B(zeta_j, zeta_i)
  std::vector<Eigen::MatrixXd> red_tri;   // red_tri[l](i,j) = c(zeta_l, zeta_j, zeta_i)
  Eigen::VectorXd red_beta0, red_beta1;   // beta_w(zeta_i)
  Eigen::VectorXd red_int;                // <1, zeta_i>
  Eigen::MatrixXd red_fsin;               // n_fS x N: <pi(sin(omega_p x)), zeta_i>
  Eigen::VectorXd proj_one;               // coefficients of the projection of 1
  Eigen::MatrixXd proj_u0sin;             // n_u0 x N: coefficients of the
                                          // projection of pi(sin(omega_l x))
  Eigen::VectorXd zeta_at_0, zeta_at_1;   // boundary traces of the basis

  BoundaryAux aux;
  Eigen::MatrixXd init_gram;  // (1+n_u0)^2 Gram of initial projection defects
  Eigen::MatrixXd res_gram;   // Riesz Gram of the residual expansion modes
  SCMData scm;

  TimeGrid grid() const { return TimeGrid{dt, dt * num_steps, num_steps}; }

  // Flat list of every stored dimension; two models reduced to the same basis
  // size and parametrization structure must agree on it regardless of the
  // fine grid they were trained on.
  std::vector<std::size_t> size_signature() const;
};

struct ReducedTrajectory {
  TimeGrid grid{0.0, 0.0, 0};
  Eigen::MatrixXd states;  // N x (num_steps + 1), column k = coefficients at t_k
  std::vector<int> newton_iterations;
};

// Scratch space for the time march; reusing it across solves keeps the online
// stage allocation-free after the first call. The per-step Newton systems are
// so small that the march runs hand-indexed dense kernels on this storage
// instead of general matrix routines.
class OnlineWorkspace {
 public:
  void resize(int n);

  Eigen::MatrixXd base;      // mass/dt + nu*stiff + bpen, fixed per trajectory
  Eigen::VectorXd tri_pack;  // red_tri repacked as (j*n+i)*n+l -> c(z_l,z_j,z_i)
  Eigen::MatrixXd jacobian;  // Newton matrix, eliminated in place
  Eigen::VectorXd fvec;      // Newton residual, overwritten with the update
  Eigen::VectorXd mult;      // elimination multipliers
  Eigen::VectorXd load;
};

// L2 projection of the initial datum onto the reduced space.  Throws
// std::invalid_argument when the parameter's amplitude counts do not match
// the structure the model was trained for.
Eigen::VectorXd reduced_initial(const OnlineData& data, const ParameterPoint& mu);

// Backward-Euler time march of the reduced model with a Newton solve per
// step.  Throws NonconvergenceError when a step exceeds the iteration cap.
ReducedTrajectory solve_reduced(const OnlineData& data, const ParameterPoint& mu,
                                OnlineWorkspace* workspace = nullptr);

}  // namespace burgers_rb
