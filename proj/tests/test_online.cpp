#include "burgers_rb/online.hpp"

#include <cmath>
#include <random>

#include "burgers_rb/full_solver.hpp"
#include "burgers_rb/reduced_basis.hpp"
#include "doctest.h"

using namespace burgers_rb;

namespace {

const char* kUnitConfig = R"(
problem.num_intervals = 8
problem.dt            = 0.02
problem.horizon       = 0.1
freq.omega_b0 = 1.0
freq.omega_b1 = 1.0
freq.omega_fT = 2.0
freq.omega_fS = 2.0
freq.omega_u0 = 3.0
ranges.nu       = 0.8 1.2
ranges.f_m      = 0.0 2.0
ranges.u0m      = 0.0 1.0
ranges.amp_b0_1 = 0.9 1.2
ranges.amp_b1_1 = 0.9 1.2
ranges.amp_f_1_1 = 0.7 1.3
ranges.amp_u0_1 = 1.1 3.0
)";

ProblemConfig unit_config() { return parse_config(kUnitConfig, "unit"); }

ParameterPoint the_point(const ProblemConfig& cfg) {
  return sample_parameters(cfg.freq, cfg.ranges, 1, cfg.seed)[0];
}

// Orthonormalized full nodal basis: the reduced space equals the fine space.
Eigen::MatrixXd spanning_basis(const FemSpace& space) {
  return orthonormalize(
      space, Eigen::MatrixXd::Identity(space.dim(), space.dim()));
}

// A few smooth, independent global functions.
Eigen::MatrixXd smooth_basis(const FemSpace& space, int n) {
  Eigen::MatrixXd cols(space.dim(), n);
  cols.col(0).setOnes();
  for (int j = 1; j < n; ++j) {
    cols.col(j) = interpolate(
        space, [j](double x) { return std::sin((2 * j + 1) * x + 0.3 * j); });
  }
  return orthonormalize(space, cols);
}

}  // namespace

TEST_CASE("a spanning basis reproduces the full solver") {
  const ProblemConfig cfg = unit_config();
  const FemSpace space = build_space(cfg.num_intervals);
  const AssembledForms forms = assemble_forms(space, cfg.penalty);
  const Eigen::MatrixXd basis = spanning_basis(space);
  const OnlineData data = build_online_data(cfg, space, forms, basis);
  const ParameterPoint mu = the_point(cfg);

  const FullTrajectory full = solve_full(cfg, mu);
  const ReducedTrajectory red = solve_reduced(data, mu);
  const Eigen::MatrixXd rec = reconstruct(basis, red.states);

  REQUIRE(red.states.cols() == full.states.cols());
  CHECK((rec - full.states).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("constant data stays constant in the reduced model") {
  ProblemConfig cfg;
  cfg.num_intervals = 16;
  cfg.dt = 0.02;
  cfg.horizon = 0.4;
  cfg.ranges.nu = {1.0, 1.0};
  cfg.ranges.f_m = {0.0, 0.0};
  cfg.ranges.u0m = {0.1, 0.1};
  const ParameterPoint mu = the_point(cfg);

  const FemSpace space = build_space(cfg.num_intervals);
  const AssembledForms forms = assemble_forms(space, cfg.penalty);
  const Eigen::MatrixXd basis =
      orthonormalize(space, Eigen::MatrixXd::Ones(space.dim(), 1));
  const OnlineData data = build_online_data(cfg, space, forms, basis);

  const ReducedTrajectory red = solve_reduced(data, mu);
  const Eigen::MatrixXd rec = reconstruct(basis, red.states);
  CHECK((rec.array() - 0.1).abs().maxCoeff() <= 1e-9);
}

TEST_CASE("reduced_initial is the L2 projection of the initial datum") {
  const ProblemConfig cfg = unit_config();
  const FemSpace space = build_space(cfg.num_intervals);
  const AssembledForms forms = assemble_forms(space, cfg.penalty);
  const Eigen::MatrixXd basis = smooth_basis(space, 3);
  const OnlineData data = build_online_data(cfg, space, forms, basis);

  for (const ParameterPoint& mu :
       sample_parameters(cfg.freq, cfg.ranges, 4, 11)) {
    const DataFunctions funcs(mu, cfg.freq);
    const NodalVector u0 =
        interpolate(space, [&](double x) { return funcs.initial(x); });
    const Eigen::VectorXd coeffs = reduced_initial(data, mu);
    const Eigen::VectorXd defect = u0 - basis * coeffs;
    // The projection defect is orthogonal to the reduced space.
    for (int j = 0; j < basis.cols(); ++j) {
      CHECK(std::abs(l2_inner(space, basis.col(j), defect)) <= 1e-10);
    }
  }
}

TEST_CASE("an enriched basis reproduces compliant initial data exactly") {
  const ProblemConfig cfg = unit_config();
  const FemSpace space = build_space(cfg.num_intervals);
  const AssembledForms forms = assemble_forms(space, cfg.penalty);
  ReducedBasis plain;
  plain.vectors = smooth_basis(space, 2);
  const ReducedBasis enriched =
      enrich_with_initial_modes(space, cfg.freq, plain);
  const OnlineData data =
      build_online_data(cfg, space, forms, enriched.vectors);

  for (const ParameterPoint& mu :
       sample_parameters(cfg.freq, cfg.ranges, 4, 12)) {
    const DataFunctions funcs(mu, cfg.freq);
    const NodalVector u0 =
        interpolate(space, [&](double x) { return funcs.initial(x); });
    const Eigen::VectorXd rec = enriched.vectors * reduced_initial(data, mu);
    CHECK((rec - u0).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("reduced trajectories satisfy the projected step equations") {
  const ProblemConfig cfg = unit_config();
  const FemSpace space = build_space(cfg.num_intervals);
  const AssembledForms forms = assemble_forms(space, cfg.penalty);
  const Eigen::MatrixXd basis = smooth_basis(space, 3);
  const OnlineData data = build_online_data(cfg, space, forms, basis);
  const ParameterPoint mu = the_point(cfg);
  const DataFunctions funcs(mu, cfg.freq);
  const TimeGrid grid = time_grid(cfg);

  const ReducedTrajectory red = solve_reduced(data, mu);
  const int last = space.dim() - 1;
  for (int k = 1; k <= grid.num_steps; ++k) {
    const double t = grid.time(k);
    const Eigen::VectorXd u = basis * red.states.col(k);
    const Eigen::VectorXd prev = basis * red.states.col(k - 1);
    const NodalVector f_nodal =
        interpolate(space, [&](double x) { return funcs.source(t, x); });
    const Eigen::VectorXd stiff_u = forms.stiffness.apply(u);
    for (int i = 0; i < basis.cols(); ++i) {
      const Eigen::VectorXd zeta = basis.col(i);
      const double residual =
          l2_inner(space, u - prev, zeta) / grid.dt +
          trilinear_c(space, u, u, zeta) + mu.nu * stiff_u.dot(zeta) +
          cfg.penalty * (u(0) * zeta(0) + u(last) * zeta(last)) -
          l2_inner(space, f_nodal, zeta) -
          funcs.boundary0(t) * cfg.penalty * zeta(0) -
          funcs.boundary1(t) * cfg.penalty * zeta(last);
      CHECK(std::abs(residual) <= 1e-6);
    }
  }
}

TEST_CASE("the reduced Newton matrix is the Galerkin-projected full one") {
  const ProblemConfig cfg = unit_config();
  const FemSpace space = build_space(cfg.num_intervals);
  const AssembledForms forms = assemble_forms(space, cfg.penalty);
  const Eigen::MatrixXd basis = smooth_basis(space, 4);
  const OnlineData data = build_online_data(cfg, space, forms, basis);
  const int n = static_cast<int>(basis.cols());
  const int last = space.dim() - 1;
  std::mt19937 gen(7);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);

  for (int rep = 0; rep < 5; ++rep) {
    Eigen::VectorXd ubar(n);
    for (int i = 0; i < n; ++i) ubar(i) = dist(gen);
    const double nu = 0.9 + 0.1 * rep;

    Eigen::MatrixXd reduced =
        data.red_mass / data.dt + nu * data.red_stiff + data.red_bpen;
    for (int l = 0; l < n; ++l) reduced += 2.0 * ubar(l) * data.red_tri[l];

    const Eigen::VectorXd ubar_full = basis * ubar;
    Eigen::MatrixXd full = forms.mass.dense() / data.dt +
                           nu * forms.stiffness.dense() +
                           2.0 * convect_matrix(space, ubar_full).dense();
    full(0, 0) += cfg.penalty;
    full(last, last) += cfg.penalty;
    const Eigen::MatrixXd galerkin = basis.transpose() * full * basis;

    // Relative to the matrix scale: the penalty puts entries near 1e7.
    const double scale = galerkin.cwiseAbs().maxCoeff();
    CHECK((reduced - galerkin).cwiseAbs().maxCoeff() <= 1e-10 * scale);
  }
}

TEST_CASE("coefficient norms equal function norms for orthonormal bases") {
  const ProblemConfig cfg = unit_config();
  const FemSpace space = build_space(cfg.num_intervals);
  const AssembledForms forms = assemble_forms(space, cfg.penalty);
  const Eigen::MatrixXd basis = smooth_basis(space, 3);
  const OnlineData data = build_online_data(cfg, space, forms, basis);

  const ReducedTrajectory red = solve_reduced(data, the_point(cfg));
  for (int k = 0; k <= data.num_steps; ++k) {
    const Eigen::VectorXd state = red.states.col(k);
    const double fn = l2_norm(space, basis * state);
    const double qn = std::sqrt(state.dot(data.red_mass * state));
    CHECK(fn == doctest::Approx(state.norm()).epsilon(1e-10));
    CHECK(qn == doctest::Approx(state.norm()).epsilon(1e-10));
  }
}

TEST_CASE("a parameter from a different structure is rejected") {
  const ProblemConfig cfg = unit_config();
  const FemSpace space = build_space(cfg.num_intervals);
  const AssembledForms forms = assemble_forms(space, cfg.penalty);
  const OnlineData data =
      build_online_data(cfg, space, forms, smooth_basis(space, 2));

  ProblemConfig plain;  // no sine modes at all
  plain.ranges.nu = {1.0, 1.0};
  plain.ranges.f_m = {1.0, 1.0};
  plain.ranges.u0m = {0.5, 0.5};
  const ParameterPoint alien = the_point(plain);

  CHECK_THROWS_AS(reduced_initial(data, alien), std::invalid_argument);
  CHECK_THROWS_AS(solve_reduced(data, alien), std::invalid_argument);
}

TEST_CASE("an unreachable Newton tolerance reports the failing step") {
  ProblemConfig cfg = unit_config();
  cfg.newton_tol = 0.0;  // squared-norm threshold no update can reach
  cfg.newton_cap = 2;
  const FemSpace space = build_space(cfg.num_intervals);
  const AssembledForms forms = assemble_forms(space, cfg.penalty);
  const OnlineData data =
      build_online_data(cfg, space, forms, smooth_basis(space, 3));

  try {
    solve_reduced(data, the_point(cfg));
    FAIL("expected NonconvergenceError");
  } catch (const NonconvergenceError& e) {
    CHECK(e.step == 1);
  }
}

TEST_CASE("size signatures depend on structure, not on the fine grid") {
  ProblemConfig coarse = unit_config();
  ProblemConfig fine = unit_config();
  fine.num_intervals = 16;

  const auto data_for = [](const ProblemConfig& cfg, int n) {
    const FemSpace space = build_space(cfg.num_intervals);
    const AssembledForms forms = assemble_forms(space, cfg.penalty);
    return build_online_data(cfg, space, forms, smooth_basis(space, n));
  };

  const OnlineData a = data_for(coarse, 3);
  const OnlineData b = data_for(fine, 3);
  const OnlineData c = data_for(coarse, 4);
  CHECK(a.size_signature() == b.size_signature());
  CHECK(a.size_signature() != c.size_signature());
}
