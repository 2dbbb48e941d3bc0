#include "burgers_rb/certification.hpp"

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

Eigen::MatrixXd smooth_basis(const FemSpace& space, int n) {
  Eigen::MatrixXd cols(space.dim(), n);
  cols.col(0).setOnes();
  for (int j = 1; j < n; ++j) {
    cols.col(j) = interpolate(
        space, [j](double x) { return std::sin((2 * j + 1) * x + 0.3 * j); });
  }
  return orthonormalize(space, cols);
}

// Dual norm of the residual functional over the zero-boundary subspace,
// assembled from quadrature primitives and one fine-grid Riesz solve.
double riesz_norm_oracle(const FemSpace& space, const AssembledForms& forms,
                         const FrequencyStructure& freq,
                         const ParameterPoint& mu, double t, double dt,
                         const Eigen::VectorXd& u,
                         const Eigen::VectorXd& uprev) {
  const int idim = space.interior_dim();
  const DataFunctions funcs(mu, freq);
  const NodalVector f_nodal =
      interpolate(space, [&](double x) { return funcs.source(t, x); });
  const Eigen::VectorXd load = forms.mass.apply(f_nodal);
  const Eigen::VectorXd rate = forms.mass.apply((u - uprev) / dt);
  const Eigen::VectorXd diffusion = forms.stiffness.apply(u);
  const Eigen::VectorXd advection = trilinear_sweep(space, u, u);

  Eigen::VectorXd r(idim);
  for (int m = 1; m <= idim; ++m) {
    r(m - 1) = load(m) - rate(m) - advection(m) - mu.nu * diffusion(m);
  }
  const Eigen::VectorXd z = thomas_solve(forms.mass.interior(), r);
  return std::sqrt(std::max(r.dot(z), 0.0));
}

// Small trained model shared by the soundness-style cases.
struct Fixture {
  ProblemConfig cfg;
  FemSpace space;
  AssembledForms forms;
  ReducedBasis basis;
  OnlineData data;
};

Fixture trained_fixture() {
  ProblemConfig cfg = unit_config();
  cfg.num_intervals = 16;
  cfg.horizon = 0.2;
  cfg.rb.snapshot_count = 4;
  cfg.rb.basis_size = 3;
  cfg.scm.constraint_count = 5;
  cfg.scm.nearest_count = 5;
  cfg.scm.sample_size = 20;

  Fixture f{cfg, build_space(cfg.num_intervals),
            assemble_forms(build_space(cfg.num_intervals), cfg.penalty),
            {}, {}};
  const std::vector<ParameterPoint> sample = sample_parameters(
      cfg.freq, cfg.ranges, cfg.rb.snapshot_count, cfg.rb.seed);
  f.basis = pod_basis(f.space, build_snapshots(cfg, sample),
                      cfg.rb.basis_size);
  f.data = build_online_data(cfg, f.space, f.forms, f.basis.vectors);
  scm_train(cfg, f.space, f.forms, f.basis.vectors, f.data);
  return f;
}

}  // namespace

TEST_CASE("initial error norm matches the fine-grid projection defect") {
  const ProblemConfig cfg = unit_config();
  const FemSpace space = build_space(cfg.num_intervals);
  const AssembledForms forms = assemble_forms(space, cfg.penalty);
  const Eigen::MatrixXd basis = smooth_basis(space, 3);
  const OnlineData data = build_online_data(cfg, space, forms, basis);

  for (const ParameterPoint& mu :
       sample_parameters(cfg.freq, cfg.ranges, 6, 21)) {
    const DataFunctions funcs(mu, cfg.freq);
    const NodalVector u0 =
        interpolate(space, [&](double x) { return funcs.initial(x); });
    const double direct =
        l2_norm(space, u0 - basis * reduced_initial(data, mu));
    const double gram = initial_error_norm(data.init_gram, mu);
    CHECK(std::abs(gram - direct) <= 1e-12 * (1.0 + direct));
  }
}

TEST_CASE("initial error vanishes on an enriched basis") {
  const ProblemConfig cfg = unit_config();
  const FemSpace space = build_space(cfg.num_intervals);
  const AssembledForms forms = assemble_forms(space, cfg.penalty);
  ReducedBasis plain;
  plain.vectors = smooth_basis(space, 2);
  const ReducedBasis enriched =
      enrich_with_initial_modes(space, cfg.freq, plain);
  const OnlineData data =
      build_online_data(cfg, space, forms, enriched.vectors);

  CHECK(data.init_gram.cwiseAbs().maxCoeff() <= 1e-12);
  for (const ParameterPoint& mu :
       sample_parameters(cfg.freq, cfg.ranges, 4, 22)) {
    CHECK(initial_error_norm(data.init_gram, mu) <= 1e-12);
  }
}

TEST_CASE("a structure without initial modes yields a one-entry gram") {
  ProblemConfig cfg;  // no sine modes anywhere
  cfg.num_intervals = 10;
  cfg.ranges.nu = {1.0, 1.0};
  cfg.ranges.f_m = {1.0, 1.0};
  cfg.ranges.u0m = {0.0, 1.0};
  const FemSpace space = build_space(cfg.num_intervals);
  const AssembledForms forms = assemble_forms(space, cfg.penalty);
  const Eigen::MatrixXd basis = smooth_basis(space, 2);
  const OnlineData data = build_online_data(cfg, space, forms, basis);

  REQUIRE(data.init_gram.rows() == 1);
  // H(0,0) = squared defect norm of the constant-one function.
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(space.dim());
  Eigen::VectorXd coeffs(basis.cols());
  for (int j = 0; j < basis.cols(); ++j) {
    coeffs(j) = l2_inner(space, basis.col(j), ones);
  }
  const double defect = l2_norm(space, ones - basis * coeffs);
  CHECK(std::abs(std::sqrt(data.init_gram(0, 0)) - defect) <= 1e-12);
}

TEST_CASE("the residual gram is symmetric, PSD, and convection-symmetric") {
  const ProblemConfig cfg = unit_config();
  const FemSpace space = build_space(cfg.num_intervals);
  const AssembledForms forms = assemble_forms(space, cfg.penalty);
  const Eigen::MatrixXd basis = smooth_basis(space, 3);
  const Eigen::MatrixXd gram =
      build_residual_gram(space, forms, cfg.freq, basis);

  const int n = 3;
  const int n_fs = cfg.freq.n_fS();
  REQUIRE(gram.rows() == 1 + n_fs + 2 * n + n * n);
  CHECK((gram - gram.transpose()).cwiseAbs().maxCoeff() == 0.0);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
  CHECK(es.eigenvalues().minCoeff() >=
        -1e-10 * std::max(es.eigenvalues().maxCoeff(), 1.0));

  // c is symmetric in its first two arguments, so rows of paired indices
  // coincide exactly.
  const int off = 1 + n_fs + n;
  for (int j = 0; j < n; ++j) {
    for (int jp = 0; jp < n; ++jp) {
      CHECK((gram.row(off + j * n + jp) - gram.row(off + jp * n + j))
                .cwiseAbs()
                .maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("residual zero-norm matches a fine-grid Riesz solve") {
  const ProblemConfig cfg = unit_config();
  const FemSpace space = build_space(cfg.num_intervals);
  const AssembledForms forms = assemble_forms(space, cfg.penalty);
  const Eigen::MatrixXd basis = smooth_basis(space, 3);
  const OnlineData data = build_online_data(cfg, space, forms, basis);
  const TimeGrid grid = time_grid(cfg);

  for (const ParameterPoint& mu :
       sample_parameters(cfg.freq, cfg.ranges, 3, 23)) {
    const ReducedTrajectory red = solve_reduced(data, mu);
    for (int k = 1; k <= grid.num_steps; ++k) {
      const double fast = residual_zero_norm(data, mu, grid.time(k),
                                             red.states.col(k),
                                             red.states.col(k - 1));
      const double oracle = riesz_norm_oracle(
          space, forms, cfg.freq, mu, grid.time(k), grid.dt,
          basis * red.states.col(k), basis * red.states.col(k - 1));
      CHECK(std::abs(fast - oracle) <= 1e-10 * std::max(oracle, 1e-14));
    }
  }
}

TEST_CASE("the residual of the zero solution is exactly zero") {
  ProblemConfig cfg;  // no modes; all data pinned to zero
  cfg.num_intervals = 10;
  cfg.ranges.nu = {1.0, 1.0};
  cfg.ranges.f_m = {0.0, 0.0};
  cfg.ranges.u0m = {0.0, 0.0};
  const FemSpace space = build_space(cfg.num_intervals);
  const AssembledForms forms = assemble_forms(space, cfg.penalty);
  const Eigen::MatrixXd basis = smooth_basis(space, 2);
  const OnlineData data = build_online_data(cfg, space, forms, basis);
  const ParameterPoint mu = sample_parameters(cfg.freq, cfg.ranges, 1, 1)[0];

  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(2);
  CHECK(residual_zero_norm(data, mu, 0.1, zero, zero) == 0.0);
}

TEST_CASE("splitting and cubic boundary identities hold for the advection form") {
  const FemSpace space = build_space(12);
  std::mt19937 gen(31);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  const int dim = space.dim();

  for (int rep = 0; rep < 20; ++rep) {
    Eigen::VectorXd u(dim), ut(dim), v(dim);
    for (int i = 0; i < dim; ++i) {
      u(i) = dist(gen);
      ut(i) = dist(gen);
      v(i) = dist(gen);
    }
    const Eigen::VectorXd e = u - ut;

    const double split = trilinear_c(space, u, u, v) -
                         trilinear_c(space, ut, ut, v) -
                         2.0 * trilinear_c(space, ut, e, v) -
                         trilinear_c(space, e, e, v);
    CHECK(std::abs(split) <= 1e-12);

    const double cubic =
        trilinear_c(space, e, e, e) +
        (std::pow(e(dim - 1), 3) - std::pow(e(0), 3)) / 6.0;
    CHECK(std::abs(cubic) <= 1e-12);
  }
}

TEST_CASE("certified bounds dominate the true error on sampled parameters") {
  const Fixture f = trained_fixture();
  const TimeGrid grid = time_grid(f.cfg);

  for (const ParameterPoint& mu :
       sample_parameters(f.cfg.freq, f.cfg.ranges, 5, 99)) {
    const CertifiedSolution cert = certify_trajectory(f.data, mu);
    const FullTrajectory full = solve_full(f.cfg, mu);

    REQUIRE(static_cast<int>(cert.steps.size()) == grid.num_steps + 1);
    for (int k = 0; k <= grid.num_steps; ++k) {
      const double actual = l2_norm(
          f.space,
          full.states.col(k) - f.basis.vectors * cert.trajectory.states.col(k));
      CHECK(cert.steps[k].eps >= actual - 1e-12);
    }

    // Recorded diagnostics are internally consistent.
    for (int k = 1; k <= grid.num_steps; ++k) {
      const BoundState& b = cert.steps[k];
      CHECK(b.c_inf <= b.c_sup + 1e-12);
      CHECK(b.a_inf == doctest::Approx(1.0 / f.data.dt + b.c_inf));
      CHECK(b.sigma_sup ==
            doctest::Approx(2.0 * b.eta *
                            std::max(std::abs(b.c_sup), std::abs(b.c_inf))));
      if (b.disc_sup >= 0.0) {
        CHECK(b.eps == doctest::Approx((b.b_sup + std::sqrt(b.disc_sup)) /
                                       (2.0 * b.a_inf)));
      } else {
        CHECK(b.eps == doctest::Approx(b.b_sup / b.a_inf));
      }
    }
  }
}

TEST_CASE("bounds of the zero solution stay exactly zero") {
  ProblemConfig cfg;
  cfg.num_intervals = 10;
  cfg.dt = 0.02;
  cfg.horizon = 0.2;
  cfg.ranges.nu = {1.0, 1.0};
  cfg.ranges.f_m = {0.0, 0.0};
  cfg.ranges.u0m = {0.0, 0.0};
  cfg.scm.constraint_count = 2;
  cfg.scm.sample_size = 5;
  const FemSpace space = build_space(cfg.num_intervals);
  const AssembledForms forms = assemble_forms(space, cfg.penalty);
  const Eigen::MatrixXd basis = smooth_basis(space, 2);
  OnlineData data = build_online_data(cfg, space, forms, basis);
  scm_train(cfg, space, forms, basis, data);
  const ParameterPoint mu = sample_parameters(cfg.freq, cfg.ranges, 1, 1)[0];

  const CertifiedSolution cert = certify_trajectory(data, mu);
  for (const BoundState& b : cert.steps) {
    CHECK(std::abs(b.eps) <= 1e-12);
  }
}

TEST_CASE("an unstable time step refuses to certify") {
  const Fixture f = trained_fixture();
  const ParameterPoint mu =
      sample_parameters(f.cfg.freq, f.cfg.ranges, 1, 5)[0];
  const Eigen::VectorXd state = Eigen::VectorXd::Constant(3, 0.1);

  const double hostile = -1.0 / f.data.dt - 1.0;
  try {
    certified_bound_step(f.data, mu, 2, 0.0, state, state, hostile, hostile);
    FAIL("expected CertificationUnavailableError");
  } catch (const CertificationUnavailableError& e) {
    CHECK(e.step == 2);
  }
}

TEST_CASE("certification requires a trained stability box") {
  const ProblemConfig cfg = unit_config();
  const FemSpace space = build_space(cfg.num_intervals);
  const AssembledForms forms = assemble_forms(space, cfg.penalty);
  const OnlineData data =
      build_online_data(cfg, space, forms, smooth_basis(space, 2));

  CHECK_THROWS_AS(
      certify_trajectory(data, sample_parameters(cfg.freq, cfg.ranges, 1, 1)[0]),
      std::logic_error);
}

TEST_CASE("trajectory certification matches the per-step bound recursion") {
  const Fixture f = trained_fixture();
  for (const ParameterPoint& mu :
       sample_parameters(f.cfg.freq, f.cfg.ranges, 3, 77)) {
    const CertifiedSolution cert = certify_trajectory(f.data, mu);
    REQUIRE(static_cast<int>(cert.steps.size()) == f.data.num_steps + 1);

    // Re-derive every step with the single-step entry points and the same
    // warm stability-query context ordering.
    CertificationWorkspace ws;
    double eps_prev = initial_error_norm(f.data.init_gram, mu);
    CHECK(cert.steps[0].eps == doctest::Approx(eps_prev).epsilon(1e-13));
    for (int k = 1; k <= f.data.num_steps; ++k) {
      const auto state_k = cert.trajectory.states.col(k);
      const double c_inf = scm_lower_bound(f.data.scm, mu.free_coords, k,
                                           state_k, mu.nu, &ws.scm_ctx);
      const double c_sup = scm_upper_bound(f.data.scm, state_k, mu.nu);
      const BoundState ref = certified_bound_step(
          f.data, mu, k, eps_prev, state_k, cert.trajectory.states.col(k - 1),
          c_inf, c_sup, &ws);
      const BoundState& got = cert.steps[k];
      CHECK(got.c_inf == doctest::Approx(ref.c_inf).epsilon(1e-12));
      CHECK(got.c_sup == doctest::Approx(ref.c_sup).epsilon(1e-12));
      CHECK(got.e_left == doctest::Approx(ref.e_left).epsilon(1e-10));
      CHECK(got.e_right == doctest::Approx(ref.e_right).epsilon(1e-10));
      CHECK(got.res_norm == doctest::Approx(ref.res_norm).epsilon(1e-10));
      CHECK(got.f_term == doctest::Approx(ref.f_term).epsilon(1e-10));
      CHECK(got.gamma_sup == doctest::Approx(ref.gamma_sup).epsilon(1e-10));
      CHECK(got.eps == doctest::Approx(ref.eps).epsilon(1e-10));
      eps_prev = ref.eps;
    }
  }
}
