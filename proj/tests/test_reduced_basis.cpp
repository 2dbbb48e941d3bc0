#include "burgers_rb/reduced_basis.hpp"

#include <cmath>
#include <random>
#include <vector>

#include "burgers_rb/certification.hpp"
#include "burgers_rb/full_solver.hpp"
#include "burgers_rb/scm.hpp"
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

// Rank-four snapshot family with sharply separated singular values, wide
// enough to exercise the node-sized eigenproblem path.
Eigen::MatrixXd decaying_snapshots(const FemSpace& space, int cols) {
  const int rank = 4;
  Eigen::MatrixXd modes(space.dim(), rank);
  for (int i = 0; i < rank; ++i) {
    modes.col(i) = interpolate(space, [i](double x) {
      return std::sin((i + 1) * 1.3 * x + 0.7 * i) + 0.2 * (i == 0);
    });
  }
  std::mt19937 gen(17);
  std::uniform_real_distribution<double> dist(0.5, 1.5);
  Eigen::MatrixXd snaps(space.dim(), cols);
  for (int j = 0; j < cols; ++j) {
    snaps.col(j).setZero();
    for (int i = 0; i < rank; ++i) {
      snaps.col(j) += std::pow(4.0, -i) * dist(gen) * modes.col(i);
    }
  }
  return snaps;
}

// Dense method-of-snapshots oracle built from quadrature primitives only.
struct PodOracle {
  Eigen::VectorXd eigenvalues;  // descending
  Eigen::MatrixXd modes;        // normalized, one column per kept mode
};

PodOracle pod_oracle(const FemSpace& space, const Eigen::MatrixXd& snaps,
                     int n) {
  const int cols = static_cast<int>(snaps.cols());
  Eigen::MatrixXd corr(cols, cols);
  for (int i = 0; i < cols; ++i) {
    for (int j = 0; j <= i; ++j) {
      corr(i, j) = l2_inner(space, snaps.col(i), snaps.col(j));
      corr(j, i) = corr(i, j);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(corr);
  PodOracle out;
  out.eigenvalues = es.eigenvalues().reverse();
  out.modes.resize(snaps.rows(), n);
  for (int i = 0; i < n; ++i) {
    out.modes.col(i) = snaps * es.eigenvectors().col(cols - 1 - i);
    out.modes.col(i) /= l2_norm(space, out.modes.col(i));
  }
  return out;
}

double projection_error_sq(const FemSpace& space, const Eigen::MatrixXd& snaps,
                           const Eigen::MatrixXd& basis) {
  double total = 0.0;
  for (int j = 0; j < snaps.cols(); ++j) {
    Eigen::VectorXd defect = snaps.col(j);
    for (int i = 0; i < basis.cols(); ++i) {
      defect -= l2_inner(space, basis.col(i), defect) * basis.col(i);
    }
    const double nrm = l2_norm(space, defect);
    total += nrm * nrm;
  }
  return total;
}

}  // namespace

TEST_CASE("snapshot columns are the concatenated full trajectories") {
  const ProblemConfig cfg = unit_config();
  const std::vector<ParameterPoint> sample =
      sample_parameters(cfg.freq, cfg.ranges, 2, 11);
  const SnapshotSet set = build_snapshots(cfg, sample);
  const TimeGrid grid = time_grid(cfg);

  REQUIRE(set.matrix.rows() == cfg.num_intervals + 1);
  REQUIRE(set.matrix.cols() == 2 * (grid.num_steps + 1));
  REQUIRE(set.sample.size() == 2);
  for (int s = 0; s < 2; ++s) {
    CHECK((set.sample[s].free_coords - sample[s].free_coords)
              .cwiseAbs()
              .maxCoeff() == 0.0);
    const FullTrajectory traj = solve_full(cfg, sample[s]);
    CHECK((set.matrix.middleCols(s * (grid.num_steps + 1),
                                 grid.num_steps + 1) -
           traj.states)
              .cwiseAbs()
              .maxCoeff() == 0.0);
  }
}

TEST_CASE("pod eigenvalues match a dense correlation oracle on both paths") {
  const FemSpace space = build_space(8);

  // Narrow family: snapshot-count-sized eigenproblem.
  const Eigen::MatrixXd narrow = decaying_snapshots(space, 7);
  // Wide family: node-sized eigenproblem.
  const Eigen::MatrixXd wide = decaying_snapshots(space, 14);

  for (const Eigen::MatrixXd* snaps : {&narrow, &wide}) {
    SnapshotSet set;
    set.matrix = *snaps;
    Eigen::VectorXd spectrum;
    const ReducedBasis basis = pod_basis(space, set, 3, &spectrum);
    const PodOracle oracle = pod_oracle(space, *snaps, 3);

    REQUIRE(basis.size() == 3);
    for (int i = 0; i < 4; ++i) {
      CHECK(std::abs(spectrum(i) - oracle.eigenvalues(i)) <=
            1e-8 * oracle.eigenvalues(0));
    }
    // The trailing eigenvalues vanish: the family has rank four.
    CHECK(spectrum(4) <= 1e-10 * oracle.eigenvalues(0));

    // Spans agree: every oracle mode lies in the computed basis and back.
    for (int i = 0; i < 3; ++i) {
      Eigen::VectorXd defect = oracle.modes.col(i);
      for (int j = 0; j < 3; ++j) {
        defect -=
            l2_inner(space, basis.vectors.col(j), defect) * basis.vectors.col(j);
      }
      CHECK(l2_norm(space, defect) <= 1e-8);
    }
  }
}

TEST_CASE("a repeated snapshot reduces to its normalized direction") {
  const FemSpace space = build_space(8);
  const Eigen::VectorXd shape =
      interpolate(space, [](double x) { return 1.0 + x * (1.0 - x); });
  SnapshotSet set;
  set.matrix.resize(space.dim(), 4);
  for (int j = 0; j < 4; ++j) set.matrix.col(j) = (j + 1.0) * shape;

  const ReducedBasis basis = pod_basis(space, set, 1);
  REQUIRE(basis.size() == 1);
  const Eigen::VectorXd expected = shape / l2_norm(space, shape);
  const double sign = basis.vectors.col(0).dot(expected) >= 0 ? 1.0 : -1.0;
  CHECK((sign * basis.vectors.col(0) - expected).cwiseAbs().maxCoeff() <=
        1e-12);
}

TEST_CASE("pod modes are orthonormal in the mesh inner product") {
  const FemSpace space = build_space(10);
  SnapshotSet set;
  set.matrix = decaying_snapshots(space, 9);
  const ReducedBasis basis = pod_basis(space, set, 4);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      const double expected = i == j ? 1.0 : 0.0;
      CHECK(std::abs(l2_inner(space, basis.vectors.col(i),
                              basis.vectors.col(j)) -
                     expected) <= 1e-10);
    }
  }
}

TEST_CASE("rank-deficient snapshots are rejected with the available rank") {
  const FemSpace space = build_space(8);
  const Eigen::VectorXd a =
      interpolate(space, [](double x) { return std::sin(2.0 * x); });

  // Zero columns contribute exact zero rows to the correlation matrix, so
  // only one eigenvalue is positive.
  SnapshotSet narrow;
  narrow.matrix.setZero(space.dim(), 6);
  narrow.matrix.col(0) = a;
  try {
    pod_basis(space, narrow, 3);
    FAIL("expected RankDeficiencyError");
  } catch (const RankDeficiencyError& e) {
    CHECK(e.available_rank == 1);
  }

  // A family with no nonzero snapshot at all has rank zero on the
  // node-sized (transposed) path as well.
  SnapshotSet wide;
  wide.matrix.setZero(space.dim(), space.dim() + 3);
  try {
    pod_basis(space, wide, 3);
    FAIL("expected RankDeficiencyError");
  } catch (const RankDeficiencyError& e) {
    CHECK(e.available_rank == 0);
  }
}

TEST_CASE("pod minimizes the squared projection error over random subspaces") {
  const FemSpace space = build_space(10);
  std::mt19937 gen(23);
  std::normal_distribution<double> gauss(0.0, 1.0);

  SnapshotSet set;
  set.matrix.resize(space.dim(), 20);
  for (int j = 0; j < set.matrix.cols(); ++j) {
    for (int i = 0; i < space.dim(); ++i) set.matrix(i, j) = gauss(gen);
  }

  Eigen::VectorXd spectrum;
  const ReducedBasis basis = pod_basis(space, set, 3, &spectrum);
  const double pod_err = projection_error_sq(space, set.matrix, basis.vectors);

  // The optimal value is the tail of the correlation spectrum.
  const double tail = spectrum.segment(3, spectrum.size() - 3).sum();
  CHECK(std::abs(pod_err - tail) <= 1e-8 * spectrum(0));

  Eigen::MatrixXd trial(space.dim(), 3);
  for (int rep = 0; rep < 1000; ++rep) {
    for (int j = 0; j < 3; ++j) {
      for (int i = 0; i < space.dim(); ++i) trial(i, j) = gauss(gen);
    }
    const Eigen::MatrixXd q = orthonormalize(space, trial);
    if (q.cols() < 3) continue;
    CHECK(projection_error_sq(space, set.matrix, q) >= pod_err - 1e-10);
  }
}

TEST_CASE("greedy selections attain the indicator argmax with first-hit ties") {
  ProblemConfig cfg = unit_config();
  const FemSpace space = build_space(cfg.num_intervals);
  const AssembledForms forms = assemble_forms(space, cfg.penalty);
  const std::vector<ParameterPoint> candidates =
      sample_parameters(cfg.freq, cfg.ranges, 6, cfg.rb.seed);

  const GreedyResult res = greedy_basis(cfg, space, forms, candidates, 3);
  REQUIRE(res.steps.size() == 3);
  REQUIRE(res.basis.size() == 3);

  const TimeGrid grid = time_grid(cfg);
  OnlineWorkspace online_ws;
  CertificationWorkspace cert_ws;
  for (std::size_t step = 1; step < res.steps.size(); ++step) {
    const Eigen::MatrixXd prefix =
        res.basis.vectors.leftCols(static_cast<int>(step));
    const OnlineData data = build_online_data(cfg, space, forms, prefix);

    double best = -std::numeric_limits<double>::infinity();
    int best_s = -1;
    int best_k = -1;
    for (int s = 0; s < static_cast<int>(candidates.size()); ++s) {
      const ReducedTrajectory traj =
          solve_reduced(data, candidates[s], &online_ws);
      const auto consider = [&](double value, int k) {
        if (value > best) {
          best = value;
          best_s = s;
          best_k = k;
        }
      };
      consider(initial_error_norm(data.init_gram, candidates[s]), 0);
      for (int k = 1; k <= grid.num_steps; ++k) {
        const Eigen::VectorXd u_tilde = prefix * traj.states.col(k);
        const double c_exact =
            exact_stability(space, forms, u_tilde, candidates[s].nu).value;
        consider(certified_bound_step(data, candidates[s], k, 0.0,
                                      traj.states.col(k),
                                      traj.states.col(k - 1), c_exact, c_exact,
                                      &cert_ws)
                     .eps,
                 k);
      }
    }
    CHECK(res.steps[step].sample_index == best_s);
    CHECK(res.steps[step].time_index == best_k);
    CHECK(res.steps[step].indicator == best);
  }
}

TEST_CASE("greedy reports stagnation when the sample cannot fill the basis") {
  // All data identically zero: the seed snapshot is already zero.
  ProblemConfig zero;
  zero.num_intervals = 8;
  zero.dt = 0.02;
  zero.horizon = 0.1;
  zero.ranges.nu = {1.0, 1.0};
  zero.ranges.f_m = {0.0, 0.0};
  zero.ranges.u0m = {0.0, 0.0};
  {
    const FemSpace space = build_space(zero.num_intervals);
    const AssembledForms forms = assemble_forms(space, zero.penalty);
    const std::vector<ParameterPoint> cand =
        sample_parameters(zero.freq, zero.ranges, 3, 1);
    try {
      greedy_basis(zero, space, forms, cand, 2);
      FAIL("expected StagnationError");
    } catch (const StagnationError& e) {
      CHECK(e.achieved_size == 0);
    }
  }

  // Constant steady data under a stiff penalty: every trajectory stays on
  // the constant direction, so no second direction exists.
  ProblemConfig steady;
  steady.num_intervals = 8;
  steady.dt = 0.02;
  steady.horizon = 0.1;
  steady.penalty = 1e12;
  steady.ranges.nu = {1.0, 1.0};
  steady.ranges.f_m = {0.0, 0.0};
  steady.ranges.u0m = {0.5, 0.5};
  {
    const FemSpace space = build_space(steady.num_intervals);
    const AssembledForms forms = assemble_forms(space, steady.penalty);
    const std::vector<ParameterPoint> cand =
        sample_parameters(steady.freq, steady.ranges, 3, 1);
    try {
      greedy_basis(steady, space, forms, cand, 2);
      FAIL("expected StagnationError");
    } catch (const StagnationError& e) {
      CHECK(e.achieved_size == 1);
    }
  }
}

TEST_CASE("enrichment prepends the initial family and is idempotent in span") {
  const ProblemConfig cfg = unit_config();
  const FemSpace space = build_space(cfg.num_intervals);

  ReducedBasis plain;
  plain.vectors = smooth_basis(space, 2);
  const ReducedBasis once = enrich_with_initial_modes(space, cfg.freq, plain);
  CHECK(once.enriched_count == 1 + cfg.freq.n_u0());
  CHECK(once.size() <= 2 + 1 + cfg.freq.n_u0());

  // The constant direction comes first.
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(space.dim());
  const double sign = once.vectors.col(0).sum() >= 0 ? 1.0 : -1.0;
  CHECK((sign * once.vectors.col(0) - ones).cwiseAbs().maxCoeff() <= 1e-12);

  const ReducedBasis twice = enrich_with_initial_modes(space, cfg.freq, once);
  CHECK(twice.size() == once.size());
  for (int j = 0; j < once.size(); ++j) {
    Eigen::VectorXd defect = once.vectors.col(j);
    for (int i = 0; i < twice.size(); ++i) {
      defect -= l2_inner(space, twice.vectors.col(i), defect) *
                twice.vectors.col(i);
    }
    CHECK(l2_norm(space, defect) <= 1e-10);
  }

  // Without initial sine modes only the constant direction is added; start
  // from a basis that does not already contain it.
  ProblemConfig bare;
  bare.num_intervals = cfg.num_intervals;
  Eigen::MatrixXd waves(space.dim(), 2);
  waves.col(0) = interpolate(space, [](double x) { return std::sin(3 * x); });
  waves.col(1) = interpolate(space, [](double x) { return std::sin(5 * x); });
  ReducedBasis wave_basis;
  wave_basis.vectors = orthonormalize(space, waves);
  const ReducedBasis constant_only =
      enrich_with_initial_modes(space, bare.freq, wave_basis);
  CHECK(constant_only.enriched_count == 1);
  CHECK(constant_only.size() == 3);
}

TEST_CASE("the boundary-node dual norm is exact on two cells and dominates") {
  ProblemConfig tiny;
  tiny.num_intervals = 2;
  tiny.ranges.nu = {1.0, 1.0};
  tiny.ranges.f_m = {0.0, 0.0};
  tiny.ranges.u0m = {0.0, 0.0};
  const FemSpace tiny_space = build_space(2);
  const AssembledForms tiny_forms = assemble_forms(tiny_space, tiny.penalty);
  const OnlineData tiny_data = build_online_data(
      tiny, tiny_space, tiny_forms,
      orthonormalize(tiny_space, Eigen::MatrixXd::Ones(tiny_space.dim(), 1)));
  CHECK(std::abs(tiny_data.aux.node_dual - std::sqrt(3.0)) <= 1e-12);

  // node_dual bounds |v(x_1)| over unit-norm zero-boundary functions.
  const FemSpace space = build_space(10);
  const AssembledForms forms = assemble_forms(space, 1e7);
  ProblemConfig cfg10;
  cfg10.num_intervals = 10;
  cfg10.ranges.nu = {1.0, 1.0};
  cfg10.ranges.f_m = {0.0, 0.0};
  cfg10.ranges.u0m = {0.0, 0.0};
  const OnlineData data = build_online_data(
      cfg10, space, forms,
      orthonormalize(space, Eigen::MatrixXd::Ones(space.dim(), 1)));
  const Tridiagonal interior = forms.mass.interior();

  std::mt19937 gen(5);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd v(space.interior_dim());
  for (int rep = 0; rep < 100000; ++rep) {
    for (int i = 0; i < v.size(); ++i) v(i) = gauss(gen);
    const double nrm = std::sqrt(v.dot(interior.apply(v)));
    CHECK(std::abs(v(0)) / nrm <= data.aux.node_dual + 1e-12);
  }
}

TEST_CASE("reduced operators agree with quadrature on sampled entries") {
  const ProblemConfig cfg = unit_config();
  const FemSpace space = build_space(cfg.num_intervals);
  const AssembledForms forms = assemble_forms(space, cfg.penalty);
  const Eigen::MatrixXd basis = smooth_basis(space, 3);
  const OnlineData data = build_online_data(cfg, space, forms, basis);

  Eigen::MatrixXd gram(3, 3);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      gram(i, j) = l2_inner(space, basis.col(i), basis.col(j));
    }
  }
  CHECK((data.red_mass - gram).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((data.red_mass - Eigen::MatrixXd::Identity(3, 3))
            .cwiseAbs()
            .maxCoeff() <= 1e-10);

  for (int l = 0; l < 3; ++l) {
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        const double direct =
            trilinear_c(space, basis.col(l), basis.col(j), basis.col(i));
        CHECK(std::abs(data.red_tri[l](i, j) - direct) <= 1e-12);
        CHECK(std::abs(data.red_tri[l](i, j) - data.red_tri[j](i, l)) <=
              1e-12);
      }
    }
  }
}

TEST_CASE("scm training produces a tight sandwich at its own points") {
  ProblemConfig cfg = unit_config();
  cfg.horizon = 0.2;
  cfg.scm.constraint_count = 6;
  cfg.scm.nearest_count = 4;
  cfg.scm.sample_size = 15;
  const FemSpace space = build_space(cfg.num_intervals);
  const AssembledForms forms = assemble_forms(space, cfg.penalty);
  const Eigen::MatrixXd basis = smooth_basis(space, 3);
  OnlineData data = build_online_data(cfg, space, forms, basis);
  scm_train(cfg, space, forms, basis, data);

  REQUIRE(static_cast<int>(data.scm.constraints.size()) ==
          cfg.scm.constraint_count);

  ScmQueryContext ctx;
  for (const ScmConstraint& con : data.scm.constraints) {
    const double lo =
        scm_lower_bound(data.scm, con.mu_coords, con.k, con.state, con.nu, &ctx);
    const double hi = scm_upper_bound(data.scm, con.state, con.nu);
    CHECK(std::abs(lo - con.c_value) <= 1e-9 * (1.0 + std::abs(con.c_value)));
    CHECK(std::abs(hi - con.c_value) <= 1e-9 * (1.0 + std::abs(con.c_value)));
  }

  // Fresh queries keep the exact constant inside the sandwich.
  OnlineWorkspace online_ws;
  for (const ParameterPoint& mu :
       sample_parameters(cfg.freq, cfg.ranges, 5, 77)) {
    const ReducedTrajectory red = solve_reduced(data, mu, &online_ws);
    for (int k = 2; k <= data.num_steps; k += 3) {
      const Eigen::VectorXd state = red.states.col(k);
      const double exact =
          exact_stability(space, forms, basis * state, mu.nu).value;
      const double lo =
          scm_lower_bound(data.scm, mu.free_coords, k, state, mu.nu, &ctx);
      const double hi = scm_upper_bound(data.scm, state, mu.nu);
      CHECK(lo <= exact + 1e-9 * (1.0 + std::abs(exact)));
      CHECK(hi >= exact - 1e-9 * (1.0 + std::abs(exact)));
    }
  }
}

TEST_CASE("scm training honors its stopping rules") {
  ProblemConfig cfg = unit_config();
  cfg.scm.sample_size = 10;
  const FemSpace space = build_space(cfg.num_intervals);
  const AssembledForms forms = assemble_forms(space, cfg.penalty);
  const Eigen::MatrixXd basis = smooth_basis(space, 2);

  // A saturated sharpness tolerance stops right after the first point.
  cfg.scm.constraint_count = 8;
  cfg.scm.sharpness_tol = 1.0;
  OnlineData data = build_online_data(cfg, space, forms, basis);
  scm_train(cfg, space, forms, basis, data);
  CHECK(data.scm.constraints.size() == 1);

  // The budget caps the number of stored points.
  cfg.scm.constraint_count = 3;
  cfg.scm.sharpness_tol = 1e-10;
  OnlineData capped = build_online_data(cfg, space, forms, basis);
  scm_train(cfg, space, forms, basis, capped);
  CHECK(capped.scm.constraints.size() == 3);

  // The training pool itself can run out first.
  cfg.scm.constraint_count = 8;
  cfg.scm.sample_size = 2;
  OnlineData small = build_online_data(cfg, space, forms, basis);
  scm_train(cfg, space, forms, basis, small);
  CHECK(small.scm.constraints.size() == 2);
}

TEST_CASE("reconstruct maps reduced coefficients through the basis") {
  const FemSpace space = build_space(8);
  const Eigen::MatrixXd basis = smooth_basis(space, 2);
  Eigen::MatrixXd coeffs(2, 3);
  coeffs << 1.0, 0.0, 2.0, 0.0, 1.0, -1.0;
  const Eigen::MatrixXd rec = reconstruct(basis, coeffs);
  CHECK((rec - basis * coeffs).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(reconstruct(basis, Eigen::MatrixXd::Zero(3, 2)),
                  std::invalid_argument);
}
