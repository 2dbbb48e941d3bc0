#include "burgers_rb/reduced_basis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <utility>

#include "burgers_rb/certification.hpp"
#include "burgers_rb/scm.hpp"

namespace burgers_rb {

namespace {

constexpr double kDropTol = 1e-10;

// Same generator-to-[0,1) mapping as the parameter sampler, so draws are
// reproducible independently of the standard library.
double uniform01(std::mt19937_64& rng) { return (rng() >> 11) * 0x1.0p-53; }

NodalVector sine_interpolant(const FemSpace& space, double omega) {
  return interpolate(space,
                     [omega](double x) { return std::sin(omega * x); });
}

}  // namespace

SnapshotSet build_snapshots(const ProblemConfig& config,
                            const std::vector<ParameterPoint>& sample) {
  if (sample.empty()) {
    throw std::invalid_argument("build_snapshots: empty parameter sample");
  }
  const TimeGrid grid = time_grid(config);
  const int per_sample = grid.num_steps + 1;
  const int dim = config.num_intervals + 1;

  SnapshotSet out;
  out.sample = sample;
  out.matrix.resize(dim, static_cast<int>(sample.size()) * per_sample);
  for (std::size_t s = 0; s < sample.size(); ++s) {
    FullTrajectory traj;
    try {
      traj = solve_full(config, sample[s]);
    } catch (const NonconvergenceError& e) {
      throw NonconvergenceError(
          e.step, "build_snapshots: full solve failed on sample " +
                      std::to_string(s + 1) + ": " + e.what());
    }
    out.matrix.middleCols(static_cast<int>(s) * per_sample, per_sample) =
        traj.states;
  }
  return out;
}

Eigen::MatrixXd orthonormalize(const FemSpace& space,
                               const Eigen::MatrixXd& columns,
                               double drop_tol) {
  const int dim = static_cast<int>(columns.rows());
  Eigen::MatrixXd kept(dim, columns.cols());
  int stored = 0;
  Eigen::VectorXd v;
  for (int j = 0; j < columns.cols(); ++j) {
    v = columns.col(j);
    for (int pass = 0; pass < 2; ++pass) {
      for (int i = 0; i < stored; ++i) {
        v -= l2_inner(space, kept.col(i), v) * kept.col(i);
      }
    }
    const double nrm = l2_norm(space, v);
    if (nrm < drop_tol) continue;
    kept.col(stored++) = v / nrm;
  }
  return kept.leftCols(stored);
}

ReducedBasis pod_basis(const FemSpace& space, const SnapshotSet& snapshots,
                       int n, Eigen::VectorXd* spectrum) {
  const Eigen::MatrixXd& snaps = snapshots.matrix;
  const int cols = static_cast<int>(snaps.cols());
  const int dim = static_cast<int>(snaps.rows());
  if (dim != space.dim()) {
    throw std::invalid_argument("pod_basis: snapshot/mesh mismatch");
  }
  if (n < 1) {
    throw std::invalid_argument("pod_basis: basis size must be positive");
  }
  if (n >= cols) {
    throw std::invalid_argument(
        "pod_basis: basis size must be smaller than the snapshot count");
  }

  const Tridiagonal mass = assemble_forms(space, 1.0).mass;
  Eigen::MatrixXd raw(dim, n);
  Eigen::VectorXd eigenvalues;

  if (cols <= dim) {
    // Correlation matrix of the snapshots in the L2 inner product.
    Eigen::MatrixXd weighted(dim, cols);
    for (int j = 0; j < cols; ++j) {
      weighted.col(j) = mass.apply(snaps.col(j));
    }
    Eigen::MatrixXd corr(cols, cols);
    corr.noalias() = snaps.transpose() * weighted;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
        0.5 * (corr + corr.transpose()));
    eigenvalues = es.eigenvalues();

    int rank = 0;
    for (int i = 0; i < cols; ++i) {
      if (eigenvalues(i) > 0.0) ++rank;
    }
    if (n > rank) {
      throw RankDeficiencyError(
          rank, "pod_basis: requested " + std::to_string(n) +
                    " modes but the snapshots span only " +
                    std::to_string(rank));
    }
    for (int i = 0; i < n; ++i) {
      raw.col(i).noalias() = snaps * es.eigenvectors().col(cols - 1 - i);
      raw.col(i) /= l2_norm(space, raw.col(i));
    }
  } else {
    // More snapshots than nodes: solve the node-sized problem instead. With
    // the mass factored as L L^T, K = L^T (S S^T) L shares the nonzero
    // spectrum of the correlation matrix, and each eigenvector w maps back
    // to the POD mode via L^T zeta = w.
    Eigen::MatrixXd gram(dim, dim);
    gram.noalias() = snaps * snaps.transpose();
    Eigen::LLT<Eigen::MatrixXd> llt(mass.dense());
    const Eigen::MatrixXd lmat = llt.matrixL();
    Eigen::MatrixXd k = lmat.transpose() * gram * lmat;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
        0.5 * (k + k.transpose()));
    eigenvalues = es.eigenvalues();

    int rank = 0;
    for (int i = 0; i < dim; ++i) {
      if (eigenvalues(i) > 0.0) ++rank;
    }
    if (n > rank) {
      throw RankDeficiencyError(
          rank, "pod_basis: requested " + std::to_string(n) +
                    " modes but the snapshots span only " +
                    std::to_string(rank));
    }
    for (int i = 0; i < n; ++i) {
      raw.col(i) =
          llt.matrixU().solve(es.eigenvectors().col(dim - 1 - i).eval());
      raw.col(i) /= l2_norm(space, raw.col(i));
    }
  }

  if (spectrum) {
    *spectrum = eigenvalues.reverse();
  }

  ReducedBasis basis;
  basis.vectors = orthonormalize(space, raw, kDropTol);
  basis.enriched_count = 0;
  if (basis.size() < n) {
    throw RankDeficiencyError(
        basis.size(),
        "pod_basis: modes collapsed during re-orthonormalization");
  }
  return basis;
}

GreedyResult greedy_basis(const ProblemConfig& config, const FemSpace& space,
                          const AssembledForms& forms,
                          const std::vector<ParameterPoint>& candidates,
                          int target_size) {
  if (candidates.empty()) {
    throw std::invalid_argument("greedy_basis: empty candidate sample");
  }
  if (target_size < 1) {
    throw std::invalid_argument("greedy_basis: basis size must be positive");
  }
  const TimeGrid grid = time_grid(config);
  const int count = static_cast<int>(candidates.size());
  const int num_steps = grid.num_steps;
  const int dim = space.dim();
  const double inf = std::numeric_limits<double>::infinity();

  // Full trajectories are computed at most once per candidate; a candidate
  // selected at several time indices reuses its trajectory.
  std::vector<FullTrajectory> cache(count);
  std::vector<bool> cached(count, false);
  const auto full_at = [&](int s) -> const FullTrajectory& {
    if (!cached[s]) {
      try {
        cache[s] = solve_full(config, candidates[s]);
      } catch (const NonconvergenceError& e) {
        throw NonconvergenceError(
            e.step, "greedy_basis: full solve failed on candidate " +
                        std::to_string(s + 1) + ": " + e.what());
      }
      cached[s] = true;
    }
    return cache[s];
  };

  // Random (sample, time) seed; skips past numerically zero snapshots.
  std::mt19937_64 rng(config.rb.seed + 1);
  int seed_s = std::min(count - 1, static_cast<int>(uniform01(rng) * count));
  int seed_k =
      std::min(num_steps, static_cast<int>(uniform01(rng) * (num_steps + 1)));
  const FullTrajectory& seed_traj = full_at(seed_s);
  double seed_norm = 0.0;
  for (int tries = 0; tries <= num_steps; ++tries) {
    seed_norm = l2_norm(space, seed_traj.states.col(seed_k));
    if (seed_norm >= kDropTol) break;
    seed_k = (seed_k + 1) % (num_steps + 1);
  }
  if (seed_norm < kDropTol) {
    throw StagnationError(
        0, "greedy_basis: the seed trajectory is identically zero");
  }

  GreedyResult out;
  Eigen::MatrixXd basis(dim, 1);
  basis.col(0) = seed_traj.states.col(seed_k) / seed_norm;
  out.steps.push_back({seed_s, seed_k, 0.0});

  OnlineWorkspace online_ws;
  CertificationWorkspace cert_ws;
  Eigen::VectorXd u_tilde(dim);
  while (static_cast<int>(basis.cols()) < target_size) {
    const OnlineData data = build_online_data(config, space, forms, basis);

    // Argmax of the local indicator over candidates x {0..T}: the certified
    // bound with eps_{k-1} = 0 and the exact stability constant; k = 0 is
    // scored by the initial projection error. Failures score +infinity.
    double best = -inf;
    int best_s = -1;
    int best_k = -1;
    const auto consider = [&](double value, int s, int k) {
      if (value > best) {
        best = value;
        best_s = s;
        best_k = k;
      }
    };
    for (int s = 0; s < count; ++s) {
      const ParameterPoint& mu = candidates[s];
      ReducedTrajectory traj;
      try {
        traj = solve_reduced(data, mu, &online_ws);
      } catch (const NonconvergenceError& e) {
        consider(inf, s, std::min(e.step, num_steps));
        continue;
      }
      consider(initial_error_norm(data.init_gram, mu), s, 0);
      for (int k = 1; k <= num_steps; ++k) {
        u_tilde.noalias() = basis * traj.states.col(k);
        const double c_exact =
            exact_stability(space, forms, u_tilde, mu.nu).value;
        double value;
        try {
          value = certified_bound_step(data, mu, k, 0.0, traj.states.col(k),
                                       traj.states.col(k - 1), c_exact,
                                       c_exact, &cert_ws)
                      .eps;
        } catch (const CertificationUnavailableError&) {
          value = inf;
        }
        consider(value, s, k);
      }
    }

    Eigen::VectorXd snap = full_at(best_s).states.col(best_k);
    for (int pass = 0; pass < 2; ++pass) {
      for (int j = 0; j < basis.cols(); ++j) {
        snap -= l2_inner(space, basis.col(j), snap) * basis.col(j);
      }
    }
    const double rem = l2_norm(space, snap);
    if (rem < kDropTol) {
      throw StagnationError(
          static_cast<int>(basis.cols()),
          "greedy_basis: selected snapshot is dependent on the basis at size " +
              std::to_string(basis.cols()));
    }
    basis.conservativeResize(Eigen::NoChange, basis.cols() + 1);
    basis.col(basis.cols() - 1) = snap / rem;
    out.steps.push_back({best_s, best_k, best});
  }

  out.basis.vectors = std::move(basis);
  out.basis.enriched_count = 0;
  return out;
}

ReducedBasis enrich_with_initial_modes(const FemSpace& space,
                                       const FrequencyStructure& freq,
                                       const ReducedBasis& basis) {
  const int dim = space.dim();
  if (basis.vectors.rows() != dim) {
    throw std::invalid_argument(
        "enrich_with_initial_modes: basis/mesh mismatch");
  }
  const int n_u0 = freq.n_u0();
  const int prepended = 1 + n_u0;

  Eigen::MatrixXd family(dim, prepended + basis.size());
  family.col(0).setOnes();
  for (int l = 0; l < n_u0; ++l) {
    family.col(1 + l) = sine_interpolant(space, freq.omega_u0[l]);
  }
  family.rightCols(basis.size()) = basis.vectors;

  ReducedBasis out;
  out.vectors = orthonormalize(space, family, kDropTol);
  out.enriched_count = prepended;
  return out;
}

OnlineData build_online_data(const ProblemConfig& config,
                             const FemSpace& space,
                             const AssembledForms& forms,
                             const Eigen::MatrixXd& basis) {
  const int dim = space.dim();
  const int last = dim - 1;
  if (basis.rows() != dim) {
    throw std::invalid_argument("build_online_data: basis/mesh mismatch");
  }
  const int n = static_cast<int>(basis.cols());
  if (n < 1) {
    throw std::invalid_argument("build_online_data: empty basis");
  }
  const TimeGrid grid = time_grid(config);
  const FrequencyStructure& freq = config.freq;
  const int n_fs = freq.n_fS();
  const int n_u0 = freq.n_u0();

  OnlineData d;
  d.freq = freq;
  d.dt = grid.dt;
  d.num_steps = grid.num_steps;
  d.penalty = config.penalty;
  d.newton_tol = config.newton_tol;
  d.newton_cap = config.newton_cap;
  d.basis_size = n;

  Eigen::MatrixXd mass_basis(dim, n);
  Eigen::MatrixXd stiff_basis(dim, n);
  for (int j = 0; j < n; ++j) {
    mass_basis.col(j) = forms.mass.apply(basis.col(j));
    stiff_basis.col(j) = forms.stiffness.apply(basis.col(j));
  }
  d.red_mass.noalias() = basis.transpose() * mass_basis;
  d.red_stiff.noalias() = basis.transpose() * stiff_basis;

  d.zeta_at_0 = basis.row(0).transpose();
  d.zeta_at_1 = basis.row(last).transpose();
  d.red_beta0 = config.penalty * d.zeta_at_0;
  d.red_beta1 = config.penalty * d.zeta_at_1;
  d.red_bpen = config.penalty *
               (d.zeta_at_0 * d.zeta_at_0.transpose() +
                d.zeta_at_1 * d.zeta_at_1.transpose());

  d.red_int.noalias() = basis.transpose() * forms.hat_integrals;

  d.red_fsin.resize(n_fs, n);
  d.aux.load_sin.resize(n_fs, 2);
  const Eigen::MatrixXd source_modes = source_space_modes(space, freq);
  for (int p = 0; p < n_fs; ++p) {
    const Eigen::VectorXd weighted = forms.mass.apply(source_modes.col(p));
    d.red_fsin.row(p).noalias() = weighted.transpose() * basis;
    d.aux.load_sin(p, 0) = weighted(0);
    d.aux.load_sin(p, 1) = weighted(last);
  }

  d.red_tri.resize(n);
  Eigen::MatrixXd conv_basis(dim, n);
  for (int l = 0; l < n; ++l) {
    const Tridiagonal conv = convect_matrix(space, basis.col(l));
    for (int j = 0; j < n; ++j) {
      conv_basis.col(j) = conv.apply(basis.col(j));
    }
    d.red_tri[l].noalias() = basis.transpose() * conv_basis;
  }

  // Projection coefficients of the initial modes: red_mass c = basis^T M g.
  Eigen::LDLT<Eigen::MatrixXd> mass_solver(d.red_mass);
  d.proj_one = mass_solver.solve(d.red_int);
  d.proj_u0sin.resize(n_u0, n);
  for (int l = 0; l < n_u0; ++l) {
    const Eigen::VectorXd weighted =
        forms.mass.apply(sine_interpolant(space, freq.omega_u0[l]));
    d.proj_u0sin.row(l) =
        mass_solver.solve(basis.transpose() * weighted).transpose();
  }

  d.aux.hat_norm = std::sqrt(space.mesh_width / 3.0);
  {
    Eigen::VectorXd unit = Eigen::VectorXd::Zero(space.interior_dim());
    unit(0) = 1.0;
    const Eigen::VectorXd dual = thomas_solve(forms.mass.interior(), unit);
    d.aux.node_dual = std::sqrt(dual(0));
  }
  d.aux.load_const =
      Eigen::Vector2d(forms.hat_integrals(0), forms.hat_integrals(last));
  d.aux.mass_bnd.resize(n, 2);
  d.aux.stiff_bnd.resize(n, 2);
  for (int i = 0; i < n; ++i) {
    d.aux.mass_bnd(i, 0) = mass_basis(0, i);
    d.aux.mass_bnd(i, 1) = mass_basis(last, i);
    d.aux.stiff_bnd(i, 0) = stiff_basis(0, i);
    d.aux.stiff_bnd(i, 1) = stiff_basis(last, i);
  }

  d.aux.tri_bnd0.resize(n, n);
  d.aux.tri_bnd1.resize(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const Eigen::VectorXd sweep =
          trilinear_sweep(space, basis.col(i), basis.col(j));
      d.aux.tri_bnd0(i, j) = sweep(0);
      d.aux.tri_bnd0(j, i) = sweep(0);
      d.aux.tri_bnd1(i, j) = sweep(last);
      d.aux.tri_bnd1(j, i) = sweep(last);
    }
  }

  const int pairs[6][2] = {{0, 0},           {last, last},   {1, 0},
                           {0, 1},           {last - 1, last}, {last, last - 1}};
  d.aux.tri_pair.resize(n, 6);
  d.aux.stiff_pair.resize(6);
  {
    Eigen::VectorXd hat_a = Eigen::VectorXd::Zero(dim);
    Eigen::VectorXd hat_b = Eigen::VectorXd::Zero(dim);
    for (int q = 0; q < 6; ++q) {
      hat_a.setZero();
      hat_b.setZero();
      hat_a(pairs[q][0]) = 1.0;
      hat_b(pairs[q][1]) = 1.0;
      for (int i = 0; i < n; ++i) {
        d.aux.tri_pair(i, q) = trilinear_c(space, basis.col(i), hat_a, hat_b);
      }
    }
    const Tridiagonal& stiff = forms.stiffness;
    d.aux.stiff_pair(0) = stiff.diag(0);
    d.aux.stiff_pair(1) = stiff.diag(last);
    d.aux.stiff_pair(2) = stiff.lower(0);
    d.aux.stiff_pair(3) = stiff.upper(0);
    d.aux.stiff_pair(4) = stiff.upper(last - 1);
    d.aux.stiff_pair(5) = stiff.lower(last - 1);
  }

  d.init_gram = build_initial_gram(space, forms, freq, basis);
  d.res_gram = build_residual_gram(space, forms, freq, basis);

  d.scm.sigma = sigma_bounds(space, forms, basis);
  d.scm.constraints.clear();
  d.scm.nearest_count = config.scm.nearest_count;
  const std::vector<Interval> flat = flatten_ranges(freq, config.ranges);
  d.scm.coord_spans.resize(static_cast<int>(flat.size()));
  for (std::size_t i = 0; i < flat.size(); ++i) {
    d.scm.coord_spans(static_cast<int>(i)) = flat[i].span();
  }
  d.scm.num_steps = grid.num_steps;
  return d;
}

void scm_train(const ProblemConfig& config, const FemSpace& space,
               const AssembledForms& forms, const Eigen::MatrixXd& basis,
               OnlineData& data) {
  const ScmOptions& opt = config.scm;
  data.scm.constraints.clear();
  if (opt.constraint_count <= 0) return;
  const int num_steps = data.num_steps;

  const std::vector<ParameterPoint> sample = sample_parameters(
      config.freq, config.ranges, opt.sample_size, opt.seed);
  const int count = static_cast<int>(sample.size());

  // One random time index per training parameter.
  std::mt19937_64 rng(opt.seed + 1);
  std::vector<int> k_of(count);
  for (int s = 0; s < count; ++s) {
    k_of[s] =
        1 + std::min(num_steps - 1,
                     static_cast<int>(uniform01(rng) * num_steps));
  }

  // Reduced states at the drawn indices; candidates whose reduced solve
  // fails are excluded from training.
  std::vector<Eigen::VectorXd> state_of(count);
  std::vector<bool> usable(count, true);
  OnlineWorkspace online_ws;
  for (int s = 0; s < count; ++s) {
    try {
      const ReducedTrajectory traj = solve_reduced(data, sample[s], &online_ws);
      state_of[s] = traj.states.col(k_of[s]);
    } catch (const NonconvergenceError&) {
      usable[s] = false;
    }
  }

  std::vector<bool> used(count, false);
  const auto append = [&](int s) {
    const ParameterPoint& mu = sample[s];
    const Eigen::VectorXd u_tilde = basis * state_of[s];
    const StabilityResult st = exact_stability(space, forms, u_tilde, mu.nu);
    ScmConstraint con;
    con.k = k_of[s];
    con.mu_coords = mu.free_coords;
    con.c_value = st.value;
    con.y_star.resize(data.basis_size + 1);
    for (int j = 0; j < data.basis_size; ++j) {
      con.y_star(j) =
          trilinear_c(space, basis.col(j), st.eigenvector, st.eigenvector);
    }
    con.y_star(data.basis_size) = forms.stiffness.quadratic(st.eigenvector);
    con.state = state_of[s];
    con.nu = mu.nu;
    data.scm.constraints.push_back(std::move(con));
    used[s] = true;
  };

  int first = -1;
  for (int s = 0; s < count && first < 0; ++s) {
    if (usable[s]) first = s;
  }
  if (first < 0) {
    throw std::runtime_error("scm_train: no usable training candidates");
  }
  append(first);

  // Greedy rounds: exactly solve where the bound sandwich is loosest.
  ScmQueryContext ctx;
  while (static_cast<int>(data.scm.constraints.size()) <
         opt.constraint_count) {
    double best_gap = -std::numeric_limits<double>::infinity();
    int best_s = -1;
    for (int s = 0; s < count; ++s) {
      if (used[s] || !usable[s]) continue;
      const double lo = scm_lower_bound(data.scm, sample[s].free_coords,
                                        k_of[s], state_of[s], sample[s].nu,
                                        &ctx);
      const double hi = scm_upper_bound(data.scm, state_of[s], sample[s].nu);
      const double gap = 1.0 - std::exp(lo - hi);
      if (gap > best_gap) {
        best_gap = gap;
        best_s = s;
      }
    }
    if (best_s < 0 || best_gap < opt.sharpness_tol) break;
    append(best_s);
  }
}

ReducedModel build_reduced_model(const ProblemConfig& config,
                                 BasisMethod method, bool enrich) {
  const FemSpace space = build_space(config.num_intervals);
  const AssembledForms forms = assemble_forms(space, config.penalty);

  ReducedBasis basis;
  if (method == BasisMethod::pod) {
    const std::vector<ParameterPoint> sample = sample_parameters(
        config.freq, config.ranges, config.rb.snapshot_count, config.rb.seed);
    basis = pod_basis(space, build_snapshots(config, sample),
                      config.rb.basis_size);
  } else {
    const std::vector<ParameterPoint> candidates = sample_parameters(
        config.freq, config.ranges, config.rb.greedy_candidates,
        config.rb.seed);
    basis = greedy_basis(config, space, forms, candidates,
                         config.rb.basis_size)
                .basis;
  }
  if (enrich) {
    basis = enrich_with_initial_modes(space, config.freq, basis);
  }

  ReducedModel model;
  model.config = config;
  model.online = build_online_data(config, space, forms, basis.vectors);
  scm_train(config, space, forms, basis.vectors, model.online);
  model.basis = std::move(basis);
  return model;
}

Eigen::MatrixXd reconstruct(const Eigen::MatrixXd& basis,
                            const Eigen::MatrixXd& reduced_states) {
  if (basis.cols() != reduced_states.rows()) {
    throw std::invalid_argument("reconstruct: basis/states size mismatch");
  }
  return basis * reduced_states;
}

}  // namespace burgers_rb
