#include "burgers_rb/commands.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include "burgers_rb/scm.hpp"

namespace burgers_rb {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open '" + path + "' for writing");
  }
  out << text;
  out.close();
  if (!out) {
    throw std::runtime_error("failed writing '" + path + "'");
  }
}

BasisMethod parse_method(const std::string& name) {
  if (name == "pod") return BasisMethod::pod;
  if (name == "greedy") return BasisMethod::greedy;
  throw std::runtime_error("unknown basis method '" + name +
                           "' (expected pod or greedy)");
}

ParameterPoint draw_point(const ProblemConfig& config) {
  return sample_parameters(config.freq, config.ranges, 1, config.seed)[0];
}

void require_path(const std::string& value, const char* flag,
                  const char* command) {
  if (value.empty()) {
    throw std::runtime_error(std::string(command) + " requires " + flag);
  }
}

void check_model_compatibility(const ProblemConfig& config,
                               const ReducedModel& model) {
  if (!compatible_configs(config, model.config)) {
    throw std::runtime_error(
        "model/config mismatch: the model was built for a different problem "
        "(mesh, time grid, penalty, Newton controls, frequencies or ranges "
        "differ)");
  }
}

double reduced_norm(const OnlineData& data,
                    const Eigen::Ref<const Eigen::VectorXd>& state) {
  return std::sqrt(std::max(0.0, state.dot(data.red_mass * state)));
}

}  // namespace

std::string trajectory_csv(const FullTrajectory& trajectory) {
  const int dim = static_cast<int>(trajectory.states.rows());
  std::string out = "t";
  for (int i = 0; i < dim; ++i) out += ",x" + std::to_string(i);
  out += "\n";
  for (int k = 0; k < trajectory.states.cols(); ++k) {
    out += fmt(trajectory.grid.time(k));
    for (int i = 0; i < dim; ++i) out += "," + fmt(trajectory.states(i, k));
    out += "\n";
  }
  return out;
}

std::string online_csv(const CertifiedSolution& certified) {
  const int n = static_cast<int>(certified.trajectory.states.rows());
  std::string out = "t";
  for (int j = 1; j <= n; ++j) out += ",coeff_" + std::to_string(j);
  out += ",bound\n";
  for (int k = 0; k < certified.trajectory.states.cols(); ++k) {
    out += fmt(certified.trajectory.grid.time(k));
    for (int j = 0; j < n; ++j) {
      out += "," + fmt(certified.trajectory.states(j, k));
    }
    out += "," + fmt(certified.steps[k].eps) + "\n";
  }
  return out;
}

namespace {

std::string certification_rows(const CertifiedSolution& certified,
                               const std::vector<double>* actual) {
  std::string out = actual ? "k,t,eps_k,actual_error,C_inf,C_sup,r_norm\n"
                           : "k,t,eps_k,C_inf,C_sup,r_norm\n";
  for (std::size_t k = 0; k < certified.steps.size(); ++k) {
    const BoundState& b = certified.steps[k];
    out += std::to_string(k) + "," +
           fmt(certified.trajectory.grid.time(static_cast<int>(k))) + "," +
           fmt(b.eps);
    if (actual) out += "," + fmt((*actual)[k]);
    out += "," + fmt(b.c_inf) + "," + fmt(b.c_sup) + "," + fmt(b.res_norm) +
           "\n";
  }
  return out;
}

}  // namespace

std::string certification_csv(const CertifiedSolution& certified) {
  return certification_rows(certified, nullptr);
}

std::string certification_csv(const CertifiedSolution& certified,
                              const FemSpace& space,
                              const Eigen::MatrixXd& basis,
                              const FullTrajectory& full) {
  if (full.states.cols() != certified.trajectory.states.cols()) {
    throw std::invalid_argument(
        "certification_csv: trajectories have different step counts");
  }
  std::vector<double> actual(certified.steps.size());
  for (std::size_t k = 0; k < actual.size(); ++k) {
    const int kk = static_cast<int>(k);
    actual[k] = l2_norm(
        space, full.states.col(kk) - basis * certified.trajectory.states.col(kk));
  }
  return certification_rows(certified, &actual);
}

std::string scm_report_csv(const ReducedModel& model,
                           const ParameterPoint& mu) {
  const FemSpace space = build_space(model.config.num_intervals);
  const AssembledForms forms =
      assemble_forms(space, model.config.penalty);
  const ReducedTrajectory red = solve_reduced(model.online, mu);

  std::string out = "k,C_exact,C_inf,C_sup\n";
  ScmQueryContext ctx;
  for (int k = 1; k <= model.online.num_steps; ++k) {
    const Eigen::VectorXd state = red.states.col(k);
    const double exact =
        exact_stability(space, forms, model.basis.vectors * state, mu.nu)
            .value;
    const double lo = scm_lower_bound(model.online.scm, mu.free_coords, k,
                                      state, mu.nu, &ctx);
    const double hi = scm_upper_bound(model.online.scm, state, mu.nu);
    out += std::to_string(k) + "," + fmt(exact) + "," + fmt(lo) + "," +
           fmt(hi) + "\n";
  }
  return out;
}

std::vector<BenchmarkRow> run_benchmark(
    const ProblemConfig& config, const std::vector<BasisMethod>& methods) {
  const RbOptions& rb = config.rb;
  if (rb.sweep_min < 1 || rb.sweep_max < rb.sweep_min) {
    throw std::invalid_argument("run_benchmark: invalid N-sweep bounds");
  }
  const FemSpace space = build_space(config.num_intervals);
  const AssembledForms forms = assemble_forms(space, config.penalty);
  const TimeGrid grid = time_grid(config);
  const std::vector<ParameterPoint> sample = sample_parameters(
      config.freq, config.ranges, rb.benchmark_samples, rb.seed);
  const int count = static_cast<int>(sample.size());

  // One full trajectory per sample point, reused by every row.
  std::vector<FullTrajectory> full(count);
  double full_total = 0.0;
  for (int i = 0; i < count; ++i) {
    const auto t0 = Clock::now();
    full[i] = solve_full(config, sample[i]);
    full_total += seconds_since(t0);
  }
  const double mean_full = full_total / count;

  std::vector<BenchmarkRow> rows;
  for (const BasisMethod method : methods) {
    // The basis family is built once at the largest size; both POD modes and
    // greedy selections are nested, so each N reuses the leading columns.
    const auto shared_start = Clock::now();
    ReducedBasis family;
    if (method == BasisMethod::pod) {
      const std::vector<ParameterPoint> pod_sample = sample_parameters(
          config.freq, config.ranges, rb.snapshot_count, rb.seed);
      family = pod_basis(space, build_snapshots(config, pod_sample),
                         rb.sweep_max);
    } else {
      const std::vector<ParameterPoint> candidates = sample_parameters(
          config.freq, config.ranges, rb.greedy_candidates, rb.seed);
      family =
          greedy_basis(config, space, forms, candidates, rb.sweep_max).basis;
    }
    const double shared_seconds = seconds_since(shared_start);

    for (int n = rb.sweep_min; n <= rb.sweep_max; ++n) {
      const auto per_n_start = Clock::now();
      const Eigen::MatrixXd prefix = family.vectors.leftCols(n);
      OnlineData data = build_online_data(config, space, forms, prefix);
      scm_train(config, space, forms, prefix, data);
      const double per_n_seconds = seconds_since(per_n_start);

      // Workspaces cache model-specific structure, so they live per N.
      OnlineWorkspace online_ws;
      CertificationWorkspace cert_ws;

      BenchmarkRow row;
      row.method = method == BasisMethod::pod ? "pod" : "greedy";
      row.n = n;
      row.offline_seconds = shared_seconds + per_n_seconds;
      row.mean_full_seconds = mean_full;

      double online_total = 0.0;
      double sum_bound = 0.0, sum_error = 0.0;
      double max_bound = 0.0, max_error = 0.0;
      const long terms = static_cast<long>(count) * (grid.num_steps + 1);
      for (int i = 0; i < count; ++i) {
        const auto t0 = Clock::now();
        const CertifiedSolution cert =
            certify_trajectory(data, sample[i], &cert_ws, &online_ws);
        online_total += seconds_since(t0);

        for (int k = 0; k <= grid.num_steps; ++k) {
          const Eigen::VectorXd state = cert.trajectory.states.col(k);
          const double norm = reduced_norm(data, state);
          const double rel_bound = cert.steps[k].eps / norm;
          const double rel_error =
              l2_norm(space, full[i].states.col(k) - prefix * state) / norm;
          sum_bound += rel_bound;
          sum_error += rel_error;
          max_bound = std::max(max_bound, rel_bound);
          max_error = std::max(max_error, rel_error);
        }
      }
      row.mean_online_seconds = online_total / count;
      row.max_rel_bound = max_bound;
      row.mean_rel_bound = sum_bound / terms;
      row.max_rel_error = max_error;
      row.mean_rel_error = sum_error / terms;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::string benchmark_csv(const std::vector<BenchmarkRow>& rows) {
  std::string out =
      "method,N,max_rel_bound,mean_rel_bound,max_rel_error,mean_rel_error,"
      "offline_seconds,mean_online_seconds,mean_full_seconds\n";
  for (const BenchmarkRow& r : rows) {
    out += r.method + "," + std::to_string(r.n) + "," + fmt(r.max_rel_bound) +
           "," + fmt(r.mean_rel_bound) + "," + fmt(r.max_rel_error) + "," +
           fmt(r.mean_rel_error) + "," + fmt(r.offline_seconds) + "," +
           fmt(r.mean_online_seconds) + "," + fmt(r.mean_full_seconds) + "\n";
  }
  return out;
}

namespace {

int dispatch(const CommandOptions& opt) {
  if (opt.config_path.empty()) {
    throw std::runtime_error("--config is required");
  }
  ProblemConfig config = load_config(opt.config_path);
  if (opt.has_seed) config.seed = opt.seed;
  if (opt.n_override > 0) config.rb.basis_size = opt.n_override;
  if (opt.enrich) config.rb.enrich = true;

  if (opt.command == "full-solve") {
    require_path(opt.out_path, "--out", "full-solve");
    const ParameterPoint mu = draw_point(config);
    const FullTrajectory trajectory = solve_full(config, mu);
    const double eps_b =
        boundary_error_indicator(trajectory, mu, config.freq);
    write_text(opt.out_path, trajectory_csv(trajectory));
    std::cout << "wrote " << opt.out_path << " ("
              << trajectory.states.cols() << " rows); eps_b = " << fmt(eps_b)
              << "\n";
    return 0;
  }

  if (opt.command == "offline-build") {
    const std::string target =
        opt.model_path.empty() ? opt.out_path : opt.model_path;
    require_path(target, "--model (or --out)", "offline-build");
    const BasisMethod method = parse_method(opt.basis);
    const ReducedModel model =
        build_reduced_model(config, method, config.rb.enrich);
    save_model(model, target);
    std::cout << "wrote " << target << " (N = " << model.basis.size()
              << ", enriched modes = " << model.basis.enriched_count
              << ", stability points = "
              << model.online.scm.constraints.size() << ")\n";
    return 0;
  }

  if (opt.command == "online-solve") {
    require_path(opt.model_path, "--model", "online-solve");
    require_path(opt.out_path, "--out", "online-solve");
    const ReducedModel model = load_model(opt.model_path);
    check_model_compatibility(config, model);
    const ParameterPoint mu = draw_point(config);
    const CertifiedSolution certified = certify_trajectory(model.online, mu);
    write_text(opt.out_path, online_csv(certified));
    std::cout << "wrote " << opt.out_path << "; final bound = "
              << fmt(certified.steps.back().eps) << "\n";
    return 0;
  }

  if (opt.command == "scm-report") {
    require_path(opt.model_path, "--model", "scm-report");
    require_path(opt.out_path, "--out", "scm-report");
    const ReducedModel model = load_model(opt.model_path);
    check_model_compatibility(config, model);
    const ParameterPoint mu = draw_point(config);
    write_text(opt.out_path, scm_report_csv(model, mu));
    std::cout << "wrote " << opt.out_path << "\n";
    return 0;
  }

  if (opt.command == "benchmark") {
    require_path(opt.out_path, "--out", "benchmark");
    std::vector<BasisMethod> methods;
    if (opt.basis_given) {
      methods.push_back(parse_method(opt.basis));
    } else {
      methods = {BasisMethod::pod, BasisMethod::greedy};
    }
    const std::vector<BenchmarkRow> rows = run_benchmark(config, methods);
    write_text(opt.out_path, benchmark_csv(rows));
    std::cout << "wrote " << opt.out_path << " (" << rows.size()
              << " rows)\n";
    return 0;
  }

  throw std::runtime_error(
      "unknown command '" + opt.command +
      "' (expected full-solve, offline-build, online-solve, benchmark or "
      "scm-report)");
}

}  // namespace

int run_command(const CommandOptions& options) {
  try {
    return dispatch(options);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace burgers_rb
