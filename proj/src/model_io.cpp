#include "burgers_rb/model_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace burgers_rb {

namespace {

using nlohmann::json;

constexpr const char* kFormatName = "burgers-rb-model";
constexpr int kFormatVersion = 1;

json dump_vector(const Eigen::VectorXd& v) {
  json out = json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json dump_matrix(const Eigen::MatrixXd& m) {
  json data = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
  }
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

json dump_interval(const Interval& iv) { return json::array({iv.lo, iv.hi}); }

json dump_intervals(const std::vector<Interval>& list) {
  json out = json::array();
  for (const Interval& iv : list) out.push_back(dump_interval(iv));
  return out;
}

Eigen::VectorXd read_vector(const json& j, const std::string& name) {
  if (!j.is_array()) {
    throw ModelFormatError("model field '" + name + "' must be an array");
  }
  Eigen::VectorXd out(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    out(static_cast<int>(i)) = j[i].get<double>();
  }
  return out;
}

Eigen::MatrixXd read_matrix(const json& j, const std::string& name) {
  if (!j.is_object() || !j.contains("rows") || !j.contains("cols") ||
      !j.contains("data")) {
    throw ModelFormatError("model field '" + name +
                           "' must be a {rows, cols, data} object");
  }
  const int rows = j["rows"].get<int>();
  const int cols = j["cols"].get<int>();
  const json& data = j["data"];
  if (rows < 0 || cols < 0 ||
      static_cast<std::size_t>(rows) * cols != data.size()) {
    throw ModelFormatError("model field '" + name + "' has inconsistent size");
  }
  Eigen::MatrixXd out(rows, cols);
  std::size_t q = 0;
  for (int i = 0; i < rows; ++i) {
    for (int j2 = 0; j2 < cols; ++j2) out(i, j2) = data[q++].get<double>();
  }
  return out;
}

Interval read_interval(const json& j, const std::string& name) {
  if (!j.is_array() || j.size() != 2) {
    throw ModelFormatError("range '" + name + "' must be a [lo, hi] pair");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

std::vector<Interval> read_intervals(const json& j, const std::string& name) {
  std::vector<Interval> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(read_interval(j[i], name));
  }
  return out;
}

const json& field(const json& j, const char* name) {
  const auto it = j.find(name);
  if (it == j.end()) {
    throw ModelFormatError(std::string("model is missing field '") + name +
                           "'");
  }
  return *it;
}

json dump_config(const ProblemConfig& c) {
  json freq{{"omega_b0", c.freq.omega_b0}, {"omega_b1", c.freq.omega_b1},
            {"omega_u0", c.freq.omega_u0}, {"omega_fT", c.freq.omega_fT},
            {"omega_fS", c.freq.omega_fS}};
  json amp_f = json::array();
  for (const auto& row : c.ranges.amp_f) amp_f.push_back(dump_intervals(row));
  json ranges{{"nu", dump_interval(c.ranges.nu)},
              {"f_m", dump_interval(c.ranges.f_m)},
              {"u0m", dump_interval(c.ranges.u0m)},
              {"amp_b0", dump_intervals(c.ranges.amp_b0)},
              {"amp_b1", dump_intervals(c.ranges.amp_b1)},
              {"amp_u0", dump_intervals(c.ranges.amp_u0)},
              {"amp_f", amp_f}};
  json rb{{"basis_size", c.rb.basis_size},
          {"snapshot_count", c.rb.snapshot_count},
          {"greedy_candidates", c.rb.greedy_candidates},
          {"enrich", c.rb.enrich},
          {"sweep_min", c.rb.sweep_min},
          {"sweep_max", c.rb.sweep_max},
          {"benchmark_samples", c.rb.benchmark_samples},
          {"seed", c.rb.seed}};
  json scm{{"constraint_count", c.scm.constraint_count},
           {"nearest_count", c.scm.nearest_count},
           {"sample_size", c.scm.sample_size},
           {"sharpness_tol", c.scm.sharpness_tol},
           {"seed", c.scm.seed}};
  return json{{"num_intervals", c.num_intervals},
              {"dt", c.dt},
              {"horizon", c.horizon},
              {"penalty", c.penalty},
              {"newton_tol", c.newton_tol},
              {"newton_cap", c.newton_cap},
              {"seed", c.seed},
              {"freq", freq},
              {"ranges", ranges},
              {"rb", rb},
              {"scm", scm}};
}

ProblemConfig read_config(const json& j) {
  ProblemConfig c;
  c.num_intervals = field(j, "num_intervals").get<int>();
  c.dt = field(j, "dt").get<double>();
  c.horizon = field(j, "horizon").get<double>();
  c.penalty = field(j, "penalty").get<double>();
  c.newton_tol = field(j, "newton_tol").get<double>();
  c.newton_cap = field(j, "newton_cap").get<int>();
  c.seed = field(j, "seed").get<std::uint64_t>();

  const json& freq = field(j, "freq");
  c.freq.omega_b0 = field(freq, "omega_b0").get<std::vector<double>>();
  c.freq.omega_b1 = field(freq, "omega_b1").get<std::vector<double>>();
  c.freq.omega_u0 = field(freq, "omega_u0").get<std::vector<double>>();
  c.freq.omega_fT = field(freq, "omega_fT").get<std::vector<double>>();
  c.freq.omega_fS = field(freq, "omega_fS").get<std::vector<double>>();

  const json& ranges = field(j, "ranges");
  c.ranges.nu = read_interval(field(ranges, "nu"), "nu");
  c.ranges.f_m = read_interval(field(ranges, "f_m"), "f_m");
  c.ranges.u0m = read_interval(field(ranges, "u0m"), "u0m");
  c.ranges.amp_b0 = read_intervals(field(ranges, "amp_b0"), "amp_b0");
  c.ranges.amp_b1 = read_intervals(field(ranges, "amp_b1"), "amp_b1");
  c.ranges.amp_u0 = read_intervals(field(ranges, "amp_u0"), "amp_u0");
  c.ranges.amp_f.clear();
  for (const json& row : field(ranges, "amp_f")) {
    c.ranges.amp_f.push_back(read_intervals(row, "amp_f"));
  }

  const json& rb = field(j, "rb");
  c.rb.basis_size = field(rb, "basis_size").get<int>();
  c.rb.snapshot_count = field(rb, "snapshot_count").get<int>();
  c.rb.greedy_candidates = field(rb, "greedy_candidates").get<int>();
  c.rb.enrich = field(rb, "enrich").get<bool>();
  c.rb.sweep_min = field(rb, "sweep_min").get<int>();
  c.rb.sweep_max = field(rb, "sweep_max").get<int>();
  c.rb.benchmark_samples = field(rb, "benchmark_samples").get<int>();
  c.rb.seed = field(rb, "seed").get<std::uint64_t>();

  const json& scm = field(j, "scm");
  c.scm.constraint_count = field(scm, "constraint_count").get<int>();
  c.scm.nearest_count = field(scm, "nearest_count").get<int>();
  c.scm.sample_size = field(scm, "sample_size").get<int>();
  c.scm.sharpness_tol = field(scm, "sharpness_tol").get<double>();
  c.scm.seed = field(scm, "seed").get<std::uint64_t>();
  return c;
}

}  // namespace

std::string serialize_model(const ReducedModel& model) {
  const OnlineData& d = model.online;
  json aux{{"hat_norm", d.aux.hat_norm},
           {"node_dual", d.aux.node_dual},
           {"load_const", dump_vector(d.aux.load_const)},
           {"load_sin", dump_matrix(d.aux.load_sin)},
           {"mass_bnd", dump_matrix(d.aux.mass_bnd)},
           {"stiff_bnd", dump_matrix(d.aux.stiff_bnd)},
           {"tri_bnd0", dump_matrix(d.aux.tri_bnd0)},
           {"tri_bnd1", dump_matrix(d.aux.tri_bnd1)},
           {"tri_pair", dump_matrix(d.aux.tri_pair)},
           {"stiff_pair", dump_vector(d.aux.stiff_pair)}};

  json constraints = json::array();
  for (const ScmConstraint& con : d.scm.constraints) {
    constraints.push_back(json{{"k", con.k},
                               {"mu_coords", dump_vector(con.mu_coords)},
                               {"c_value", con.c_value},
                               {"y_star", dump_vector(con.y_star)},
                               {"state", dump_vector(con.state)},
                               {"nu", con.nu}});
  }
  json scm{{"sigma_lo", dump_vector(d.scm.sigma.lo)},
           {"sigma_hi", dump_vector(d.scm.sigma.hi)},
           {"nearest_count", d.scm.nearest_count},
           {"coord_spans", dump_vector(d.scm.coord_spans)},
           {"num_steps", d.scm.num_steps},
           {"constraints", constraints}};

  json red_tri = json::array();
  for (const Eigen::MatrixXd& m : d.red_tri) red_tri.push_back(dump_matrix(m));

  json online{{"dt", d.dt},
              {"num_steps", d.num_steps},
              {"penalty", d.penalty},
              {"newton_tol", d.newton_tol},
              {"newton_cap", d.newton_cap},
              {"basis_size", d.basis_size},
              {"red_mass", dump_matrix(d.red_mass)},
              {"red_stiff", dump_matrix(d.red_stiff)},
              {"red_bpen", dump_matrix(d.red_bpen)},
              {"red_tri", red_tri},
              {"red_beta0", dump_vector(d.red_beta0)},
              {"red_beta1", dump_vector(d.red_beta1)},
              {"red_int", dump_vector(d.red_int)},
              {"red_fsin", dump_matrix(d.red_fsin)},
              {"proj_one", dump_vector(d.proj_one)},
              {"proj_u0sin", dump_matrix(d.proj_u0sin)},
              {"zeta_at_0", dump_vector(d.zeta_at_0)},
              {"zeta_at_1", dump_vector(d.zeta_at_1)},
              {"aux", aux},
              {"init_gram", dump_matrix(d.init_gram)},
              {"res_gram", dump_matrix(d.res_gram)},
              {"scm", scm}};

  json doc{{"format", kFormatName},
           {"version", kFormatVersion},
           {"config", dump_config(model.config)},
           {"basis", json{{"enriched_count", model.basis.enriched_count},
                          {"vectors", dump_matrix(model.basis.vectors)}}},
           {"online", online}};
  return doc.dump();
}

ReducedModel deserialize_model(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ModelFormatError(std::string("model file is not valid JSON: ") +
                           e.what());
  }
  if (!doc.is_object() || field(doc, "format").get<std::string>() !=
                              kFormatName) {
    throw ModelFormatError("not a " + std::string(kFormatName) + " file");
  }
  if (field(doc, "version").get<int>() != kFormatVersion) {
    throw ModelFormatError(
        "unsupported model version " +
        std::to_string(field(doc, "version").get<int>()));
  }

  ReducedModel model;
  model.config = read_config(field(doc, "config"));

  const json& basis = field(doc, "basis");
  model.basis.enriched_count = field(basis, "enriched_count").get<int>();
  model.basis.vectors = read_matrix(field(basis, "vectors"), "basis.vectors");

  const json& online = field(doc, "online");
  OnlineData& d = model.online;
  d.freq = model.config.freq;
  d.dt = field(online, "dt").get<double>();
  d.num_steps = field(online, "num_steps").get<int>();
  d.penalty = field(online, "penalty").get<double>();
  d.newton_tol = field(online, "newton_tol").get<double>();
  d.newton_cap = field(online, "newton_cap").get<int>();
  d.basis_size = field(online, "basis_size").get<int>();
  d.red_mass = read_matrix(field(online, "red_mass"), "red_mass");
  d.red_stiff = read_matrix(field(online, "red_stiff"), "red_stiff");
  d.red_bpen = read_matrix(field(online, "red_bpen"), "red_bpen");
  d.red_tri.clear();
  for (const json& m : field(online, "red_tri")) {
    d.red_tri.push_back(read_matrix(m, "red_tri"));
  }
  d.red_beta0 = read_vector(field(online, "red_beta0"), "red_beta0");
  d.red_beta1 = read_vector(field(online, "red_beta1"), "red_beta1");
  d.red_int = read_vector(field(online, "red_int"), "red_int");
  d.red_fsin = read_matrix(field(online, "red_fsin"), "red_fsin");
  d.proj_one = read_vector(field(online, "proj_one"), "proj_one");
  d.proj_u0sin = read_matrix(field(online, "proj_u0sin"), "proj_u0sin");
  d.zeta_at_0 = read_vector(field(online, "zeta_at_0"), "zeta_at_0");
  d.zeta_at_1 = read_vector(field(online, "zeta_at_1"), "zeta_at_1");

  const json& aux = field(online, "aux");
  d.aux.hat_norm = field(aux, "hat_norm").get<double>();
  d.aux.node_dual = field(aux, "node_dual").get<double>();
  const Eigen::VectorXd load_const =
      read_vector(field(aux, "load_const"), "load_const");
  if (load_const.size() != 2) {
    throw ModelFormatError("aux.load_const must have two entries");
  }
  d.aux.load_const = load_const;
  d.aux.load_sin = read_matrix(field(aux, "load_sin"), "load_sin");
  d.aux.mass_bnd = read_matrix(field(aux, "mass_bnd"), "mass_bnd");
  d.aux.stiff_bnd = read_matrix(field(aux, "stiff_bnd"), "stiff_bnd");
  d.aux.tri_bnd0 = read_matrix(field(aux, "tri_bnd0"), "tri_bnd0");
  d.aux.tri_bnd1 = read_matrix(field(aux, "tri_bnd1"), "tri_bnd1");
  d.aux.tri_pair = read_matrix(field(aux, "tri_pair"), "tri_pair");
  d.aux.stiff_pair = read_vector(field(aux, "stiff_pair"), "stiff_pair");

  d.init_gram = read_matrix(field(online, "init_gram"), "init_gram");
  d.res_gram = read_matrix(field(online, "res_gram"), "res_gram");

  const json& scm = field(online, "scm");
  d.scm.sigma.lo = read_vector(field(scm, "sigma_lo"), "sigma_lo");
  d.scm.sigma.hi = read_vector(field(scm, "sigma_hi"), "sigma_hi");
  d.scm.nearest_count = field(scm, "nearest_count").get<int>();
  d.scm.coord_spans = read_vector(field(scm, "coord_spans"), "coord_spans");
  d.scm.num_steps = field(scm, "num_steps").get<int>();
  d.scm.constraints.clear();
  for (const json& c : field(scm, "constraints")) {
    ScmConstraint con;
    con.k = field(c, "k").get<int>();
    con.mu_coords = read_vector(field(c, "mu_coords"), "constraint.mu_coords");
    con.c_value = field(c, "c_value").get<double>();
    con.y_star = read_vector(field(c, "y_star"), "constraint.y_star");
    con.state = read_vector(field(c, "state"), "constraint.state");
    con.nu = field(c, "nu").get<double>();
    d.scm.constraints.push_back(std::move(con));
  }

  // Structural validation: every tensor must match the declared sizes.
  const int n = d.basis_size;
  const int dim = model.config.num_intervals + 1;
  const int n_fs = d.freq.n_fS();
  const int n_u0 = d.freq.n_u0();
  const auto expect = [](bool ok, const char* what) {
    if (!ok) {
      throw ModelFormatError(std::string("model structure mismatch: ") + what);
    }
  };
  expect(n >= 1, "basis_size must be positive");
  expect(model.basis.vectors.rows() == dim &&
             model.basis.vectors.cols() == n,
         "basis shape");
  expect(d.red_mass.rows() == n && d.red_mass.cols() == n, "red_mass shape");
  expect(d.red_stiff.rows() == n && d.red_stiff.cols() == n,
         "red_stiff shape");
  expect(d.red_bpen.rows() == n && d.red_bpen.cols() == n, "red_bpen shape");
  expect(static_cast<int>(d.red_tri.size()) == n, "red_tri count");
  for (const Eigen::MatrixXd& m : d.red_tri) {
    expect(m.rows() == n && m.cols() == n, "red_tri block shape");
  }
  expect(d.red_beta0.size() == n && d.red_beta1.size() == n,
         "boundary load shape");
  expect(d.red_int.size() == n, "red_int shape");
  expect(d.red_fsin.rows() == n_fs && d.red_fsin.cols() == n,
         "red_fsin shape");
  expect(d.proj_one.size() == n, "proj_one shape");
  expect(d.proj_u0sin.rows() == n_u0 && d.proj_u0sin.cols() == n,
         "proj_u0sin shape");
  expect(d.zeta_at_0.size() == n && d.zeta_at_1.size() == n,
         "boundary trace shape");
  expect(d.aux.load_sin.rows() == n_fs && d.aux.load_sin.cols() == 2,
         "aux.load_sin shape");
  expect(d.aux.mass_bnd.rows() == n && d.aux.mass_bnd.cols() == 2,
         "aux.mass_bnd shape");
  expect(d.aux.stiff_bnd.rows() == n && d.aux.stiff_bnd.cols() == 2,
         "aux.stiff_bnd shape");
  expect(d.aux.tri_bnd0.rows() == n && d.aux.tri_bnd0.cols() == n,
         "aux.tri_bnd0 shape");
  expect(d.aux.tri_bnd1.rows() == n && d.aux.tri_bnd1.cols() == n,
         "aux.tri_bnd1 shape");
  expect(d.aux.tri_pair.rows() == n && d.aux.tri_pair.cols() == 6,
         "aux.tri_pair shape");
  expect(d.aux.stiff_pair.size() == 6, "aux.stiff_pair shape");
  expect(d.init_gram.rows() == 1 + n_u0 && d.init_gram.cols() == 1 + n_u0,
         "init_gram shape");
  const int q = 1 + n_fs + 2 * n + n * n;
  expect(d.res_gram.rows() == q && d.res_gram.cols() == q, "res_gram shape");
  expect(d.scm.sigma.lo.size() == n + 1 && d.scm.sigma.hi.size() == n + 1,
         "scm sigma shape");
  expect(d.scm.coord_spans.size() == d.freq.free_dim(), "scm span shape");
  expect(d.scm.num_steps == d.num_steps, "scm step count");
  for (const ScmConstraint& con : d.scm.constraints) {
    expect(con.k >= 1 && con.k <= d.num_steps, "constraint time index");
    expect(con.mu_coords.size() == d.freq.free_dim(),
           "constraint coordinate count");
    expect(con.y_star.size() == n + 1, "constraint y* shape");
    expect(con.state.size() == n, "constraint state shape");
  }
  expect(model.basis.enriched_count >= 0 && model.basis.enriched_count <= n,
         "enriched mode count");

  return model;
}

void save_model(const ReducedModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ModelFormatError("cannot open '" + path + "' for writing");
  }
  out << serialize_model(model);
  out.close();
  if (!out) {
    throw ModelFormatError("failed writing model to '" + path + "'");
  }
}

ReducedModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ModelFormatError("cannot open model file '" + path + "'");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return deserialize_model(buffer.str());
}

bool compatible_configs(const ProblemConfig& a, const ProblemConfig& b) {
  const auto same_intervals = [](const std::vector<Interval>& x,
                                 const std::vector<Interval>& y) {
    if (x.size() != y.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i].lo != y[i].lo || x[i].hi != y[i].hi) return false;
    }
    return true;
  };
  if (a.num_intervals != b.num_intervals || a.dt != b.dt ||
      a.horizon != b.horizon || a.penalty != b.penalty ||
      a.newton_tol != b.newton_tol || a.newton_cap != b.newton_cap) {
    return false;
  }
  if (!(a.freq == b.freq)) return false;
  const ParameterRanges& ra = a.ranges;
  const ParameterRanges& rb = b.ranges;
  if (ra.nu.lo != rb.nu.lo || ra.nu.hi != rb.nu.hi ||
      ra.f_m.lo != rb.f_m.lo || ra.f_m.hi != rb.f_m.hi ||
      ra.u0m.lo != rb.u0m.lo || ra.u0m.hi != rb.u0m.hi) {
    return false;
  }
  if (!same_intervals(ra.amp_b0, rb.amp_b0) ||
      !same_intervals(ra.amp_b1, rb.amp_b1) ||
      !same_intervals(ra.amp_u0, rb.amp_u0)) {
    return false;
  }
  if (ra.amp_f.size() != rb.amp_f.size()) return false;
  for (std::size_t l = 0; l < ra.amp_f.size(); ++l) {
    if (!same_intervals(ra.amp_f[l], rb.amp_f[l])) return false;
  }
  return true;
}

}  // namespace burgers_rb
