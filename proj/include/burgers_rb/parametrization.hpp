#ifndef BURGERS_RB_PARAMETRIZATION_HPP
#define BURGERS_RB_PARAMETRIZATION_HPP

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

// Parametrization of the Burgers problem data. Boundary values, source and
// initial condition are truncated sine expansions around a mean:
//
//   b_0(t)  = b0_mean + sum_l A^{b0}_l sin(omega^{b0}_l t)
//   b_1(t)  = b1_mean + sum_l A^{b1}_l sin(omega^{b1}_l t)
//   f(t,x)  = f_m + sum_{l,p} A^f_{lp} sin(omega^{fT}_l t) sin(omega^{fS}_p x)
//   u_0(x)  = u0_mean + sum_l A^{u0}_l sin(omega^{u0}_l x)
//
// The means of the boundary data are not free: they are pinned by the
// compatibility conditions b_0(0) = u_0(0) and b_1(0) = u_0(1), i.e.
// b0_mean = u0_mean and b1_mean = u0_mean + sum_l A^{u0}_l sin(omega^{u0}_l).
// The free coordinates of a parameter point are therefore
//   (nu, f_m, u0_mean, A^{b0}, A^{b1}, A^f (row-major), A^{u0}).

namespace burgers_rb {

struct ParameterError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Fixed frequencies of the sine expansions; cardinalities define how many
// amplitude coordinates each data function contributes.
struct FrequencyStructure {
  std::vector<double> omega_b0, omega_b1, omega_u0, omega_fT, omega_fS;

  int n_b0() const { return static_cast<int>(omega_b0.size()); }
  int n_b1() const { return static_cast<int>(omega_b1.size()); }
  int n_u0() const { return static_cast<int>(omega_u0.size()); }
  int n_fT() const { return static_cast<int>(omega_fT.size()); }
  int n_fS() const { return static_cast<int>(omega_fS.size()); }

  // Number of free parameter coordinates: nu, f_m, u0_mean plus amplitudes.
  int free_dim() const {
    return 3 + n_b0() + n_b1() + n_fT() * n_fS() + n_u0();
  }

  bool operator==(const FrequencyStructure&) const = default;
};

struct Interval {
  double lo = 0.0, hi = 0.0;
  double span() const { return hi - lo; }
};

// Admissible box for the free coordinates.
struct ParameterRanges {
  Interval nu, f_m, u0m;
  std::vector<Interval> amp_b0, amp_b1, amp_u0;
  std::vector<std::vector<Interval>> amp_f;  // [l][p]
};

// Name of the i-th free coordinate in canonical order ("nu", "f_m", "u0m",
// "amp_b0[1]", ..., "amp_f[1][1]", ..., "amp_u0[1]", ...). Indices 1-based.
std::string coordinate_name(const FrequencyStructure& freq, int i);

// Canonical flattening of the box; throws ParameterError when the ranges do
// not have exactly one interval per frequency entry.
std::vector<Interval> flatten_ranges(const FrequencyStructure& freq,
                                     const ParameterRanges& ranges);

// A single admissible parameter point with the derived boundary means.
struct ParameterPoint {
  double nu = 0.0, f_m = 0.0, u0m = 0.0;
  double b0_mean = 0.0, b1_mean = 0.0;  // derived from compatibility
  Eigen::VectorXd amp_b0, amp_b1, amp_u0;
  Eigen::MatrixXd amp_f;          // n_fT x n_fS
  Eigen::VectorXd free_coords;    // canonical packed copy
};

// Unpacks canonical coordinates and validates them against the box (closed
// intervals). Throws ParameterError naming the violated coordinate.
ParameterPoint make_parameter_point(const FrequencyStructure& freq,
                                    const ParameterRanges& ranges,
                                    const Eigen::VectorXd& coords);

// Callable bundle for the data functions of one parameter point.
class DataFunctions {
 public:
  DataFunctions(const ParameterPoint& mu, const FrequencyStructure& freq)
      : mu_(mu), freq_(freq) {}

  double boundary0(double t) const;
  double boundary1(double t) const;
  double source(double t, double x) const;
  double initial(double x) const;

 private:
  ParameterPoint mu_;
  FrequencyStructure freq_;
};

// Deterministic uniform sampling of the box: a fixed seed yields a
// reproducible sequence independent of the standard library's distribution
// implementation (raw mt19937_64 bits mapped to [0,1)).
std::vector<ParameterPoint> sample_parameters(const FrequencyStructure& freq,
                                              const ParameterRanges& ranges,
                                              int count, std::uint64_t seed);

// Allocation-free scalar evaluations of the boundary data, for hot loops
// that cannot afford a DataFunctions instance per call.
inline double boundary0_value(const ParameterPoint& mu,
                              const FrequencyStructure& freq, double t) {
  double b = mu.b0_mean;
  for (std::size_t l = 0; l < freq.omega_b0.size(); ++l) {
    b += mu.amp_b0(static_cast<int>(l)) * std::sin(freq.omega_b0[l] * t);
  }
  return b;
}

inline double boundary1_value(const ParameterPoint& mu,
                              const FrequencyStructure& freq, double t) {
  double b = mu.b1_mean;
  for (std::size_t l = 0; l < freq.omega_b1.size(); ++l) {
    b += mu.amp_b1(static_cast<int>(l)) * std::sin(freq.omega_b1[l] * t);
  }
  return b;
}

}  // namespace burgers_rb

#endif
