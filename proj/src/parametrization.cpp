#include "burgers_rb/parametrization.hpp"

#include <cmath>
#include <random>

namespace burgers_rb {

std::string coordinate_name(const FrequencyStructure& freq, int i) {
  if (i == 0) return "nu";
  if (i == 1) return "f_m";
  if (i == 2) return "u0m";
  int k = i - 3;
  if (k < freq.n_b0()) return "amp_b0[" + std::to_string(k + 1) + "]";
  k -= freq.n_b0();
  if (k < freq.n_b1()) return "amp_b1[" + std::to_string(k + 1) + "]";
  k -= freq.n_b1();
  if (k < freq.n_fT() * freq.n_fS()) {
    const int l = k / freq.n_fS(), p = k % freq.n_fS();
    return "amp_f[" + std::to_string(l + 1) + "][" + std::to_string(p + 1) +
           "]";
  }
  k -= freq.n_fT() * freq.n_fS();
  if (k < freq.n_u0()) return "amp_u0[" + std::to_string(k + 1) + "]";
  throw ParameterError("coordinate_name: index out of range");
}

std::vector<Interval> flatten_ranges(const FrequencyStructure& freq,
                                     const ParameterRanges& ranges) {
  auto fail = [](const std::string& what) {
    throw ParameterError("flatten_ranges: ranges do not match frequency "
                         "structure for " +
                         what);
  };
  if (static_cast<int>(ranges.amp_b0.size()) != freq.n_b0()) fail("amp_b0");
  if (static_cast<int>(ranges.amp_b1.size()) != freq.n_b1()) fail("amp_b1");
  if (static_cast<int>(ranges.amp_u0.size()) != freq.n_u0()) fail("amp_u0");
  if (static_cast<int>(ranges.amp_f.size()) != freq.n_fT()) fail("amp_f");
  for (const auto& row : ranges.amp_f) {
    if (static_cast<int>(row.size()) != freq.n_fS()) fail("amp_f");
  }

  std::vector<Interval> box;
  box.reserve(freq.free_dim());
  box.push_back(ranges.nu);
  box.push_back(ranges.f_m);
  box.push_back(ranges.u0m);
  for (const auto& iv : ranges.amp_b0) box.push_back(iv);
  for (const auto& iv : ranges.amp_b1) box.push_back(iv);
  for (const auto& row : ranges.amp_f)
    for (const auto& iv : row) box.push_back(iv);
  for (const auto& iv : ranges.amp_u0) box.push_back(iv);

  for (int i = 0; i < static_cast<int>(box.size()); ++i) {
    if (!(box[i].lo <= box[i].hi)) {
      throw ParameterError("flatten_ranges: empty interval for coordinate " +
                           coordinate_name(freq, i));
    }
  }
  return box;
}

ParameterPoint make_parameter_point(const FrequencyStructure& freq,
                                    const ParameterRanges& ranges,
                                    const Eigen::VectorXd& coords) {
  const std::vector<Interval> box = flatten_ranges(freq, ranges);
  if (coords.size() != static_cast<int>(box.size())) {
    throw ParameterError("make_parameter_point: expected " +
                         std::to_string(box.size()) + " coordinates, got " +
                         std::to_string(coords.size()));
  }
  for (int i = 0; i < coords.size(); ++i) {
    if (coords(i) < box[i].lo || coords(i) > box[i].hi) {
      throw ParameterError("make_parameter_point: coordinate " +
                           coordinate_name(freq, i) + " = " +
                           std::to_string(coords(i)) + " outside [" +
                           std::to_string(box[i].lo) + ", " +
                           std::to_string(box[i].hi) + "]");
    }
  }

  ParameterPoint mu;
  mu.free_coords = coords;
  int k = 0;
  mu.nu = coords(k++);
  mu.f_m = coords(k++);
  mu.u0m = coords(k++);
  mu.amp_b0 = coords.segment(k, freq.n_b0());
  k += freq.n_b0();
  mu.amp_b1 = coords.segment(k, freq.n_b1());
  k += freq.n_b1();
  mu.amp_f.resize(freq.n_fT(), freq.n_fS());
  for (int l = 0; l < freq.n_fT(); ++l)
    for (int p = 0; p < freq.n_fS(); ++p) mu.amp_f(l, p) = coords(k++);
  mu.amp_u0 = coords.segment(k, freq.n_u0());

  // Compatibility pins the boundary means to the initial condition.
  mu.b0_mean = mu.u0m;
  mu.b1_mean = mu.u0m;
  for (int l = 0; l < freq.n_u0(); ++l) {
    mu.b1_mean += mu.amp_u0(l) * std::sin(freq.omega_u0[l]);
  }
  return mu;
}

double DataFunctions::boundary0(double t) const {
  double s = mu_.b0_mean;
  for (int l = 0; l < freq_.n_b0(); ++l) {
    s += mu_.amp_b0(l) * std::sin(freq_.omega_b0[l] * t);
  }
  return s;
}

double DataFunctions::boundary1(double t) const {
  double s = mu_.b1_mean;
  for (int l = 0; l < freq_.n_b1(); ++l) {
    s += mu_.amp_b1(l) * std::sin(freq_.omega_b1[l] * t);
  }
  return s;
}

double DataFunctions::source(double t, double x) const {
  double s = mu_.f_m;
  for (int l = 0; l < freq_.n_fT(); ++l) {
    const double st = std::sin(freq_.omega_fT[l] * t);
    for (int p = 0; p < freq_.n_fS(); ++p) {
      s += mu_.amp_f(l, p) * st * std::sin(freq_.omega_fS[p] * x);
    }
  }
  return s;
}

double DataFunctions::initial(double x) const {
  double s = mu_.u0m;
  for (int l = 0; l < freq_.n_u0(); ++l) {
    s += mu_.amp_u0(l) * std::sin(freq_.omega_u0[l] * x);
  }
  return s;
}

std::vector<ParameterPoint> sample_parameters(const FrequencyStructure& freq,
                                              const ParameterRanges& ranges,
                                              int count, std::uint64_t seed) {
  if (count < 0) throw ParameterError("sample_parameters: negative count");
  const std::vector<Interval> box = flatten_ranges(freq, ranges);
  std::mt19937_64 gen(seed);
  auto unit = [&gen]() {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
  };

  std::vector<ParameterPoint> sample;
  sample.reserve(count);
  Eigen::VectorXd coords(box.size());
  for (int s = 0; s < count; ++s) {
    for (int i = 0; i < static_cast<int>(box.size()); ++i) {
      coords(i) = box[i].lo + unit() * box[i].span();
    }
    sample.push_back(make_parameter_point(freq, ranges, coords));
  }
  return sample;
}

}  // namespace burgers_rb
