#ifndef BURGERS_RB_MODEL_IO_HPP
#define BURGERS_RB_MODEL_IO_HPP

#include <stdexcept>
#include <string>

#include "burgers_rb/reduced_basis.hpp"

// Serialization of a trained ReducedModel to a self-describing versioned
// JSON document ("burgers-rb-model", version 1). The file carries a full
// echo of the configuration it was built from, the basis, every online
// tensor and the stability training points, so a deserialized model answers
// queries without touching any mesh-sized assembly. Doubles survive a
// save/load round trip bit-exactly.

namespace burgers_rb {

struct ModelFormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string serialize_model(const ReducedModel& model);
ReducedModel deserialize_model(const std::string& text);

void save_model(const ReducedModel& model, const std::string& path);
ReducedModel load_model(const std::string& path);

// True when two configurations describe the same discrete problem and
// parameter domain (mesh, time grid, penalty, Newton controls, frequencies
// and ranges). Offline knobs (rb.*, scm.*) and sampling seeds may differ.
bool compatible_configs(const ProblemConfig& a, const ProblemConfig& b);

}  // namespace burgers_rb

#endif
