#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "aircast/autodiff.hpp"
#include "aircast/dataset.hpp"

namespace aircast {

struct Model;

struct GradCheckConfig {
  double step = 1e-5;       // central-difference half step
  double tolerance = 1e-4;  // max acceptable relative error
  Index max_coords = 200;   // coordinates sampled when params are larger
  std::uint64_t seed = 0;   // drives coordinate sampling and dropout masks
};

struct GradCheckCoord {
  std::string param_id;
  Index coord = 0;  // flat offset within the parameter
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_error = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckCoord> coords;
  Index total_coords = 0;  // coordinates the parameters expose in total
  double max_rel_error = 0.0;
  double tolerance = 0.0;
  bool passed = false;

  const GradCheckCoord* worst() const;
};

// Evaluates the scalar loss at the current parameter values. When with_grads
// is set the callee must leave d(loss)/d(param) in each Parameter::grad and
// may not depend on hidden state that varies between calls.
using LossFn = std::function<double(std::vector<Parameter>& params, bool with_grads)>;

// Compares analytic gradients against central differences
// (f(x+h) - f(x-h)) / 2h on up to max_coords coordinates, chosen without
// replacement when the parameters expose more. Relative error per coordinate
// is |a - n| / max(1, |a|, |n|).
GradCheckReport finite_diff_check(std::vector<Parameter>& params, const LossFn& loss,
                                  const GradCheckConfig& config = {});

// Mean cross-entropy of the model over the batch, dropout active and
// re-seeded identically for every evaluation.
GradCheckReport check_gradients(Model& model, const std::vector<Sample>& batch,
                                const GradCheckConfig& config = {});

}  // namespace aircast
