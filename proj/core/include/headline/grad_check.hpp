#pragma once

#include <functional>
#include <map>
#include <string>

#include "headline/autodiff.hpp"

namespace headline::ad {

using ParameterVars = std::map<std::string, Var>;

/// Builds a scalar loss on `tape` from the supplied parameter leaves. Must be
/// deterministic: it is re-run once per perturbed element.
using LossBuilder = std::function<Var(Tape& tape, const ParameterVars& params)>;

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t elements_checked = 0;
};

/// Compares backward() against central differences for every element of
/// every parameter. Relative error is |a - b| / max(1, |a|, |b|).
GradCheckResult grad_check(const LossBuilder& build_loss, const std::map<std::string, Tensor>& params,
                           double eps);

}  // namespace headline::ad
