#include "headline/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace headline::ad {

namespace {

double evaluate_loss(const LossBuilder& build_loss, const std::map<std::string, Tensor>& params) {
  Tape tape;
  ParameterVars vars;
  for (const auto& [name, value] : params) vars.emplace(name, tape.parameter(name, value));
  return build_loss(tape, vars).value().item();
}

}  // namespace

GradCheckResult grad_check(const LossBuilder& build_loss, const std::map<std::string, Tensor>& params,
                           double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("grad_check: eps must be positive");

  GradientMap analytic;
  {
    Tape tape;
    ParameterVars vars;
    for (const auto& [name, value] : params) vars.emplace(name, tape.parameter(name, value));
    analytic = tape.backward(build_loss(tape, vars));
  }

  GradCheckResult result;
  auto perturbed = params;
  for (const auto& [name, value] : params) {
    const Tensor& grad = analytic.at(name);
    std::vector<double> data(value.data().begin(), value.data().end());
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double original = data[i];
      data[i] = original + eps;
      perturbed[name] = Tensor(value.shape(), data);
      const double plus = evaluate_loss(build_loss, perturbed);
      data[i] = original - eps;
      perturbed[name] = Tensor(value.shape(), data);
      const double minus = evaluate_loss(build_loss, perturbed);
      data[i] = original;

      const double numeric = (plus - minus) / (2.0 * eps);
      const double a = grad[i];
      const double err = std::abs(a - numeric) / std::max({1.0, std::abs(a), std::abs(numeric)});
      ++result.elements_checked;
      if (err > result.max_relative_error || result.worst_parameter.empty()) {
        result.max_relative_error = std::max(err, result.max_relative_error);
        if (err >= result.max_relative_error) {
          result.worst_parameter = name;
          result.worst_index = i;
          result.analytic = a;
          result.numeric = numeric;
        }
      }
    }
    perturbed[name] = value;
  }
  return result;
}

}  // namespace headline::ad
