#ifndef KSPM_PARAMS_HPP
#define KSPM_PARAMS_HPP

#include <cmath>
#include <string>
#include <vector>

#include "kspm/errors.hpp"

namespace kspm {

/// Coefficients of the Ito-form chemotaxis system
///   du = (r_u lap(u^[gamma]) - chi div(eta grad v) + mu u) dt + sigma_u u dW1
///   dv = (r_v lap(v) + beta eta - alpha v) dt + sigma_v v dW2
struct ModelParams {
  double r_u = 1.0;
  double r_v = 1.0;
  double chi = 1.0;
  double alpha = 0.0;
  double beta = 0.0;
  double sigma_u = 0.0;
  double sigma_v = 0.0;
  double gamma = 2.0;

  /// Every violated sign constraint, empty when valid.
  std::vector<std::string> violations() const {
    std::vector<std::string> out;
    auto finite = [&](double v, const char* name) {
      if (!std::isfinite(v)) out.push_back(std::string(name) + " must be finite");
      return std::isfinite(v);
    };
    if (finite(r_u, "r_u") && !(r_u > 0.0)) out.emplace_back("r_u must be positive");
    if (finite(r_v, "r_v") && !(r_v > 0.0)) out.emplace_back("r_v must be positive");
    if (finite(chi, "chi") && !(chi >= 0.0)) out.emplace_back("chi must be nonnegative");
    if (finite(alpha, "alpha") && !(alpha >= 0.0)) out.emplace_back("alpha must be nonnegative");
    if (finite(beta, "beta") && !(beta >= 0.0)) out.emplace_back("beta must be nonnegative");
    if (finite(sigma_u, "sigma_u") && !(sigma_u >= 0.0)) out.emplace_back("sigma_u must be nonnegative");
    if (finite(sigma_v, "sigma_v") && !(sigma_v >= 0.0)) out.emplace_back("sigma_v must be nonnegative");
    if (finite(gamma, "gamma") && !(gamma > 1.0)) out.emplace_back("gamma must exceed 1");
    return out;
  }

  void validate() const {
    const auto v = violations();
    if (!v.empty()) throw InvalidArgument("invalid model parameters: " + v.front());
  }

  /// Regime in which the solution operator is known to map a ball into itself.
  bool self_mapping_regime() const noexcept { return gamma > 3.0; }
};

}  // namespace kspm

#endif  // KSPM_PARAMS_HPP
