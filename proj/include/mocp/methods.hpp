#pragma once

#include "mocp/copula.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mocp {

struct MethodParams
{
  double alpha = 0.2;
  MonteCarloParams mc;
  CopulaConfig copula;
  //! Draws used for empirical marginal quantiles when the model has no
  //! closed form (M-CP and CopulaCPTS).
  Index quantile_fallback = 100;
};

//! Canonical method names in registry order.
const std::vector<std::string>& method_names();

bool is_method(const std::string& name);

//! Capabilities `name` needs from `model`; empty string if satisfied,
//! otherwise a short reason such as "sampler required".
std::string incompatibility(const std::string& name, const BasePredictor& model);

//! Conformity score behind a split-conformal method (every method except
//! copula_cpts).
ScorePtr make_score(const std::string& name,
                    const ModelPtr& model,
                    const MethodParams& params,
                    const std::optional<MonotoneTransform>& transform = std::nullopt);

MethodPtr make_method(const std::string& name,
                      const ModelPtr& model,
                      const MethodParams& params,
                      const std::optional<MonotoneTransform>& transform = std::nullopt);

} // namespace mocp
