#include "mocp/methods.hpp"

#include <algorithm>

namespace mocp {

const std::vector<std::string>& method_names()
{
  static const std::vector<std::string> names{ "m_cp", "copula_cpts", "dr_cp", "c_hdr", "pcp",
                                               "hd_pcp", "stdqr", "c_pcp", "l_cp", "cp2_pcp" };
  return names;
}

bool is_method(const std::string& name)
{
  const auto& names = method_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

namespace {

Capabilities fixed_requirements(const std::string& name)
{
  if (name == "dr_cp")
    return { true, false, false, false };
  if (name == "c_hdr" || name == "hd_pcp")
    return { true, true, false, false };
  if (name == "pcp" || name == "c_pcp" || name == "cp2_pcp")
    return { false, true, false, false };
  if (name == "l_cp")
    return { false, false, false, true };
  if (name == "stdqr")
    return { false, true, false, true };
  throw InvalidConfig("unknown method '" + name + "'");
}

} // namespace

std::string incompatibility(const std::string& name, const BasePredictor& model)
{
  const auto caps = model.capabilities();
  if (name == "m_cp" || name == "copula_cpts") {
    if (caps.marginal_quantiles || caps.sampler)
      return {};
    return "marginal quantiles or sampler required";
  }
  return caps.missing(fixed_requirements(name));
}

ScorePtr make_score(const std::string& name,
                    const ModelPtr& model,
                    const MethodParams& p,
                    const std::optional<MonotoneTransform>& transform)
{
  if (!is_method(name))
    throw InvalidConfig("unknown method '" + name + "'");
  if (const auto reason = incompatibility(name, *model); !reason.empty())
    throw CapabilityError(name + ": " + reason);

  ScorePtr s;
  if (name == "m_cp")
    s = std::make_shared<MarginalIntervalScore>(model, p.alpha, p.quantile_fallback);
  else if (name == "dr_cp")
    s = std::make_shared<DrCpScore>(model);
  else if (name == "c_hdr")
    s = std::make_shared<EcdfScore>(std::make_shared<DrCpScore>(model), model, p.mc.K, "c_hdr");
  else if (name == "pcp")
    s = std::make_shared<PcpScore>(model, p.mc.L);
  else if (name == "hd_pcp")
    s = std::make_shared<HdPcpScore>(model, p.mc.L, p.alpha);
  else if (name == "stdqr")
    s = std::make_shared<StdqrScore>(model, p.mc.L, p.alpha);
  else if (name == "c_pcp")
    s = std::make_shared<EcdfScore>(std::make_shared<PcpScore>(model, p.mc.L), model, p.mc.K, "c_pcp");
  else if (name == "l_cp")
    s = std::make_shared<LatentNormScore>(model);
  else if (name == "cp2_pcp")
    s = std::make_shared<Cp2Score>(std::make_shared<PcpScore>(model, p.mc.L), model, p.mc.K, p.alpha, "cp2_pcp");
  else
    throw InvalidConfig("method '" + name + "' is not score based");

  if (transform)
    s = std::make_shared<TransformedScore>(s, *transform);
  return s;
}

MethodPtr make_method(const std::string& name,
                      const ModelPtr& model,
                      const MethodParams& params,
                      const std::optional<MonotoneTransform>& transform)
{
  if (name == "copula_cpts") {
    if (const auto reason = incompatibility(name, *model); !reason.empty())
      throw CapabilityError(name + ": " + reason);
    CopulaConfig cfg = params.copula;
    cfg.fallback_samples = params.quantile_fallback;
    return std::make_shared<CopulaCpts>(model, params.alpha, cfg, transform);
  }
  return std::make_shared<SplitConformal>(make_score(name, model, params, transform), params.alpha);
}

} // namespace mocp
