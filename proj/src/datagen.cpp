#include "mocp/datagen.hpp"

#include "mocp/conditional_gaussian.hpp"
#include "mocp/special.hpp"

#include <cmath>
#include <numeric>
#include <random>

namespace mocp {

Dataset generate_toy(const ToyProcessSpec& spec, Index n, const RngStream& rng)
{
  if (n < 1)
    throw InvalidConfig("toy generator needs n >= 1");
  const ToyScaling sc = toy_scaling(spec);
  auto engine = rng.engine();
  std::uniform_real_distribution<double> ux(spec.x_low(), spec.x_high());
  std::normal_distribution<double> normal;
  const Matrix arc = spec.id == ToyProcess::unimodal ? unimodal_arc(spec) : Matrix();
  std::uniform_int_distribution<int> pick_arc(0, spec.k - 1);
  std::bernoulli_distribution coin(0.5);

  Matrix x(n, 1), y(n, spec.d);
  for (Index r = 0; r < n; ++r) {
    const double xr = ux(engine);
    x(r, 0) = (xr - sc.x_mean) / sc.x_scale;
    if (spec.id == ToyProcess::unimodal) {
      const int j = pick_arc(engine);
      for (Index i = 0; i < 2; ++i)
        y(r, i) = (1.3 - xr) * arc(j, i) + spec.sigma * normal(engine);
    } else {
      const bool first = coin(engine);
      const double center = first ? spec.center : -spec.center;
      const double sd = first ? std::sqrt(xr) : 1.0 / std::sqrt(xr);
      for (Index i = 0; i < spec.d; ++i)
        y(r, i) = center + sd * normal(engine);
    }
    for (Index i = 0; i < spec.d; ++i)
      y(r, i) = (y(r, i) - sc.y_mean(i)) / sc.y_scale(i);
  }
  return Dataset(std::move(x), std::move(y));
}

Dataset gen_unimodal(Index n, const RngStream& rng)
{
  return generate_toy(ToyProcessSpec::unimodal(), n, rng);
}

Dataset gen_bimodal(Index n, const RngStream& rng)
{
  return generate_toy(ToyProcessSpec::bimodal(), n, rng);
}

BallScenario ball_scenario(int d, double alpha)
{
  if (d < 1)
    throw InvalidConfig("ball scenario needs d >= 1");
  check_alpha(alpha);
  BallScenario b;
  b.d = d;
  b.alpha = alpha;
  b.radius = std::sqrt(chi2_quantile(1.0 - alpha, d));
  b.log_volume = log_ball_volume(d, b.radius);
  return b;
}

ModelPtr standard_normal_model(int d)
{
  if (d < 1)
    throw InvalidConfig("standard normal model needs d >= 1");
  return std::make_shared<ConditionalGaussian>(Matrix(d, 0), Vector::Zero(d), Matrix::Identity(d, d));
}

BetaHarnessResult coverage_beta_harness(const ToyProcessSpec& process,
                                        Index n_cal,
                                        double alpha,
                                        Index replications,
                                        const std::string& method_name,
                                        const ModelPtr& model,
                                        const MethodParams& params,
                                        const RngStream& rng,
                                        Index n_test)
{
  if (replications < 1 || n_test < 1 || n_cal < 0)
    throw InvalidConfig("beta harness needs replications >= 1, n_test >= 1 and n_cal >= 0");
  MethodParams p = params;
  p.alpha = alpha;
  const MethodPtr method = make_method(method_name, model, p);

  BetaHarnessResult out;
  out.k_alpha = conformal_rank(static_cast<std::size_t>(n_cal), alpha);
  out.beta_a = static_cast<double>(out.k_alpha);
  out.beta_b = static_cast<double>(n_cal + 1) - out.beta_a;
  if (out.beta_b > 0.0) {
    out.beta_mean = beta_mean(out.beta_a, out.beta_b);
    out.beta_variance = beta_variance(out.beta_a, out.beta_b);
  } else {
    out.beta_mean = 1.0;
    out.beta_variance = 0.0;
  }

  for (Index r = 0; r < replications; ++r) {
    const RngStream rep = rng.derive(static_cast<std::uint64_t>(r));
    const Dataset cal = n_cal > 0 ? generate_toy(process, n_cal, rep.derive(Phase::data).derive(0)) : Dataset(Matrix(0, 1), Matrix(0, process.d));
    const Dataset test = generate_toy(process, n_test, rep.derive(Phase::data).derive(1));
    const auto fitted = method->calibrate(cal, rep.derive(Phase::calibration));
    const RngStream test_rng = rep.derive(Phase::test);
    Index hits = 0;
    for (Index i = 0; i < test.n(); ++i)
      hits += fitted->region(test.input(i), test_rng.derive(static_cast<std::uint64_t>(i)))->contains(test.output(i)) ? 1 : 0;
    out.coverages.push_back(static_cast<double>(hits) / static_cast<double>(test.n()));
  }

  const double m = static_cast<double>(out.coverages.size());
  out.mean = std::accumulate(out.coverages.begin(), out.coverages.end(), 0.0) / m;
  double ss = 0.0;
  for (double c : out.coverages)
    ss += (c - out.mean) * (c - out.mean);
  out.variance = m > 1.0 ? ss / (m - 1.0) : 0.0;
  return out;
}

} // namespace mocp
