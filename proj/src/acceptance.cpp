#include "mocp/acceptance.hpp"

#include "mocp/conditional_gaussian.hpp"
#include "mocp/datagen.hpp"
#include "mocp/metrics.hpp"
#include "mocp/special.hpp"
#include "mocp/stats.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

namespace mocp {

namespace {

constexpr double kAlpha = 0.2;

std::string fmt(const char* f, double a)
{
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

ModelPtr unimodal_oracle()
{
  return std::make_shared<OracleToyModel>(ToyProcessSpec::unimodal());
}

// Probe outputs: half drawn from the process, half spread uniformly over a
// box around it, so both sides of every region boundary get exercised.
Matrix probe_outputs(const Dataset& near, const RngStream& rng)
{
  Matrix y = near.y;
  auto engine = rng.engine();
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (Index i = 0; i < y.rows(); i += 2)
    for (Index j = 0; j < y.cols(); ++j)
      y(i, j) = u(engine);
  return y;
}

std::vector<bool> memberships(const CalibratedPredictor& fitted, const Matrix& xs, const Matrix& ys, const RngStream& rng)
{
  std::vector<bool> out(static_cast<std::size_t>(xs.rows()));
  for (Index i = 0; i < xs.rows(); ++i)
    out[static_cast<std::size_t>(i)] =
      fitted.region(xs.row(i).transpose(), rng.derive(static_cast<std::uint64_t>(i)))->contains(ys.row(i).transpose());
  return out;
}

std::size_t count_true(const std::vector<bool>& v)
{
  return static_cast<std::size_t>(std::count(v.begin(), v.end(), true));
}

std::size_t mismatches(const std::vector<bool>& a, const std::vector<bool>& b)
{
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    n += a[i] != b[i] ? 1 : 0;
  return n;
}

// 1 -------------------------------------------------------------------------
CriterionResult beta_coverage()
{
  CriterionResult r{ 1, "beta coverage law", true, "", 0.0 };
  const auto model = unimodal_oracle();
  const double target_var = beta_variance(160.0, 40.0);
  std::ostringstream os;
  for (const std::string m : { "dr_cp", "l_cp", "pcp" }) {
    MethodParams p;
    p.mc.L = 20;
    const auto h = coverage_beta_harness(ToyProcessSpec::unimodal(), 199, kAlpha, 500, m, model, p,
                                         RngStream(1).derive(Phase::replication), 2000);
    const bool ok_mean = std::abs(h.mean - 0.8) <= 0.006;
    const double ratio = h.variance / target_var;
    const bool ok_var = ratio >= 0.5 && ratio <= 2.0;
    r.passed = r.passed && ok_mean && ok_var;
    os << m << ": mean " << fmt("%.4f", h.mean) << " var " << fmt("%.3g", h.variance) << " (ratio "
       << fmt("%.2f", ratio) << ")  ";
  }
  r.detail = os.str();
  return r;
}

// 2 -------------------------------------------------------------------------
CriterionResult cdf_uniformity()
{
  CriterionResult r{ 2, "cdf score uniformity", true, "", 0.0 };
  const auto model = unimodal_oracle();
  MethodParams p;
  p.mc.K = 10000;
  const Index n_cal = 100;
  std::ostringstream os;
  for (const std::string m : { "c_hdr", "c_pcp" }) {
    const auto score = make_score(m, model, p);
    int passes = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const RngStream root = RngStream(seed).derive(Phase::replication);
      const Dataset cal = gen_unimodal(n_cal, root.derive(Phase::data));
      const auto s = calibration_scores(*score, cal, root.derive(Phase::calibration));
      passes += ks_uniform(s).p_value > 0.01 ? 1 : 0;
    }
    r.passed = r.passed && passes >= 95;
    os << m << ": " << passes << "/100 seeds pass  ";
  }
  r.detail = os.str();
  return r;
}

// 3 -------------------------------------------------------------------------
CriterionResult sample_max_equivalence()
{
  CriterionResult r{ 3, "pcp / f_max equivalences", true, "", 0.0 };
  const auto model = unimodal_oracle();
  const Index L = 100, K = 100;
  const RngStream root(3);
  const Dataset cal = gen_unimodal(500, root.derive(Phase::data).derive(0));
  const Dataset probes = gen_unimodal(1000, root.derive(Phase::data).derive(1));
  const Matrix py = probe_outputs(probes, root.derive(Phase::probe));

  const auto run = [&](ScorePtr s) {
    const auto fitted = SplitConformal(s, kAlpha).fit(cal, root.derive(Phase::calibration));
    return memberships(*fitted, probes.x, py, root.derive(Phase::test));
  };
  const auto pcp = run(std::make_shared<PcpScore>(model, L));
  const auto fmax = run(std::make_shared<SampleMaxDensityScore>(model, L));
  const auto c_pcp = run(std::make_shared<EcdfScore>(std::make_shared<PcpScore>(model, L), model, K, "c_pcp"));
  const auto c_fmax =
    run(std::make_shared<EcdfScore>(std::make_shared<SampleMaxDensityScore>(model, L), model, K, "c_hdr_fmax"));

  const auto m1 = mismatches(pcp, fmax), m2 = mismatches(c_pcp, c_fmax);
  r.passed = m1 == 0 && m2 == 0;
  r.detail = "pcp vs dr_cp(f_max): " + std::to_string(m1) + " mismatches (" + std::to_string(count_true(pcp)) +
             " inside); c_pcp vs c_hdr(f_max): " + std::to_string(m2) + " mismatches (" +
             std::to_string(count_true(c_pcp)) + " inside)";
  return r;
}

// 4 -------------------------------------------------------------------------
CriterionResult monotone_invariance()
{
  CriterionResult r{ 4, "monotone transform invariance", true, "", 0.0 };
  const RngStream root(4);
  const Dataset train = gen_unimodal(2000, root.derive(Phase::data).derive(0));
  const Dataset cal = gen_unimodal(500, root.derive(Phase::data).derive(1));
  const Dataset probes = gen_unimodal(1000, root.derive(Phase::data).derive(2));
  const Matrix py = probe_outputs(probes, root.derive(Phase::probe));
  const ModelPtr model = std::make_shared<ConditionalGaussian>(ConditionalGaussian::fit(train));
  const auto f = MonotoneTransform::affine(2.0, 1.0);

  std::ostringstream os;
  for (const auto& name : method_names()) {
    const MethodParams p;
    const auto plain = make_method(name, model, p)->calibrate(cal, root.derive(Phase::calibration));
    const auto moved = make_method(name, model, p, f)->calibrate(cal, root.derive(Phase::calibration));
    const auto a = memberships(*plain, probes.x, py, root.derive(Phase::test));
    const auto b = memberships(*moved, probes.x, py, root.derive(Phase::test));
    const auto mm = mismatches(a, b);
    r.passed = r.passed && mm == 0;
    os << name << ' ' << mm << ' ';
  }
  r.detail = "mismatches per method: " + os.str();
  return r;
}

// 5 -------------------------------------------------------------------------
CriterionResult volume_estimator()
{
  CriterionResult r{ 5, "importance-sampling volume", true, "", 0.0 };
  std::ostringstream os;
  for (int d : { 1, 2, 4, 8 }) {
    const auto ball = ball_scenario(d, kAlpha);
    const auto model = standard_normal_model(d);
    int good = 0;
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const double v = estimate_region_size(
        *model, [&](const Vector& y) { return ball.contains(y); }, Vector(0), 10000,
        RngStream(seed).derive(Phase::volume).derive(static_cast<std::uint64_t>(d)));
      const double err = std::abs(std::log(v) - ball.log_volume);
      worst = std::max(worst, err);
      good += err <= 0.15 ? 1 : 0;
    }
    r.passed = r.passed && good >= 9;
    os << "d=" << d << ": " << good << "/10 (max err " << fmt("%.3f", worst) << ")  ";
  }
  r.detail = os.str();
  return r;
}

// 6 -------------------------------------------------------------------------
CriterionResult conditional_ordering()
{
  CriterionResult r{ 6, "conditional coverage ordering", true, "", 0.0 };
  const auto model = unimodal_oracle();
  const std::vector<std::string> names{ "dr_cp", "c_hdr", "l_cp", "pcp", "c_pcp" };
  std::vector<double> mean(names.size(), 0.0);
  const int seeds = 10;
  for (int seed = 0; seed < seeds; ++seed) {
    const RngStream root = RngStream(static_cast<std::uint64_t>(seed)).derive(Phase::replication);
    const Dataset cal = gen_unimodal(2048, root.derive(Phase::data).derive(0));
    const Dataset val = gen_unimodal(2000, root.derive(Phase::data).derive(1));
    const Dataset test = gen_unimodal(5000, root.derive(Phase::data).derive(2));
    const auto part = kmeans_pp(val.x, 10, root.derive(Phase::cec));
    const auto cells = part.cells(test.x);
    for (std::size_t m = 0; m < names.size(); ++m) {
      const auto fitted = make_method(names[m], model, MethodParams{})->calibrate(cal, root.derive(Phase::calibration));
      const auto in = memberships(*fitted, test.x, test.y, root.derive(Phase::test));
      mean[m] += cec(cells, in, kAlpha) / seeds;
    }
  }
  const auto at = [&](const char* n) { return mean[static_cast<std::size_t>(std::find(names.begin(), names.end(), n) - names.begin())]; };
  r.passed = at("c_hdr") < at("dr_cp") && at("l_cp") < at("dr_cp") && at("c_pcp") < at("pcp");
  std::ostringstream os;
  for (std::size_t m = 0; m < names.size(); ++m)
    os << names[m] << ' ' << fmt("%.5f", mean[m]) << "  ";
  r.detail = "mean CEC-X: " + os.str();
  return r;
}

// 7 -------------------------------------------------------------------------
CriterionResult geometry_contracts()
{
  CriterionResult r{ 7, "region geometry contracts", true, "", 0.0 };
  const RngStream root(7);
  const Dataset train = gen_unimodal(2000, root.derive(Phase::data).derive(0));
  const Dataset cal = gen_unimodal(500, root.derive(Phase::data).derive(1));
  const Index n_probe = 10000;
  const Dataset probes = gen_unimodal(n_probe, root.derive(Phase::data).derive(2));
  const Matrix py = probe_outputs(probes, root.derive(Phase::probe));
  const auto cg = std::make_shared<ConditionalGaussian>(ConditionalGaussian::fit(train));
  const auto oracle = unimodal_oracle();
  const Matrix cov = cg->covariance();
  const Matrix cov_inv = cov.inverse();
  const RngStream test_rng = root.derive(Phase::test);

  // M-CP against the rectangle prod_i [l_i - q, u_i + q]
  std::size_t m_mcp = 0, in_mcp = 0;
  {
    const auto fitted = SplitConformal(std::make_shared<MarginalIntervalScore>(cg, kAlpha), kAlpha).fit(cal, root.derive(Phase::calibration));
    const double q = fitted->result().q_hat;
    const double z = normal_quantile(1.0 - kAlpha / 2.0);
    for (Index i = 0; i < n_probe; ++i) {
      const Vector x = probes.input(i), y = py.row(i).transpose();
      const Vector mu = cg->mean(x);
      bool rect = true;
      for (Index j = 0; j < y.size(); ++j) {
        const double sd = std::sqrt(cov(j, j));
        rect = rect && y(j) >= mu(j) - sd * z - q && y(j) <= mu(j) + sd * z + q;
      }
      const bool member = fitted->region(x, test_rng.derive(static_cast<std::uint64_t>(i)))->contains(y);
      m_mcp += member != rect ? 1 : 0;
      in_mcp += rect ? 1 : 0;
    }
  }
  // L-CP against the ellipsoid (y - mu)' Sigma^{-1} (y - mu) <= q^2
  std::size_t m_lcp = 0, in_lcp = 0;
  {
    const auto fitted = SplitConformal(std::make_shared<LatentNormScore>(cg), kAlpha).fit(cal, root.derive(Phase::calibration));
    const double q = fitted->result().q_hat;
    for (Index i = 0; i < n_probe; ++i) {
      const Vector x = probes.input(i), y = py.row(i).transpose();
      const Vector e = y - cg->mean(x);
      const bool ell = e.dot(cov_inv * e) <= q * q;
      const bool member = fitted->region(x, test_rng.derive(static_cast<std::uint64_t>(i)))->contains(y);
      m_lcp += member != ell ? 1 : 0;
      in_lcp += ell ? 1 : 0;
    }
  }
  // PCP against the union of balls of radius q around the region's samples
  std::size_t m_pcp = 0, in_pcp = 0;
  {
    const Index L = 100;
    const auto score = std::make_shared<PcpScore>(oracle, L);
    const auto fitted = SplitConformal(score, kAlpha).fit(cal, root.derive(Phase::calibration));
    const double q = fitted->result().q_hat;
    for (Index i = 0; i < n_probe; ++i) {
      const Vector x = probes.input(i), y = py.row(i).transpose();
      const RngStream s = test_rng.derive(static_cast<std::uint64_t>(i));
      const Matrix centers = oracle->sample(x, L, s);
      bool balls = false;
      for (Index l = 0; l < L && !balls; ++l)
        balls = (y - centers.row(l).transpose()).squaredNorm() <= q * q;
      const bool member = fitted->region(x, s)->contains(y);
      m_pcp += member != balls ? 1 : 0;
      in_pcp += balls ? 1 : 0;
    }
  }
  r.passed = m_mcp == 0 && m_lcp == 0 && m_pcp == 0;
  r.detail = "mismatches m_cp " + std::to_string(m_mcp) + " (" + std::to_string(in_mcp) + " inside), l_cp " +
             std::to_string(m_lcp) + " (" + std::to_string(in_lcp) + " inside), pcp " + std::to_string(m_pcp) + " (" +
             std::to_string(in_pcp) + " inside) of " + std::to_string(n_probe);
  return r;
}

// 8 -------------------------------------------------------------------------
CriterionResult statistics()
{
  CriterionResult r{ 8, "rank statistics", true, "", 0.0 };
  const auto w = wilcoxon_signed_rank({ 1, 2, 3, 4, 5 }, { 0, 0, 0, 0, 0 });
  Matrix values(10, 3);
  for (Index i = 0; i < 10; ++i)
    values.row(i) << 0.1 * static_cast<double>(i), 1.0 + static_cast<double>(i), 5.0 + static_cast<double>(i);
  const auto f = friedman_test(rank_rows(values));
  const auto h = holm_correction({ 0.01, 0.04 }, 0.05);
  const bool ok_w = std::abs(w.p_value - 0.0625) < 1e-12;
  const bool ok_f = std::abs(f.statistic - 20.0) < 1e-9;
  const bool ok_h = h.reject[0] && h.reject[1];
  r.passed = ok_w && ok_f && ok_h;
  r.detail = "wilcoxon p " + fmt("%.6g", w.p_value) + ", friedman " + fmt("%.6g", f.statistic) + ", holm rejects " +
             std::to_string(static_cast<int>(h.reject[0]) + static_cast<int>(h.reject[1])) + "/2";
  return r;
}

// 9 -------------------------------------------------------------------------
CriterionResult copula_cpts()
{
  CriterionResult r{ 9, "copula cpts coverage", true, "", 0.0 };
  const auto model = unimodal_oracle();
  const int seeds = 10;
  double mean_mc = 0.0;
  double min_cal2 = 1.0;
  bool cal2_ok = true;
  for (int seed = 0; seed < seeds; ++seed) {
    const RngStream root = RngStream(static_cast<std::uint64_t>(seed)).derive(Phase::replication);
    const Dataset cal = gen_unimodal(2048, root.derive(Phase::data).derive(0));
    const Dataset test = gen_unimodal(5000, root.derive(Phase::data).derive(1));
    const CopulaCpts method(model, kAlpha);
    const auto fitted = method.calibrate(cal, root.derive(Phase::calibration));
    const auto& c = dynamic_cast<const CopulaPredictor&>(*fitted).calibration();

    // recount cal-2 coverage through the region itself
    std::size_t covered = 0;
    for (std::size_t j = c.n1; j < static_cast<std::size_t>(cal.n()); ++j)
      covered += fitted->region(cal.input(static_cast<Index>(j)), root.derive(Phase::calibration).derive(j))
                     ->contains(cal.output(static_cast<Index>(j)))
                   ? 1
                   : 0;
    const double cov2 = static_cast<double>(covered) / static_cast<double>(c.n2);
    cal2_ok = cal2_ok && cov2 >= 0.8 && covered == c.covered;
    min_cal2 = std::min(min_cal2, cov2);
    mean_mc += marginal_coverage(memberships(*fitted, test.x, test.y, root.derive(Phase::test))) / seeds;
  }
  r.passed = cal2_ok && std::abs(mean_mc - 0.8) <= 0.03;
  r.detail = "min cal-2 coverage " + fmt("%.4f", min_cal2) + ", mean test coverage " + fmt("%.4f", mean_mc);
  return r;
}

} // namespace

CriterionResult run_criterion(int id)
{
  const auto t0 = std::chrono::steady_clock::now();
  CriterionResult r;
  try {
    switch (id) {
      case 1: r = beta_coverage(); break;
      case 2: r = cdf_uniformity(); break;
      case 3: r = sample_max_equivalence(); break;
      case 4: r = monotone_invariance(); break;
      case 5: r = volume_estimator(); break;
      case 6: r = conditional_ordering(); break;
      case 7: r = geometry_contracts(); break;
      case 8: r = statistics(); break;
      case 9: r = copula_cpts(); break;
      default: throw InvalidConfig("no acceptance criterion " + std::to_string(id));
    }
  } catch (const InvalidConfig&) {
    throw;
  } catch (const std::exception& e) {
    r = { id, "criterion " + std::to_string(id), false, std::string("exception: ") + e.what(), 0.0 };
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

std::vector<CriterionResult> run_acceptance(const std::vector<int>& only,
                                            const std::function<void(const CriterionResult&)>& on_result)
{
  std::vector<int> ids = only;
  if (ids.empty())
    for (int i = 1; i <= kCriterionCount; ++i)
      ids.push_back(i);
  std::vector<CriterionResult> out;
  for (int id : ids) {
    out.push_back(run_criterion(id));
    if (on_result)
      on_result(out.back());
  }
  return out;
}

std::string format_result(const CriterionResult& r)
{
  char head[96];
  std::snprintf(head, sizeof head, "[%s] %d %s (%.1fs): ", r.passed ? "PASS" : "FAIL", r.id, r.name.c_str(), r.seconds);
  return head + r.detail;
}

} // namespace mocp
