#include <catch2/catch_amalgamated.hpp>

#include "mocp/conditional_gaussian.hpp"
#include "mocp/conformal.hpp"
#include "mocp/datagen.hpp"
#include "mocp/methods.hpp"
#include "mocp/scores.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

using namespace mocp;
using Catch::Approx;

namespace {

// Returns a fixed list of draws (cycled) regardless of x and the stream.
class FixedDraws final : public BasePredictor
{
public:
  explicit FixedDraws(Matrix draws)
    : draws_(std::move(draws))
  {
  }
  std::string kind() const override { return "fixed"; }
  Capabilities capabilities() const override { return { false, true, false, false }; }
  Index input_dim() const override { return 1; }
  Index output_dim() const override { return draws_.cols(); }
  Matrix sample(const Vector&, Index count, const RngStream&) const override
  {
    Matrix out(count, draws_.cols());
    for (Index i = 0; i < count; ++i)
      out.row(i) = draws_.row(i % draws_.rows());
    return out;
  }

private:
  Matrix draws_;
};

// Uniform law on [0, 1]^2.
class UnitBox final : public BasePredictor
{
public:
  std::string kind() const override { return "box"; }
  Capabilities capabilities() const override { return { true, true, false, false }; }
  Index input_dim() const override { return 1; }
  Index output_dim() const override { return 2; }
  double log_density(const Vector&, const Vector& y) const override
  {
    const bool in = (y.array() >= 0.0).all() && (y.array() <= 1.0).all();
    return in ? 0.0 : -std::numeric_limits<double>::infinity();
  }
  Matrix sample(const Vector&, Index count, const RngStream& rng) const override
  {
    auto e = rng.engine();
    std::uniform_real_distribution<double> u;
    Matrix out(count, 2);
    for (Index i = 0; i < count; ++i)
      out.row(i) << u(e), u(e);
    return out;
  }
};

// s(x, y) = y_0
class FirstCoordinate final : public ConformityScore
{
public:
  std::string name() const override { return "first"; }
  Capabilities requirements() const override { return {}; }
  std::unique_ptr<PointScore> at(const Vector&, const RngStream&) const override
  {
    struct P final : PointScore
    {
      double operator()(const Vector& y) const override { return y(0); }
    };
    return std::make_unique<P>();
  }
};

Vector vec(std::initializer_list<double> v)
{
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double a : v)
    out(i++) = a;
  return out;
}

Matrix column(std::initializer_list<double> v)
{
  return vec(v);
}

const Vector x0 = Vector::Zero(1);

} // namespace

TEST_CASE("dr_cp score")
{
  const auto normal = standard_normal_model(1);
  const DrCpScore s(normal);
  const Vector none(0);
  CHECK(s(none, vec({ 0.0 }), RngStream(1)) == Approx(-0.3989422804014327));
  const double far = s(none, vec({ 50.0 }), RngStream(1));
  CHECK(far <= 0.0);
  CHECK(far > -1e-300);
  CHECK(s(none, vec({ 1.0 }), RngStream(1)) > s(none, vec({ 0.0 }), RngStream(1)));
  CHECK_THROWS_AS(DrCpScore(std::make_shared<FixedDraws>(column({ 1.0 }))), CapabilityError);
}

TEST_CASE("ecdf wrapper examples")
{
  const auto draws = std::make_shared<FixedDraws>(column({ 0.3, 0.1, 0.4, 0.2 }));
  const EcdfScore s(std::make_shared<FirstCoordinate>(), draws, 4, "ecdf");
  CHECK(s(x0, vec({ 0.25 }), RngStream(1)) == 0.5);
  CHECK(s(x0, vec({ 0.0 }), RngStream(1)) == 0.0);
  CHECK(s(x0, vec({ 0.9 }), RngStream(1)) == 1.0);
  CHECK(s(x0, vec({ 0.2 }), RngStream(1)) == 0.5);

  CHECK(ecdf_rank({ 0.1, 0.2, 0.3, 0.4 }, 0.25) == 0.5);
  CHECK_THROWS_AS(ecdf_rank({}, 0.0), InvalidConfig);
}

TEST_CASE("c_hdr score")
{
  MethodParams params;
  params.mc.K = 100000;
  const auto normal = standard_normal_model(1);
  const auto s = make_score("c_hdr", normal, params);
  const Vector none(0);
  // P(|Z| <= 0.5)
  CHECK(std::abs((*s)(none, vec({ 0.5 }), RngStream(2)) - 0.38292492254802624) < 0.006);
  CHECK((*s)(none, vec({ 0.0 }), RngStream(3)) == 0.0);

  params.mc.K = 200;
  const auto box = make_score("c_hdr", std::make_shared<UnitBox>(), params);
  CHECK((*box)(x0, vec({ 0.3, 0.6 }), RngStream(4)) == 1.0);
}

TEST_CASE("pcp score")
{
  Matrix pts(2, 2);
  pts << 0, 0, 3, 4;
  const PcpScore s(std::make_shared<FixedDraws>(pts), 2);
  CHECK(s(x0, vec({ 0.0, 1.0 }), RngStream(1)) == 1.0);
  CHECK(s(x0, vec({ 3.0, 4.0 }), RngStream(1)) == 0.0);
  CHECK(s(x0, vec({ 3.0, 5.0 }), RngStream(1)) == 1.0);
  CHECK_THROWS_AS(PcpScore(std::make_shared<FixedDraws>(pts), 0), InvalidConfig);
  CHECK_THROWS_AS(NearestSamplePoint(Matrix(0, 2)), InvalidConfig);
}

TEST_CASE("hd_pcp keeps the highest density draws")
{
  const auto normal = standard_normal_model(2);
  const HdPcpScore s(normal, 5, 0.2);
  CHECK(s.kept() == 4);
  CHECK_THROWS_AS(HdPcpScore(normal, 4, 0.8), InvalidConfig);

  const Vector none(0);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const HdPcpScore big(normal, 50, 0.3);
    const RngStream rng(seed);
    Matrix draws = normal->sample(none, 50, rng);
    // highest density under N(0, I) = smallest norm
    std::vector<Index> order(50);
    std::iota(order.begin(), order.end(), Index{ 0 });
    std::sort(order.begin(), order.end(), [&](Index a, Index b) { return draws.row(a).norm() < draws.row(b).norm(); });
    const Vector y = vec({ 1.5, -0.5 });
    double best = std::numeric_limits<double>::infinity();
    for (Index r = 0; r < 35; ++r)
      best = std::min(best, (draws.row(order[static_cast<std::size_t>(r)]).transpose() - y).norm());
    CHECK(big(none, y, rng) == Approx(best).epsilon(1e-14));
  }

  // small alpha keeps everything and matches PCP on the same stream
  const HdPcpScore all(normal, 10, 1e-17);
  const PcpScore pcp(normal, 10);
  CHECK(all.kept() == 10);
  for (double a : { -2.0, 0.0, 0.7 })
    CHECK(all(none, vec({ a, 1.0 }), RngStream(7)) == pcp(none, vec({ a, 1.0 }), RngStream(7)));
}

TEST_CASE("stdqr keeps the smallest latent norms")
{
  Matrix A(2, 1);
  A << 1, 0.5;
  Matrix chol(2, 2);
  chol << 2.0, 0.0, 0.5, 0.3;
  const auto m = std::make_shared<ConditionalGaussian>(A, vec({ 0.1, 0.2 }), chol);
  const StdqrScore s(m, 40, 0.2);
  CHECK(s.kept() == 32);
  const Vector x = vec({ 0.4 });
  const RngStream rng(11);
  auto e = rng.engine();
  std::normal_distribution<double> n;
  Matrix z(40, 2);
  for (Index l = 0; l < 40; ++l)
    for (Index i = 0; i < 2; ++i)
      z(l, i) = n(e);
  std::vector<double> norms(40);
  for (Index l = 0; l < 40; ++l)
    norms[static_cast<std::size_t>(l)] = z.row(l).norm();
  std::vector<double> sorted = norms;
  std::sort(sorted.begin(), sorted.end());
  const Matrix kept = s.kept_latents(rng);
  REQUIRE(kept.rows() == 32);
  for (Index r = 0; r < 32; ++r)
    CHECK(kept.row(r).norm() <= sorted[31]);

  const Vector mapped = m->latent_forward(kept.row(5).transpose(), x);
  CHECK(s(x, mapped, rng) == 0.0);
  CHECK_THROWS_AS(StdqrScore(std::make_shared<FixedDraws>(column({ 1.0 })), 10, 0.2), CapabilityError);
  CHECK(StdqrScore(m, 10, 1e-3).kept() == 10);
}

TEST_CASE("c_pcp at a sample point")
{
  Matrix pts(3, 2);
  pts << 0, 0, 1, 1, 2, 2;
  const auto draws = std::make_shared<FixedDraws>(pts);
  MethodParams params;
  params.mc.L = 3;
  params.mc.K = 3;
  const auto s = make_score("c_pcp", draws, params);
  // every Yhat_k coincides with a PCP center, so all base scores are 0
  CHECK((*s)(x0, vec({ 1.0, 1.0 }), RngStream(1)) == 1.0);
  CHECK((*s)(x0, vec({ 1.0, 1.5 }), RngStream(1)) == 1.0);

  const auto normal = standard_normal_model(2);
  params.mc.L = 20;
  params.mc.K = 50;
  const auto cp = make_score("c_pcp", normal, params);
  const Vector none(0);
  const RngStream rng(5);
  const Matrix centers = normal->sample(none, 20, rng.derive(0));
  CHECK((*cp)(none, centers.row(0).transpose(), rng) == 0.0);
}

TEST_CASE("l_cp score")
{
  const auto m = std::make_shared<ConditionalGaussian>(Matrix::Zero(2, 1), vec({ 1.0, -1.0 }), Matrix::Identity(2, 2));
  const LatentNormScore s(m);
  CHECK(s(x0, vec({ 1.0, -1.0 }), RngStream(1)) == 0.0);
  CHECK(s(x0, vec({ 4.0, 3.0 }), RngStream(1)) == Approx(5.0));
}

TEST_CASE("m_cp score")
{
  MarginalBounds b{ vec({ 0.0, 0.0 }), vec({ 1.0, 1.0 }) };
  CHECK(cqr_scores(b, vec({ 0.5, 0.9 })).maxCoeff() == Approx(-0.1));
  CHECK(cqr_scores(b, vec({ 1.5, 0.5 })).maxCoeff() == Approx(0.5));

  // marginal quantiles at 0.1 and 0.9 equal 0 and 1
  const double sd = 0.5 / 1.2815515655446004;
  const auto m = std::make_shared<ConditionalGaussian>(Matrix::Zero(2, 1), vec({ 0.5, 0.5 }), sd * Matrix::Identity(2, 2));
  const MarginalIntervalScore s(m, 0.2);
  CHECK(s(x0, vec({ 0.5, 0.9 }), RngStream(1)) == Approx(-0.1));
  CHECK(s(x0, vec({ 1.5, 0.5 }), RngStream(1)) == Approx(0.5));
  CHECK(s.requirements() == Capabilities{ false, false, true, false });

  const MarginalIntervalScore fallback(std::make_shared<FixedDraws>(column({ 4, 1, 3, 2 })), 0.2, 4);
  CHECK(fallback.requirements() == Capabilities{ false, true, false, false });
  const auto fb = fallback.bounds(x0, RngStream(1));
  CHECK(fb.lower(0) == 1.0);
  CHECK(fb.upper(0) == 3.0);
}

TEST_CASE("cp2 wrapper")
{
  const auto draws = std::make_shared<FixedDraws>(column({ 10, 0.5, 2, 1, 1.5 }));
  const Cp2Score s(std::make_shared<FirstCoordinate>(), draws, 5, 0.2, "cp2");
  CHECK(s.tau(x0, RngStream(1)) == 2.0);
  CHECK(s(x0, vec({ 1.0 }), RngStream(1)) == 0.5);
  CHECK(s(x0, vec({ 2.0 }), RngStream(1)) == 1.0);

  const auto negative = std::make_shared<FixedDraws>(column({ -1, -2, -3, -4, -5 }));
  const Cp2Score bad(std::make_shared<FirstCoordinate>(), negative, 5, 0.2, "cp2");
  CHECK_THROWS_AS(bad(x0, vec({ 1.0 }), RngStream(1)), NumericalError);
  CHECK_THROWS_AS(Cp2Score(std::make_shared<FirstCoordinate>(), draws, 1, 0.2, "cp2"), InvalidConfig);
}

TEST_CASE("transformed score and affine map")
{
  const auto t = MonotoneTransform::affine(2.0, 1.0);
  CHECK(t.forward(3.0) == 7.0);
  CHECK(t.inverse(7.0) == 3.0);
  CHECK_THROWS_AS(MonotoneTransform::affine(0.0, 1.0), InvalidConfig);
  const TransformedScore s(std::make_shared<FirstCoordinate>(), t);
  CHECK(s(x0, vec({ 0.25 }), RngStream(1)) == 1.5);
}

TEST_CASE("method registry")
{
  const auto& names = method_names();
  CHECK(names.size() == 10);
  CHECK(names.front() == "m_cp");
  CHECK(is_method("cp2_pcp"));
  CHECK_FALSE(is_method("nope"));

  const auto fixed = std::make_shared<FixedDraws>(column({ 1.0 }));
  CHECK(incompatibility("pcp", *fixed).empty());
  CHECK(incompatibility("dr_cp", *fixed) == "density required");
  CHECK(incompatibility("l_cp", *fixed) == "invertible map required");
  CHECK(incompatibility("m_cp", *fixed).empty());

  const auto normal = standard_normal_model(2);
  for (const auto& name : names)
    CHECK(incompatibility(name, *normal).empty());
  CHECK_THROWS_AS(make_method("nope", normal, MethodParams{}), InvalidConfig);
}

TEST_CASE("split conformal threshold is the k-th calibration score")
{
  const auto m = std::make_shared<ConditionalGaussian>(Matrix::Zero(2, 1), vec({ 0.0, 0.0 }), Matrix::Identity(2, 2));
  const Dataset cal = [] {
    std::mt19937_64 g(3);
    std::normal_distribution<double> n;
    Matrix x(99, 1), y(99, 2);
    for (Index i = 0; i < 99; ++i)
      x(i, 0) = n(g), y(i, 0) = n(g), y(i, 1) = n(g);
    return Dataset(x, y);
  }();
  const SplitConformal method(std::make_shared<LatentNormScore>(m), 0.2);
  const auto fitted = method.fit(cal, RngStream(1));
  std::vector<double> norms(99);
  for (Index i = 0; i < 99; ++i)
    norms[static_cast<std::size_t>(i)] = cal.output(i).norm();
  std::sort(norms.begin(), norms.end());
  CHECK(fitted->result().q_hat == norms[79]);

  const auto region = fitted->region(x0, RngStream(2));
  CHECK(region->contains(vec({ norms[79], 0.0 })));
  CHECK_FALSE(region->contains(vec({ norms[79] + 1e-9, 0.0 })));

  const auto scores = calibration_scores(*method.score(), cal, RngStream(1));
  for (Index i = 0; i < 99; ++i)
    CHECK(scores[static_cast<std::size_t>(i)] == cal.output(i).norm());
}
