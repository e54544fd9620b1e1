#include <catch2/catch_amalgamated.hpp>

#include "mocp/conditional_gaussian.hpp"
#include "mocp/datagen.hpp"
#include "mocp/knn_kde.hpp"
#include "mocp/model_io.hpp"
#include "mocp/toy_process.hpp"

#include <cmath>
#include <filesystem>
#include <random>

using namespace mocp;
using Catch::Approx;

namespace {

constexpr double kPi = 3.14159265358979323846;

Dataset linear_data(Index n, const Matrix& A, const Vector& b, const Matrix& chol, std::uint64_t seed)
{
  std::mt19937_64 g(seed);
  std::normal_distribution<double> z;
  const Index p = A.cols(), d = A.rows();
  Matrix x(n, p), y(n, d);
  for (Index i = 0; i < n; ++i) {
    Vector xi(p), e(d);
    for (Index j = 0; j < p; ++j)
      xi(j) = z(g);
    for (Index j = 0; j < d; ++j)
      e(j) = z(g);
    x.row(i) = xi.transpose();
    y.row(i) = (A * xi + b + chol * e).transpose();
  }
  return Dataset(x, y);
}

// Direct evaluation of the unimodal toy density in raw units:
//   (1/k) sum_j N(y; (1.3 - x) mu_j, sigma^2 I), mu_j = (cos a_j, 0.5 - sin a_j)
double unimodal_raw_density(double x, double y0, double y1)
{
  const int k = 200;
  const double sigma = 0.2;
  double total = 0.0;
  for (int j = 0; j < k; ++j) {
    const double a = j * kPi / (k - 1);
    const double m0 = (1.3 - x) * std::cos(a), m1 = (1.3 - x) * (0.5 - std::sin(a));
    const double r2 = (y0 - m0) * (y0 - m0) + (y1 - m1) * (y1 - m1);
    total += std::exp(-r2 / (2 * sigma * sigma)) / (2 * kPi * sigma * sigma);
  }
  return total / k;
}

// 0.5 N(c 1, x I) + 0.5 N(-c 1, I / x), d = 2
double bimodal_raw_density(double x, double y0, double y1)
{
  const double c = 4.0;
  const auto iso = [](double v, double a, double b) { return std::exp(-(a * a + b * b) / (2 * v)) / (2 * kPi * v); };
  return 0.5 * iso(x, y0 - c, y1 - c) + 0.5 * iso(1.0 / x, y0 + c, y1 + c);
}

} // namespace

TEST_CASE("conditional gaussian recovers a noiseless linear map")
{
  Matrix A(2, 3);
  A << 1, -2, 0.5, 0.3, 0.0, 4;
  const Vector b = Vector::Map(std::vector<double>{ 1.5, -0.7 }.data(), 2);
  const Dataset data = linear_data(200, A, b, Matrix::Zero(2, 2), 1);
  const auto m = ConditionalGaussian::fit(data);
  CHECK((m.coef() - A).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((m.intercept() - b).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(m.chol().isLowerTriangular());
  CHECK((m.chol().diagonal().array() > 0).all());
  CHECK(m.chol().cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("conditional gaussian without features fits mean and covariance")
{
  std::mt19937_64 g(2);
  std::normal_distribution<double> z;
  Matrix y(500, 2);
  for (Index i = 0; i < 500; ++i) {
    const double a = z(g), c = z(g);
    y.row(i) << 1 + a, -2 + 0.5 * a + c;
  }
  const auto m = ConditionalGaussian::fit(Dataset(Matrix(500, 0), y));
  const Vector mean = y.colwise().mean().transpose();
  const Matrix centered = y.rowwise() - mean.transpose();
  const Matrix cov = centered.transpose() * centered / 500.0;
  CHECK((m.intercept() - mean).norm() < 1e-8);
  CHECK((m.covariance() - cov).norm() < 1e-8);
  CHECK(m.input_dim() == 0);
}

TEST_CASE("conditional gaussian covariance is consistent")
{
  Matrix A(2, 1);
  A << 2, -1;
  Matrix chol(2, 2);
  chol << 1.0, 0.0, 0.6, 0.5;
  const Dataset data = linear_data(50000, A, Vector::Zero(2), chol, 3);
  const auto m = ConditionalGaussian::fit(data);
  const Matrix sigma = chol * chol.transpose();
  CHECK((m.covariance() - sigma).norm() / sigma.norm() < 0.05);
}

TEST_CASE("conditional gaussian needs more rows than features")
{
  CHECK_THROWS_AS(ConditionalGaussian::fit(Dataset(Matrix::Zero(3, 2), Matrix::Zero(3, 1))), InvalidData);
}

TEST_CASE("conditional gaussian density, quantiles and latent map")
{
  const ConditionalGaussian unit(Matrix::Zero(1, 1), Vector::Zero(1), Matrix::Identity(1, 1));
  const Vector x = Vector::Constant(1, 0.3);
  CHECK(unit.density(x, Vector::Zero(1)) == Approx(0.3989422804014327));
  CHECK(unit.marginal_quantile(x, 0, 0.5) == Approx(0.0).margin(1e-14));
  CHECK(unit.marginal_quantile(x, 0, 0.9) == Approx(1.2815515655446004));
  CHECK_THROWS_AS(unit.marginal_quantile(x, 0, 1.0), InvalidConfig);

  Matrix A(2, 1);
  A << 1, 2;
  Vector b(2);
  b << 0.5, -0.5;
  const ConditionalGaussian id(A, b, Matrix::Identity(2, 2));
  const Vector mu = id.mean(x);
  CHECK((id.latent_forward(Vector::Zero(2), x) - mu).norm() == 0.0);
  Vector z(2);
  z << 3, 4;
  CHECK((id.latent_forward(z, x) - (mu + z)).norm() < 1e-15);

  Matrix chol(2, 2);
  chol << 0.7, 0.0, -0.4, 1.3;
  const ConditionalGaussian m(A, b, chol);
  std::mt19937_64 g(4);
  std::normal_distribution<double> n;
  for (int t = 0; t < 50; ++t) {
    Vector y(2), w(2);
    y << 3 * n(g), 3 * n(g);
    w << n(g), n(g);
    CHECK((m.latent_forward(m.latent_inverse(y, x), x) - y).norm() < 1e-10);
    CHECK((m.latent_inverse(m.latent_forward(w, x), x) - w).norm() < 1e-10);
  }
  // density against the textbook formula with an explicit inverse
  const Matrix S = chol * chol.transpose();
  Vector y(2);
  y << 0.2, 1.7;
  const Vector e = y - m.mean(x);
  const double expect = std::exp(-0.5 * e.dot(S.inverse() * e)) / (2 * kPi * std::sqrt(S.determinant()));
  CHECK(m.density(x, y) == Approx(expect).epsilon(1e-12));
}

TEST_CASE("conditional gaussian sampler agrees with its density")
{
  Matrix A(2, 1);
  A << 1, -1;
  Matrix chol(2, 2);
  chol << 0.5, 0.0, 0.2, 0.8;
  const ConditionalGaussian m(A, Vector::Zero(2), chol);
  const Vector x = Vector::Constant(1, 1.0);
  const Matrix s = m.sample(x, 100000, RngStream(5));
  const Vector mean = s.colwise().mean().transpose();
  const Vector mu = m.mean(x);
  const Matrix cov = m.covariance();
  for (Index i = 0; i < 2; ++i)
    CHECK(std::abs(mean(i) - mu(i)) < 3 * std::sqrt(cov(i, i) / 100000.0));

  const Matrix t = m.sample(x, 10000, RngStream(6));
  std::vector<double> nl(10000);
  for (Index i = 0; i < 10000; ++i)
    nl[static_cast<std::size_t>(i)] = -m.log_density(x, t.row(i).transpose());
  double avg = 0, sq = 0;
  for (double v : nl)
    avg += v / 10000.0;
  for (double v : nl)
    sq += (v - avg) * (v - avg) / 9999.0;
  CHECK(std::abs(avg - m.entropy()) < 3 * std::sqrt(sq / 10000.0));

  CHECK(m.sample(x, 0, RngStream(1)).rows() == 0);
  const Matrix r1 = m.sample(x, 5, RngStream(9)), r2 = m.sample(x, 5, RngStream(9));
  CHECK(r1 == r2);
}

TEST_CASE("knn kde special cases")
{
  Matrix tx(1, 1), ty(1, 2);
  tx << 0.0;
  ty << 1.0, -1.0;
  const KnnKde one(tx, ty, 1, 1.0);
  CHECK(one.density(Vector::Constant(1, 5.0), ty.row(0).transpose()) == Approx(1.0 / (2 * kPi)));

  Matrix x3(3, 1), y3(3, 2);
  x3 << 0, 1, 2;
  y3 << 0, 0, 5, 5, -3, 1;
  const KnnKde k1(x3, y3, 1, 0.3);
  const auto w = k1.weights(Vector::Constant(1, 1.0));
  REQUIRE(w.size() == 1);
  CHECK(w[0].first == 1);
  CHECK(w[0].second == 1.0);
  Vector y(2);
  y << 5.2, 4.9;
  const double r2 = 0.04 + 0.01;
  CHECK(k1.density(Vector::Constant(1, 1.0), y) == Approx(std::exp(-r2 / (2 * 0.09)) / (2 * kPi * 0.09)));

  CHECK_THROWS_AS(KnnKde(x3, y3, 4, 0.3), InvalidConfig);
  CHECK_THROWS_AS(KnnKde(x3, y3, 2, 0.0), InvalidConfig);
  CHECK_THROWS_AS(k1.marginal_quantile(Vector::Constant(1, 0.0), 0, 0.5), CapabilityError);
  CHECK_THROWS_AS(k1.latent_inverse(y, Vector::Constant(1, 0.0)), CapabilityError);
}

TEST_CASE("knn kde weights and mixture normalization")
{
  const Dataset d = gen_unimodal(300, RngStream(7));
  const KnnKde m(d.x, d.y, 25, 0.2);
  const auto w = m.weights(Vector::Constant(1, 0.1));
  double total = 0;
  for (const auto& [i, v] : w) {
    CHECK(v >= 0.0);
    total += v;
  }
  CHECK(total == Approx(1.0));
  CHECK(w.size() == 25);

  // Density equals the explicit weighted Gaussian mixture over the neighbours.
  Vector y(2);
  y << 0.3, -0.4;
  double mix = 0;
  for (const auto& [i, v] : w) {
    const double r2 = (y - d.output(i)).squaredNorm();
    mix += v * std::exp(-r2 / (2 * 0.04)) / (2 * kPi * 0.04);
  }
  CHECK(m.density(Vector::Constant(1, 0.1), y) == Approx(mix).epsilon(1e-10));
}

TEST_CASE("knn kde k = 1 sampler has sigma^2 I covariance")
{
  Matrix tx(2, 1), ty(2, 2);
  tx << 0, 10;
  ty << 1, 2, -5, -5;
  const KnnKde m(tx, ty, 1, 0.5);
  const Matrix s = m.sample(Vector::Constant(1, 0.2), 100000, RngStream(8));
  const Vector mean = s.colwise().mean().transpose();
  CHECK(std::abs(mean(0) - 1.0) < 0.01);
  CHECK(std::abs(mean(1) - 2.0) < 0.01);
  const Matrix c = (s.rowwise() - mean.transpose()).transpose() * (s.rowwise() - mean.transpose()) / 99999.0;
  CHECK(std::abs(c(0, 0) / 0.25 - 1) < 0.05);
  CHECK(std::abs(c(1, 1) / 0.25 - 1) < 0.05);
  CHECK(std::abs(c(0, 1)) < 0.0125);
  CHECK(m.sample(Vector::Constant(1, 0.2), 0, RngStream(1)).rows() == 0);
}

TEST_CASE("knn kde bandwidth selection")
{
  const Dataset train = gen_unimodal(1000, RngStream(9));
  const Dataset val = gen_unimodal(300, RngStream(10));
  const std::vector<double> single{ 0.1 };
  CHECK(KnnKde::fit(train, 20, single, val).sigma() == 0.1);
  CHECK_THROWS_AS(KnnKde::fit(train, 20, std::vector<double>{}, val), InvalidConfig);

  const auto grid = KnnKde::default_sigma_grid();
  const auto best = KnnKde::fit(train, 20, grid, val);
  const double chosen = best.mean_nll(val);
  for (double s : grid)
    CHECK(chosen <= KnnKde(train.x, train.y, 20, s).mean_nll(val) + 1e-12);
}

TEST_CASE("empirical quantile convention")
{
  CHECK(empirical_quantile({ 4, 2, 3, 1 }, 0.5) == 2.0);
  CHECK(empirical_quantile({ 4, 2, 3, 1 }, 0.1) == 1.0);
  CHECK(empirical_quantile({ 4, 2, 3, 1 }, 0.99) == 3.0);
  CHECK_THROWS_AS(empirical_quantile({}, 0.5), InvalidData);
}

TEST_CASE("marginal bounds fall back to samples")
{
  Matrix tx(1, 1), ty(1, 2);
  tx << 0;
  ty << 0, 0;
  const auto kde = std::make_shared<KnnKde>(tx, ty, 1, 1.0);
  const Vector x = Vector::Zero(1);
  const auto b = marginal_bounds(*kde, x, 0.1, 0.9, RngStream(3), 100);
  const Matrix draws = kde->sample(x, 100, RngStream(3));
  for (Index i = 0; i < 2; ++i) {
    std::vector<double> col(draws.col(i).data(), draws.col(i).data() + 100);
    std::sort(col.begin(), col.end());
    CHECK(b.lower(i) == col[9]);
    CHECK(b.upper(i) == col[89]);
  }
  const MaskedPredictor none(kde, Capabilities{ true, false, false, false });
  CHECK_THROWS_AS(marginal_bounds(none, x, 0.1, 0.9, RngStream(3)), CapabilityError);
}

TEST_CASE("oracle toy densities match the process formulas")
{
  for (const auto spec : { ToyProcessSpec::unimodal(), ToyProcessSpec::bimodal() }) {
    const OracleToyModel m(spec);
    const auto sc = toy_scaling(spec);
    std::mt19937_64 g(12);
    std::uniform_real_distribution<double> u(-1.7, 1.7);
    for (int t = 0; t < 40; ++t) {
      const double xs = u(g);
      Vector y(2);
      y << u(g), u(g);
      const double xr = sc.x_mean + sc.x_scale * xs;
      const double y0 = sc.y_mean(0) + sc.y_scale(0) * y(0), y1 = sc.y_mean(1) + sc.y_scale(1) * y(1);
      const double raw = spec.id == ToyProcess::unimodal ? unimodal_raw_density(xr, y0, y1) : bimodal_raw_density(xr, y0, y1);
      const double expect = raw * sc.y_scale(0) * sc.y_scale(1);
      CHECK(m.density(Vector::Constant(1, xs), y) == Approx(expect).epsilon(1e-10));
    }
  }
}

TEST_CASE("oracle marginal quantiles invert the marginal cdf")
{
  const OracleToyModel m(ToyProcessSpec::unimodal());
  const Vector x = Vector::Constant(1, -0.4);
  const auto mix = m.conditional(x);
  for (double level : { 0.001, 0.1, 0.5, 0.9, 0.999 })
    for (Index i = 0; i < 2; ++i)
      CHECK(mix.marginal_cdf(i, m.marginal_quantile(x, i, level)) == Approx(level).epsilon(1e-9));
}

TEST_CASE("oracle latent map round trips and maps to a standard normal")
{
  const OracleToyModel m(ToyProcessSpec::unimodal());
  const Vector x = Vector::Constant(1, 0.8);
  const Matrix y = m.sample(x, 2000, RngStream(13));
  Matrix z(2000, 2);
  for (Index i = 0; i < 2000; ++i) {
    z.row(i) = m.latent_inverse(y.row(i).transpose(), x).transpose();
    CHECK((m.latent_forward(z.row(i).transpose(), x) - y.row(i).transpose()).norm() < 1e-8);
  }
  const Vector mean = z.colwise().mean().transpose();
  CHECK(mean.cwiseAbs().maxCoeff() < 4.0 / std::sqrt(2000.0));
  const Matrix c = (z.rowwise() - mean.transpose()).transpose() * (z.rowwise() - mean.transpose()) / 1999.0;
  CHECK((c - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 0.1);
}

TEST_CASE("capabilities report the first missing requirement")
{
  const Capabilities have{ true, false, false, false };
  CHECK(have.missing({ false, true, false, false }) == "sampler required");
  CHECK(have.missing({ true, false, false, false }).empty());
  CHECK(Capabilities{}.missing({ false, false, false, true }) == "invertible map required");
}

TEST_CASE("model json round trip")
{
  const auto dir = std::filesystem::temp_directory_path() / "mocp_models_test";
  std::filesystem::create_directories(dir);
  const Dataset train = gen_unimodal(200, RngStream(14));
  const Vector x = Vector::Constant(1, 0.25);
  Vector y(2);
  y << 0.1, -0.3;

  const auto cg = ConditionalGaussian::fit(train);
  save_model(cg, (dir / "cg.json").string());
  const auto cg2 = load_model((dir / "cg.json").string());
  CHECK(cg2->kind() == "conditional_gaussian");
  CHECK(cg2->log_density(x, y) == cg.log_density(x, y));

  const KnnKde kde(train.x, train.y, 10, 0.15);
  save_model(kde, (dir / "kde.json").string());
  CHECK(load_model((dir / "kde.json").string())->log_density(x, y) == kde.log_density(x, y));

  const OracleToyModel oracle(ToyProcessSpec::bimodal());
  const auto o2 = model_from_json(model_to_json(oracle));
  CHECK(o2->log_density(x, y) == oracle.log_density(x, y));

  nlohmann::json bad = model_to_json(cg);
  bad["schema_version"] = 99;
  CHECK_THROWS_AS(model_from_json(bad), InvalidData);
  CHECK_THROWS_AS(load_model((dir / "missing.json").string()), InvalidConfig);
  std::filesystem::remove_all(dir);
}
