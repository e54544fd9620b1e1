#include "mocp/knn_kde.hpp"

#include "mocp/special.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace mocp {

KnnKde::KnnKde(Matrix train_x, Matrix train_y, Index k, double sigma)
  : train_x_(std::move(train_x))
  , train_y_(std::move(train_y))
  , k_(k)
  , sigma_(sigma)
{
  if (train_x_.rows() != train_y_.rows() || train_y_.rows() < 1)
    throw InvalidData("knn kde: training matrices must be nonempty with matching rows");
  if (k_ < 1 || k_ > train_y_.rows())
    throw InvalidConfig("knn kde: k must lie in [1, n_train]");
  if (!(sigma_ > 0.0))
    throw InvalidConfig("knn kde: bandwidth must be positive");
}

std::vector<double> KnnKde::default_sigma_grid()
{
  return { 0.01, 0.02, 0.05, 0.1, 0.15, 0.2, 0.3, 0.5, 0.75, 1.0 };
}

std::vector<Index> KnnKde::neighbors(const Vector& x) const
{
  if (x.size() != input_dim())
    throw InvalidData("knn kde: input dimension mismatch");
  const Index n = train_x_.rows();
  std::vector<double> dist(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i)
    dist[static_cast<std::size_t>(i)] = (train_x_.row(i).transpose() - x).squaredNorm();
  std::vector<Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Index{ 0 });
  auto closer = [&](Index a, Index b) {
    const double da = dist[static_cast<std::size_t>(a)], db = dist[static_cast<std::size_t>(b)];
    return da < db || (da == db && a < b);
  };
  std::nth_element(idx.begin(), idx.begin() + (k_ - 1), idx.end(), closer);
  idx.resize(static_cast<std::size_t>(k_));
  std::sort(idx.begin(), idx.end(), closer);
  return idx;
}

std::vector<std::pair<Index, double>> KnnKde::weights(const Vector& x) const
{
  std::vector<std::pair<Index, double>> out;
  for (Index i : neighbors(x))
    out.emplace_back(i, 1.0 / static_cast<double>(k_));
  return out;
}

double KnnKde::log_density_from(const std::vector<Index>& nn, const Vector& y, double sigma) const
{
  if (y.size() != output_dim())
    throw InvalidData("knn kde: output dimension mismatch");
  const double d = static_cast<double>(output_dim());
  Eigen::ArrayXd terms(static_cast<Index>(nn.size()));
  for (std::size_t j = 0; j < nn.size(); ++j)
    terms(static_cast<Index>(j)) = -0.5 * (y - train_y_.row(nn[j]).transpose()).squaredNorm() / (sigma * sigma);
  const double mx = terms.maxCoeff();
  const double lse = mx + std::log((terms - mx).exp().sum());
  return lse - std::log(static_cast<double>(nn.size())) - d * (kLogSqrt2Pi + std::log(sigma));
}

double KnnKde::log_density(const Vector& x, const Vector& y) const
{
  return log_density_from(neighbors(x), y, sigma_);
}

Matrix KnnKde::sample(const Vector& x, Index count, const RngStream& rng) const
{
  if (count < 0)
    throw InvalidConfig("sample count must be nonnegative");
  const auto nn = neighbors(x);
  auto engine = rng.engine();
  std::uniform_int_distribution<std::size_t> pick(0, nn.size() - 1);
  std::normal_distribution<double> normal;
  Matrix out(count, output_dim());
  for (Index r = 0; r < count; ++r) {
    const Index src = nn[pick(engine)];
    for (Index i = 0; i < output_dim(); ++i)
      out(r, i) = train_y_(src, i) + sigma_ * normal(engine);
  }
  return out;
}

double KnnKde::mean_nll(const Dataset& data) const
{
  double total = 0.0;
  for (Index i = 0; i < data.n(); ++i)
    total -= log_density(data.input(i), data.output(i));
  return total / static_cast<double>(data.n());
}

KnnKde KnnKde::fit(const Dataset& train, Index k, std::span<const double> sigma_grid, const Dataset& val)
{
  train.validate();
  val.validate();
  if (sigma_grid.empty())
    throw InvalidConfig("knn kde: empty bandwidth grid");
  for (double s : sigma_grid)
    if (!(s > 0.0))
      throw InvalidConfig("knn kde: bandwidths must be positive");

  KnnKde model(train.x, train.y, k, sigma_grid.front());
  std::vector<std::vector<Index>> nn(static_cast<std::size_t>(val.n()));
  for (Index i = 0; i < val.n(); ++i)
    nn[static_cast<std::size_t>(i)] = model.neighbors(val.input(i));

  double best_nll = kInf;
  double best_sigma = sigma_grid.front();
  for (double s : sigma_grid) {
    double nll = 0.0;
    for (Index i = 0; i < val.n(); ++i)
      nll -= model.log_density_from(nn[static_cast<std::size_t>(i)], val.output(i), s);
    nll /= static_cast<double>(val.n());
    if (nll < best_nll) {
      best_nll = nll;
      best_sigma = s;
    }
  }
  model.sigma_ = best_sigma;
  return model;
}

} // namespace mocp
