#pragma once

#include "mocp/predictor.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace mocp {

struct MonteCarloParams
{
  Index L = 100;
  Index K = 100;
};

//! A conformity score frozen at one input x. Any samples it needs were drawn
//! when it was created, so scoring and membership at x share one sample set.
class PointScore
{
public:
  virtual ~PointScore() = default;
  virtual double operator()(const Vector& y) const = 0;
};

class ConformityScore
{
public:
  virtual ~ConformityScore() = default;

  virtual std::string name() const = 0;
  virtual Capabilities requirements() const = 0;

  //! Draws whatever randomness the score needs at x from `rng`.
  virtual std::unique_ptr<PointScore> at(const Vector& x, const RngStream& rng) const = 0;

  double operator()(const Vector& x, const Vector& y, const RngStream& rng) const { return (*at(x, rng))(y); }
};

using ScorePtr = std::shared_ptr<const ConformityScore>;

Capabilities merge(const Capabilities& a, const Capabilities& b);

//! Throws CapabilityError if `model` lacks what `required` asks for.
void require(const BasePredictor& model, const Capabilities& required, const std::string& who);

// ---------------------------------------------------------------------------

//! DR-CP: s(x, y) = -f(y | x).
class DrCpScore final : public ConformityScore
{
public:
  explicit DrCpScore(ModelPtr model);
  std::string name() const override { return "dr_cp"; }
  Capabilities requirements() const override { return { true, false, false, false }; }
  std::unique_ptr<PointScore> at(const Vector& x, const RngStream& rng) const override;

private:
  ModelPtr model_;
};

//! L-CP: s(x, y) = || Q^{-1}(y; x) ||.
class LatentNormScore final : public ConformityScore
{
public:
  explicit LatentNormScore(ModelPtr model);
  std::string name() const override { return "l_cp"; }
  Capabilities requirements() const override { return { false, false, false, true }; }
  std::unique_ptr<PointScore> at(const Vector& x, const RngStream& rng) const override;

private:
  ModelPtr model_;
};

//! M-CP: max over outputs of the CQR score max(l_i - y_i, y_i - u_i) with
//! quantile levels alpha/2 and 1 - alpha/2.
class MarginalIntervalScore final : public ConformityScore
{
public:
  MarginalIntervalScore(ModelPtr model, double alpha, Index fallback_samples = 100);
  std::string name() const override { return "m_cp"; }
  Capabilities requirements() const override;
  std::unique_ptr<PointScore> at(const Vector& x, const RngStream& rng) const override;

  MarginalBounds bounds(const Vector& x, const RngStream& rng) const;
  double lower_level() const { return alpha_ / 2.0; }
  double upper_level() const { return 1.0 - alpha_ / 2.0; }

private:
  ModelPtr model_;
  double alpha_;
  Index fallback_;
};

//! Per-output CQR scores max(l_i - y_i, y_i - u_i).
Vector cqr_scores(const MarginalBounds& b, const Vector& y);

//! Point score with an explicit finite sample set: distance to the nearest
//! center. Shared by PCP, HD-PCP and STDQR.
class NearestSamplePoint final : public PointScore
{
public:
  explicit NearestSamplePoint(Matrix centers);
  double operator()(const Vector& y) const override;
  const Matrix& centers() const { return centers_; }

private:
  Matrix centers_;
};

//! PCP: distance from y to the closest of L draws from the model.
class PcpScore final : public ConformityScore
{
public:
  PcpScore(ModelPtr model, Index L);
  std::string name() const override { return "pcp"; }
  Capabilities requirements() const override { return { false, true, false, false }; }
  std::unique_ptr<PointScore> at(const Vector& x, const RngStream& rng) const override;

private:
  ModelPtr model_;
  Index L_;
};

//! HD-PCP: PCP restricted to the floor((1 - alpha) L) draws of highest density.
class HdPcpScore final : public ConformityScore
{
public:
  HdPcpScore(ModelPtr model, Index L, double alpha);
  std::string name() const override { return "hd_pcp"; }
  Capabilities requirements() const override { return { true, true, false, false }; }
  std::unique_ptr<PointScore> at(const Vector& x, const RngStream& rng) const override;

  Index kept() const { return kept_; }

private:
  ModelPtr model_;
  Index L_;
  Index kept_;
};

//! STDQR: L latent N(0, I) draws, the ceil((1 - alpha) L) of smallest norm are
//! mapped through Q(.; x) and used as PCP centers.
class StdqrScore final : public ConformityScore
{
public:
  StdqrScore(ModelPtr model, Index L, double alpha);
  std::string name() const override { return "stdqr"; }
  Capabilities requirements() const override { return { false, true, false, true }; }
  std::unique_ptr<PointScore> at(const Vector& x, const RngStream& rng) const override;

  Index kept() const { return kept_; }
  //! The latent draws used at `rng`, already restricted to the kept set and
  //! ordered by increasing norm.
  Matrix kept_latents(const RngStream& rng) const;

private:
  ModelPtr model_;
  Index L_;
  Index kept_;
};

//! -f_max(y) with f_max(y) = max_l N(y; Y_l, I) over the same L draws as
//! PcpScore at the same stream (unnormalized mixture maximum).
class SampleMaxDensityScore final : public ConformityScore
{
public:
  SampleMaxDensityScore(ModelPtr model, Index L);
  std::string name() const override { return "dr_cp_fmax"; }
  Capabilities requirements() const override { return { false, true, false, false }; }
  std::unique_ptr<PointScore> at(const Vector& x, const RngStream& rng) const override;

private:
  ModelPtr model_;
  Index L_;
};

//! Rank of value within sorted draws: (1/K) #{draws <= value}.
double ecdf_rank(const std::vector<double>& sorted_draws, double value);

//! CDF wrapper: (1/K) #{k : base(x, Yhat_k) <= base(x, y)}, Yhat_k ~ F(.|x).
//! The base score uses rng.derive(0) and the K draws rng.derive(1).
class EcdfScore final : public ConformityScore
{
public:
  EcdfScore(ScorePtr base, ModelPtr model, Index K, std::string name);
  std::string name() const override { return name_; }
  Capabilities requirements() const override;
  std::unique_ptr<PointScore> at(const Vector& x, const RngStream& rng) const override;

private:
  ScorePtr base_;
  ModelPtr model_;
  Index K_;
  std::string name_;
};

//! CP2 wrapper: base(x, y) / tau_x where tau_x is the floor(K (1 - alpha))-th
//! order statistic of base(x, Yhat_k). Streams as in EcdfScore.
class Cp2Score final : public ConformityScore
{
public:
  Cp2Score(ScorePtr base, ModelPtr model, Index K, double alpha, std::string name);
  std::string name() const override { return name_; }
  Capabilities requirements() const override;
  std::unique_ptr<PointScore> at(const Vector& x, const RngStream& rng) const override;

  double tau(const Vector& x, const RngStream& rng) const;

private:
  ScorePtr base_;
  ModelPtr model_;
  Index K_;
  Index rank_;
  std::string name_;
};

//! Strictly increasing map with its inverse.
struct MonotoneTransform
{
  std::function<double(double)> forward;
  std::function<double(double)> inverse;

  static MonotoneTransform affine(double scale, double shift);
};

class TransformedScore final : public ConformityScore
{
public:
  TransformedScore(ScorePtr base, MonotoneTransform f);
  std::string name() const override { return base_->name(); }
  Capabilities requirements() const override { return base_->requirements(); }
  std::unique_ptr<PointScore> at(const Vector& x, const RngStream& rng) const override;

private:
  ScorePtr base_;
  MonotoneTransform f_;
};

} // namespace mocp
