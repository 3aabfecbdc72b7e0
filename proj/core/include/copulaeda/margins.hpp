#pragma once

#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Core>

namespace copulaeda {

enum class MarginKind
{
  Normal,
  Kernel,
  TruncNormal,
  BetaRescaled
};

std::string_view to_string(MarginKind kind);
std::optional<MarginKind> parse_margin_kind(std::string_view name);

//! Floor applied to standard deviations and bandwidths of degenerate samples.
inline constexpr double kMinScale = 1e-8;

struct NormalParams
{
  double mu = 0.0;
  double sigma = 1.0;
};

//! Normal-kernel smoothed empirical distribution.
struct KernelParams
{
  std::vector<double> sample; // sorted ascending
  double bandwidth = 1.0;
};

struct TruncNormalParams
{
  double mu = 0.0;
  double sigma = 1.0;
  double lower = 0.0;
  double upper = 1.0;
};

//! Beta(a, b) on [lower, upper] through the map (x - lower) / (upper - lower).
struct BetaRescaledParams
{
  double lower = 0.0;
  double upper = 1.0;
  double a = 1.0;
  double b = 1.0;
};

//! A fitted univariate margin. Immutable after construction.
class MarginModel
{
public:
  using Params = std::variant<NormalParams, KernelParams, TruncNormalParams, BetaRescaledParams>;

  explicit MarginModel(Params params);

  MarginKind kind() const;
  const Params& params() const { return params_; }

  double cdf(double x) const;
  //! Inverse of cdf; p is clamped to the open unit interval.
  double quantile(double p) const;

private:
  Params params_;
};

//! Fit a margin of `kind` to `sample`. `lower` and `upper` are the problem
//! bounds for this coordinate (used by TruncNormal and BetaRescaled).
MarginModel fit_margin(MarginKind kind,
                       const Eigen::Ref<const Eigen::VectorXd>& sample,
                       double lower,
                       double upper);

inline double margin_cdf(const MarginModel& model, double x)
{
  return model.cdf(x);
}

inline double margin_quantile(const MarginModel& model, double p)
{
  return model.quantile(p);
}

//! Silverman's rule of thumb 0.9 * min(sd, IQR / 1.34) * m^(-1/5), floored
//! at kMinScale. `sd` uses the m - 1 denominator.
double silverman_bandwidth(const Eigen::Ref<const Eigen::VectorXd>& sample);

} // namespace copulaeda
