#pragma once

#include "seqei/design.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace seqei {

/// Thrown when the correlation matrix cannot be factorized.
class FactorizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class TransformKind { identity, sqrt, log1p };

/// Monotone output transformation y = t(z) applied before modelling.
class Transformation {
 public:
  Transformation() = default;
  explicit Transformation(TransformKind kind) : kind_(kind) {}

  static Transformation parse(std::string_view name);

  TransformKind kind() const { return kind_; }
  std::string_view name() const;

  /// Whether z lies in the domain of the forward map.
  bool admits(double z) const;
  double forward(double z) const;
  double inverse(double y) const;

  bool operator==(const Transformation&) const = default;

 private:
  TransformKind kind_ = TransformKind::identity;
};

/// Evaluated runs: inputs in natural units, raw outputs and their transform.
struct Dataset {
  Eigen::MatrixXd X;
  Eigen::VectorXd z_raw;
  Eigen::VectorXd y;
  Transformation transformation;
  Domain domain;

  /// Validates distinct rows, output finiteness and the transform's domain.
  Dataset(Eigen::MatrixXd inputs, Eigen::VectorXd raw, Transformation t, Domain dom);

  Eigen::Index size() const { return X.rows(); }
  Eigen::Index dims() const { return X.cols(); }

  /// Copy with one more run appended.
  Dataset with_run(const Eigen::Ref<const Eigen::VectorXd>& x, double z) const;
};

/// Power-exponential correlation parameters on unit-scaled inputs.
struct CorrelationParams {
  Eigen::VectorXd theta;  // >= 0
  Eigen::VectorXd p;      // in [1, 2]

  static CorrelationParams uniform(Eigen::Index dims, double theta, double p);
  void validate(Eigen::Index dims) const;
};

/// exp(-sum_j theta_j |x_j - x2_j|^p_j).
double correlation(const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& x2,
                   const CorrelationParams& params);

struct ProfileLikelihood {
  double loglik = 0.0;
  double mu = 0.0;
  double sigma2 = 0.0;
};

/// Gaussian log-likelihood with mu and sigma^2 concentrated out, evaluated on
/// the dataset's unit-scaled inputs. Throws FactorizationError when
/// R + nugget*I is not numerically positive definite.
ProfileLikelihood profile_loglik(const Dataset& data, const CorrelationParams& params,
                                 double nugget);

struct FitConfig;

struct PredictiveDistribution {
  double mean = 0.0;
  double sd = 0.0;
};

struct Diagnostics {
  Eigen::VectorXd loo_means;
  Eigen::VectorXd loo_sds;
  Eigen::VectorXd standardized_residuals;

  double max_abs_residual() const;
  double rms_residual() const;
};

/// Fitted constant-mean GP emulator. Immutable once built; prediction is
/// safe from several threads.
class GpModel {
 public:
  /// Factorizes at the given parameters with profiled mu and sigma^2.
  static GpModel build(Dataset data, CorrelationParams params, double nugget);
  /// Factorizes at fully specified parameters (used when reloading a model).
  static GpModel restore(Dataset data, CorrelationParams params, double nugget, double mu,
                         double sigma2, double loglik);

  const Dataset& dataset() const { return data_; }
  const CorrelationParams& params() const { return params_; }
  double mu() const { return mu_; }
  double sigma2() const { return sigma2_; }
  double nugget() const { return nugget_; }
  double loglik() const { return loglik_; }
  const Eigen::MatrixXd& chol() const { return chol_; }
  /// (R + nugget I)^-1 (y - mu 1)
  const Eigen::VectorXd& alpha() const { return alpha_; }

  /// Set when the outputs were constant and sigma^2 was floored.
  bool degenerate_variance() const { return degenerate_; }
  /// Parameters are maximum-likelihood plug-ins; s(x) ignores their uncertainty.
  bool plug_in() const { return true; }

  PredictiveDistribution predict(const Eigen::Ref<const Eigen::VectorXd>& x) const;

 private:
  GpModel(Dataset data, CorrelationParams params, double nugget);
  void factorize();

  Dataset data_;
  CorrelationParams params_;
  double nugget_ = 0.0;
  double mu_ = 0.0;
  double sigma2_ = 0.0;
  double loglik_ = 0.0;
  bool degenerate_ = false;
  Eigen::MatrixXd unit_X_;
  Eigen::MatrixXd chol_;
  Eigen::VectorXd alpha_;
  Eigen::VectorXd whitened_resid_;  // L^-1 (y - mu 1)
  Eigen::VectorXd whitened_ones_;   // L^-1 1

  friend GpModel fit(const Dataset&, const FitConfig&);
};

struct FitConfig {
  /// Diagonal inflation of the correlation matrix; escalated x10 on failure.
  double nugget = 1e-8;
  double max_nugget = 1e-4;
  /// Multistart count; 0 means 10 * d.
  int starts = 0;
  std::uint64_t seed = 0;
  double log10_theta_min = -6.0;
  double log10_theta_max = 3.0;
  /// Hold every p_j at this value instead of estimating it.
  std::optional<double> fixed_p;
  /// Extra start point, e.g. the previous fit in a sequential loop.
  std::optional<CorrelationParams> warm_start;
  /// Local search budget per start, in likelihood evaluations.
  int max_evals_per_start = 400;
};

/// Maximum-likelihood fit over (theta, p) by bounded multistart Nelder-Mead
/// with theta searched on a log scale. Deterministic given config.seed.
GpModel fit(const Dataset& data, const FitConfig& config = {});

inline PredictiveDistribution predict(const GpModel& model,
                                      const Eigen::Ref<const Eigen::VectorXd>& x) {
  return model.predict(x);
}

/// Leave-one-out predictions with (theta, p, mu, sigma^2) held fixed.
Diagnostics loo_cv(const GpModel& model);

struct TransformScore {
  Transformation transformation;
  bool admissible = false;
  double max_abs_residual = 0.0;
  double rms_residual = 0.0;
};

struct TransformSelection {
  Transformation chosen;
  std::vector<TransformScore> scores;
};

/// Fits one model per candidate transformation and keeps the one with the
/// smallest maximum |standardized LOO residual|; ties go to the RMS residual
/// closest to 1, then to candidate order. Candidates whose domain excludes
/// some output are skipped.
TransformSelection choose_transformation(
    const Eigen::MatrixXd& X, const Eigen::VectorXd& z_raw, const Domain& domain,
    const FitConfig& config = {},
    const std::vector<TransformKind>& candidates = {TransformKind::identity, TransformKind::sqrt,
                                                    TransformKind::log1p});

}  // namespace seqei
