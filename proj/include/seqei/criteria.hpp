#pragma once

#include "seqei/emulator.hpp"

#include <cstdint>
#include <string_view>
#include <vector>

namespace seqei {

enum class CriterionKind {
  minimize,
  minimize_exponentiated,
  minimize_weighted,
  contour,
  multi_contour,
  percentile,
  noisy_quantile,
  constrained_minimize,
};

std::string_view to_string(CriterionKind kind);
CriterionKind parse_criterion_kind(std::string_view name);

/// Which improvement function is in force, with its parameters. Fields not
/// used by `kind` are ignored.
struct CriterionSpec {
  CriterionKind kind = CriterionKind::minimize;
  double a = 0.0;              // contour level
  std::vector<double> levels;  // multi_contour, strictly increasing
  double alpha = 1.96;         // epsilon(x) = alpha * s(x)
  int g = 1;                   // exponent (exponentiated: >= 1, percentile: even)
  double w = 0.5;              // weighted EI
  double lambda = 1.96;        // noisy quantile multiplier
  double p_target = 0.5;       // percentile
  double constraint_lo = 0.0;  // constrained_minimize feasible interval
  double constraint_hi = 0.0;

  /// Throws std::invalid_argument if a parameter required by `kind` is out of range.
  void validate() const;

  /// Kinds whose incumbent is the smallest output seen so far.
  bool minimizes() const;
  /// Kinds that chase a level set rather than an optimum.
  bool is_contour_family() const;

  static CriterionSpec minimize_spec() { return {}; }
  static CriterionSpec contour_spec(double level, double alpha = 1.96);
};

/// Best value so far, matched to the criterion kind: y_min, q_min, or the
/// current percentile estimate.
struct Incumbent {
  double value = 0.0;
};

// Improvement functions, evaluated at a realized output y.
double improvement_min(double y, double y_min);
double improvement_contour(double y, double pred_sd, double a, double alpha);

// Closed-form expected improvements under y ~ N(pred.mean, pred.sd^2).
// Every function handles sd = 0 as the degenerate law and returns >= 0.
double ei_min(const PredictiveDistribution& pred, double y_min);
double ei_min_exponentiated(const PredictiveDistribution& pred, double y_min, int g);
double ei_min_weighted(const PredictiveDistribution& pred, double y_min, double w);
double ei_contour(const PredictiveDistribution& pred, double a, double alpha);
double ei_multi_contour(const PredictiveDistribution& pred, const std::vector<double>& levels,
                        double alpha);
double ei_percentile(const PredictiveDistribution& pred, double nu_hat, double alpha, int g);
double ei_noisy_quantile(const PredictiveDistribution& pred, double q_min, double lambda);
double feasibility_probability(const PredictiveDistribution& pred_c, double lo, double hi);
double ei_constrained(const PredictiveDistribution& pred_y, double y_min,
                      const PredictiveDistribution& pred_c, double lo, double hi);

/// Derivative of ei_min with respect to s: phi(u).
double ei_min_ds(const PredictiveDistribution& pred, double y_min);

/// Empirical p-quantile of predictive means over n_mc uniform draws from the
/// model's domain (linear interpolation between order statistics).
double estimate_percentile(const GpModel& model, double p_target, int n_mc, std::uint64_t seed);

/// Dispatches on spec.kind. pred_c is required for constrained_minimize.
double expected_improvement(const CriterionSpec& spec, const PredictiveDistribution& pred,
                            const Incumbent& incumbent,
                            const PredictiveDistribution* pred_c = nullptr);

}  // namespace seqei
