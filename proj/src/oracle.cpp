#include "seqei/oracle.hpp"

#include "seqei/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace seqei {

McEstimate mc_ei(const PredictiveDistribution& pred, const std::function<double(double)>& improvement,
                 long n_samples, std::uint64_t seed) {
  if (n_samples < 2) throw std::invalid_argument("mc_ei needs at least two samples");
  Rng rng(seed);
  // Welford running moments.
  double mean = 0.0;
  double m2 = 0.0;
  for (long i = 0; i < n_samples; ++i) {
    const double v = improvement(pred.mean + pred.sd * rng.normal());
    const double delta = v - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (v - mean);
  }
  const double var = m2 / static_cast<double>(n_samples - 1);
  return {mean, std::sqrt(std::max(var, 0.0) / static_cast<double>(n_samples)), n_samples};
}

bool has_mc_oracle(CriterionKind kind) {
  return kind != CriterionKind::minimize_weighted && kind != CriterionKind::constrained_minimize;
}

std::function<double(double)> improvement_function(const CriterionSpec& spec,
                                                   const PredictiveDistribution& pred,
                                                   const Incumbent& incumbent) {
  const double m = incumbent.value;
  const double eps = spec.alpha * pred.sd;
  switch (spec.kind) {
    case CriterionKind::minimize:
      return [m](double y) { return improvement_min(y, m); };
    case CriterionKind::minimize_exponentiated:
      return [m, g = spec.g](double y) { return std::pow(improvement_min(y, m), g); };
    case CriterionKind::contour:
      return [sd = pred.sd, a = spec.a, alpha = spec.alpha](double y) {
        return improvement_contour(y, sd, a, alpha);
      };
    case CriterionKind::multi_contour:
      return [eps, levels = spec.levels](double y) {
        double nearest = eps * eps;
        for (double a : levels) nearest = std::min(nearest, (y - a) * (y - a));
        return eps * eps - nearest;
      };
    case CriterionKind::percentile:
      return [eps, nu = m, g = spec.g](double y) {
        const double cap = std::pow(eps, g);
        return cap - std::min(std::pow(y - nu, g), cap);
      };
    case CriterionKind::noisy_quantile:
      return [m, shift = spec.lambda * pred.sd](double y) { return std::max(0.0, m - (y - shift)); };
    case CriterionKind::minimize_weighted:
    case CriterionKind::constrained_minimize:
      break;
  }
  throw std::invalid_argument("criterion '" + std::string(to_string(spec.kind)) +
                              "' has no single-output improvement function to sample");
}

VerifyReport verify_criterion(const CriterionSpec& base, int trials, long n_samples,
                              std::uint64_t seed, const ClosedForm& closed_form) {
  if (!has_mc_oracle(base.kind)) {
    throw std::invalid_argument("criterion '" + std::string(to_string(base.kind)) +
                                "' cannot be verified by Monte Carlo");
  }
  if (trials < 1) throw std::invalid_argument("verification needs at least one trial");
  base.validate();
  VerifyReport report;
  report.kind = base.kind;
  report.trials = trials;
  report.n_samples = n_samples;
  report.seed = seed;

  for (int t = 0; t < trials; ++t) {
    Rng rng(derive_seed(seed, 2 * static_cast<std::uint64_t>(t)));
    TrialResult r;
    r.spec = base;
    r.pred = {rng.uniform(-2.0, 2.0), rng.uniform(0.1, 2.0)};
    const auto offset = [&] { return r.pred.mean + r.pred.sd * rng.uniform(-3.0, 3.0); };
    switch (base.kind) {
      case CriterionKind::contour:
        r.spec.a = offset();
        break;
      case CriterionKind::multi_contour: {
        const std::size_t k = std::max<std::size_t>(base.levels.size(), 1);
        r.spec.levels.clear();
        while (r.spec.levels.size() < k) r.spec.levels.push_back(offset());
        std::sort(r.spec.levels.begin(), r.spec.levels.end());
        r.spec.levels.erase(std::unique(r.spec.levels.begin(), r.spec.levels.end()),
                            r.spec.levels.end());
        break;
      }
      case CriterionKind::noisy_quantile:
        r.incumbent.value = offset() - r.spec.lambda * r.pred.sd;
        break;
      default:
        r.incumbent.value = offset();
        break;
    }
    r.closed_form = closed_form ? closed_form(r.spec, r.pred, r.incumbent)
                                : expected_improvement(r.spec, r.pred, r.incumbent);
    const McEstimate mc = mc_ei(r.pred, improvement_function(r.spec, r.pred, r.incumbent),
                                n_samples, derive_seed(seed, 2 * static_cast<std::uint64_t>(t) + 1));
    r.mc_mean = mc.mean;
    r.mc_stderr = mc.std_error;
    const double diff = r.closed_form - mc.mean;
    if (mc.std_error > 0.0) {
      r.z = diff / mc.std_error;
    } else {
      r.z = std::abs(diff) <= 1e-12 * std::max(1.0, std::abs(mc.mean))
                ? 0.0
                : std::copysign(std::numeric_limits<double>::infinity(), diff);
    }
    report.max_abs_z = std::max(report.max_abs_z, std::abs(r.z));
    if (std::abs(r.z) > report.z_limit) ++report.failures;
    report.results.push_back(std::move(r));
  }
  report.pass = report.failures == 0;
  return report;
}

}  // namespace seqei
