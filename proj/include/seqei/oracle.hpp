#pragma once

#include "seqei/criteria.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace seqei {

/// Monte Carlo estimate of an expectation with its standard error
/// (sample sd / sqrt(n)).
struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  long n_samples = 0;
};

/// Mean of improvement(y) over y ~ N(pred.mean, pred.sd^2), sampled with the
/// documented Box-Muller stream of Rng(seed).
McEstimate mc_ei(const PredictiveDistribution& pred, const std::function<double(double)>& improvement,
                 long n_samples, std::uint64_t seed);

/// Improvement function of `spec` at a fixed predictive law, for Monte Carlo
/// checks. Throws for kinds that are not the expectation of a single-output
/// improvement function (weighted and constrained).
std::function<double(double)> improvement_function(const CriterionSpec& spec,
                                                   const PredictiveDistribution& pred,
                                                   const Incumbent& incumbent);

bool has_mc_oracle(CriterionKind kind);

struct TrialResult {
  PredictiveDistribution pred;
  CriterionSpec spec;
  Incumbent incumbent;
  double closed_form = 0.0;
  double mc_mean = 0.0;
  double mc_stderr = 0.0;
  double z = 0.0;
};

struct VerifyReport {
  CriterionKind kind = CriterionKind::minimize;
  int trials = 0;
  long n_samples = 0;
  std::uint64_t seed = 0;
  std::vector<TrialResult> results;
  double max_abs_z = 0.0;
  int failures = 0;  // trials with |z| > z_limit
  double z_limit = 4.0;
  bool pass = false;
};

using ClosedForm = std::function<double(const CriterionSpec&, const PredictiveDistribution&,
                                        const Incumbent&)>;

/// Draws `trials` random predictive laws with incumbents or levels placed
/// within three sd of the mean, and compares the closed form with mc_ei.
/// Passes when every |z| <= 4. `closed_form` replaces the library's closed
/// form, e.g. to check that a corrupted formula is caught.
VerifyReport verify_criterion(const CriterionSpec& base, int trials, long n_samples,
                              std::uint64_t seed, const ClosedForm& closed_form = {});

}  // namespace seqei
