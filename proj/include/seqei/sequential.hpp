#pragma once

#include "seqei/criteria.hpp"
#include "seqei/design.hpp"
#include "seqei/emulator.hpp"
#include "seqei/simulators.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace seqei {

/// Predictions and criterion values over a candidate set.
struct EiSurface {
  Eigen::MatrixXd points;
  Eigen::VectorXd mean;
  Eigen::VectorXd sd;
  Eigen::VectorXd ei;
};

/// Evaluates the criterion at every candidate. Candidates that coincide with
/// a training input get EI 0. constraint_model is required for
/// constrained_minimize.
EiSurface ei_surface(const GpModel& model, const CriterionSpec& spec, const Incumbent& incumbent,
                     const CandidateSet& candidates, const GpModel* constraint_model = nullptr);

struct Proposal {
  Eigen::VectorXd x_new;
  Eigen::Index index = 0;  // row in the candidate set
  double ei_value = 0.0;
  std::optional<EiSurface> surface;
  /// More than one candidate attained the maximum (within 1e-12 relative).
  bool tie_broken = false;
};

/// Argmax of EI over the candidates; ties go to the lowest index.
Proposal propose(const GpModel& model, const CriterionSpec& spec, const Incumbent& incumbent,
                 const CandidateSet& candidates, const GpModel* constraint_model = nullptr,
                 bool keep_surface = false);

struct IncumbentOptions {
  int percentile_mc = 10000;
  std::uint64_t percentile_seed = 0;
  /// Constraint outputs per run, for constrained_minimize.
  const Eigen::VectorXd* constraint_values = nullptr;
};

/// Value to beat for the next proposal, computed from the model's data:
/// smallest y for the minimizing kinds (smallest feasible y when constrained,
/// falling back to the smallest y if no run is feasible), smallest
/// yhat - lambda*s over the runs for noisy_quantile, a fresh percentile
/// estimate for percentile. Contour kinds have no incumbent and get 0.
Incumbent update_incumbent(const GpModel& model, const CriterionSpec& spec,
                           const IncumbentOptions& options = {});

enum class StopReason { none, ei_below_threshold, budget_exhausted, simulator_failure };

std::string_view to_string(StopReason r);
StopReason parse_stop_reason(std::string_view s);

struct StopDecision {
  bool stop = false;
  StopReason reason = StopReason::none;
};

/// Stop when the best EI falls below the threshold or the budget is spent.
StopDecision stop_check(double ei_max, double threshold, int runs_used, int budget);

struct StopRule {
  /// Required for the contour kinds. For the others it defaults to 1e-3 times
  /// the range of the initial outputs.
  std::optional<double> threshold;
  int budget = 10;
};

struct LoopConfig {
  CriterionSpec criterion;
  StopRule stop;
  FitConfig fit;
  /// Re-estimate (theta, p) every k-th iteration; in between, the model is
  /// rebuilt on the new data with the previous parameters.
  int refit_every = 1;
  int percentile_mc = 10000;
  bool keep_surfaces = false;
  std::uint64_t seed = 0;
};

struct ModelSummary {
  Eigen::VectorXd theta;
  Eigen::VectorXd p;
  double mu = 0.0;
  double sigma2 = 0.0;
  double nugget = 0.0;
  double loglik = 0.0;

  static ModelSummary of(const GpModel& m);
};

struct IterationRecord {
  int index = 0;          // 1-based count of added runs
  Eigen::VectorXd x;      // evaluated input
  double z = 0.0;         // raw simulator output
  double y = 0.0;         // transformed output
  double constraint = 0.0;
  double incumbent = 0.0; // value to beat when this run was proposed
  double ei_max = 0.0;
  bool tie_broken = false;
  ModelSummary model;     // fit the proposal was made from
  std::optional<EiSurface> surface;
};

struct RunHistory {
  Eigen::MatrixXd initial_X;
  Eigen::VectorXd initial_z;
  std::vector<IterationRecord> iterations;
  StopReason stop_reason = StopReason::none;
  std::string failure_message;
  double threshold = 0.0;
  /// Incumbent after the last run (same meaning as IterationRecord::incumbent).
  double final_incumbent = 0.0;
  /// Best evaluated run for the minimizing kinds.
  Eigen::VectorXd best_x;
  double best_z = 0.0;
  ModelSummary final_model;
  /// EI values that led to stopping, when the EI rule fired.
  double final_ei_max = 0.0;
};

/// Sequential design loop: fit, propose, evaluate, repeat until stop_check
/// fires. Simulator exceptions and non-finite outputs end the loop with
/// StopReason::simulator_failure. For constrained_minimize, constraint_sim
/// and the initial constraint values must be supplied.
RunHistory run_loop(const Dataset& initial, const Simulator& simulator,
                    const CandidateSet& candidates, const LoopConfig& config,
                    const Simulator* constraint_sim = nullptr,
                    const Eigen::VectorXd* initial_constraint = nullptr);

}  // namespace seqei
