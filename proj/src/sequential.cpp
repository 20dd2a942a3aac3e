#include "seqei/sequential.hpp"

#include "seqei/rng.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace seqei {

namespace {

constexpr double kTieRel = 1e-12;

bool coincides_with_training(const GpModel& model, const Eigen::VectorXd& x) {
  const Dataset& d = model.dataset();
  const Eigen::VectorXd u = d.domain.to_unit(x);
  const Eigen::MatrixXd ux = d.domain.rows_to_unit(d.X);
  for (Eigen::Index i = 0; i < ux.rows(); ++i) {
    if ((ux.row(i).transpose() - u).cwiseAbs().maxCoeff() <= 1e-12) return true;
  }
  return false;
}

bool feasible(double c, const CriterionSpec& spec) {
  return c >= spec.constraint_lo && c <= spec.constraint_hi;
}

// Index of the smallest y, restricted to feasible runs when constraint values are given.
Eigen::Index best_run(const Eigen::VectorXd& y, const CriterionSpec& spec,
                      const Eigen::VectorXd* constraint_values) {
  Eigen::Index best = -1;
  if (spec.kind == CriterionKind::constrained_minimize && constraint_values != nullptr) {
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      if (feasible((*constraint_values)[i], spec) && (best < 0 || y[i] < y[best])) best = i;
    }
  }
  if (best < 0) y.minCoeff(&best);
  return best;
}

}  // namespace

EiSurface ei_surface(const GpModel& model, const CriterionSpec& spec, const Incumbent& incumbent,
                     const CandidateSet& candidates, const GpModel* constraint_model) {
  if (spec.kind == CriterionKind::constrained_minimize && constraint_model == nullptr) {
    throw std::invalid_argument("constrained EI needs a constraint model");
  }
  const Eigen::Index m = candidates.size();
  EiSurface s{candidates.points, Eigen::VectorXd(m), Eigen::VectorXd(m), Eigen::VectorXd(m)};
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::VectorXd x = candidates.points.row(i).transpose();
    const PredictiveDistribution pred = model.predict(x);
    s.mean[i] = pred.mean;
    s.sd[i] = pred.sd;
    if (coincides_with_training(model, x)) {
      s.ei[i] = 0.0;
      continue;
    }
    if (constraint_model != nullptr) {
      const PredictiveDistribution pc = constraint_model->predict(x);
      s.ei[i] = expected_improvement(spec, pred, incumbent, &pc);
    } else {
      s.ei[i] = expected_improvement(spec, pred, incumbent);
    }
  }
  return s;
}

Proposal propose(const GpModel& model, const CriterionSpec& spec, const Incumbent& incumbent,
                 const CandidateSet& candidates, const GpModel* constraint_model,
                 bool keep_surface) {
  EiSurface s = ei_surface(model, spec, incumbent, candidates, constraint_model);
  const double top = s.ei.maxCoeff();
  const double floor = top - kTieRel * std::abs(top);
  Proposal p;
  int at_top = 0;
  for (Eigen::Index i = 0; i < s.ei.size(); ++i) {
    if (s.ei[i] >= floor) {
      if (at_top == 0) p.index = i;
      ++at_top;
    }
  }
  p.x_new = candidates.points.row(p.index).transpose();
  p.ei_value = s.ei[p.index];
  p.tie_broken = at_top > 1;
  if (keep_surface) p.surface = std::move(s);
  return p;
}

Incumbent update_incumbent(const GpModel& model, const CriterionSpec& spec,
                           const IncumbentOptions& options) {
  const Dataset& d = model.dataset();
  switch (spec.kind) {
    case CriterionKind::minimize:
    case CriterionKind::minimize_exponentiated:
    case CriterionKind::minimize_weighted:
    case CriterionKind::constrained_minimize:
      return {d.y[best_run(d.y, spec, options.constraint_values)]};
    case CriterionKind::noisy_quantile: {
      double q = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < d.size(); ++i) {
        const auto pred = model.predict(d.X.row(i).transpose());
        q = std::min(q, pred.mean - spec.lambda * pred.sd);
      }
      return {q};
    }
    case CriterionKind::percentile:
      return {estimate_percentile(model, spec.p_target, options.percentile_mc,
                                  options.percentile_seed)};
    case CriterionKind::contour:
    case CriterionKind::multi_contour:
      return {0.0};
  }
  return {0.0};
}

std::string_view to_string(StopReason r) {
  switch (r) {
    case StopReason::none: return "none";
    case StopReason::ei_below_threshold: return "ei_below_threshold";
    case StopReason::budget_exhausted: return "budget_exhausted";
    case StopReason::simulator_failure: return "simulator_failure";
  }
  return "none";
}

StopReason parse_stop_reason(std::string_view s) {
  for (auto r : {StopReason::none, StopReason::ei_below_threshold, StopReason::budget_exhausted,
                 StopReason::simulator_failure}) {
    if (to_string(r) == s) return r;
  }
  throw std::invalid_argument("unknown stop reason '" + std::string(s) + "'");
}

StopDecision stop_check(double ei_max, double threshold, int runs_used, int budget) {
  if (!(threshold >= 0.0)) throw std::invalid_argument("stop threshold must be >= 0");
  if (ei_max < threshold) return {true, StopReason::ei_below_threshold};
  if (runs_used >= budget) return {true, StopReason::budget_exhausted};
  return {};
}

ModelSummary ModelSummary::of(const GpModel& m) {
  return {m.params().theta, m.params().p, m.mu(), m.sigma2(), m.nugget(), m.loglik()};
}

RunHistory run_loop(const Dataset& initial, const Simulator& simulator,
                    const CandidateSet& candidates, const LoopConfig& config,
                    const Simulator* constraint_sim, const Eigen::VectorXd* initial_constraint) {
  const CriterionSpec& spec = config.criterion;
  spec.validate();
  if (candidates.points.cols() != initial.dims()) {
    throw std::invalid_argument("candidate/domain dimension mismatch");
  }
  if (config.refit_every < 1) throw std::invalid_argument("refit_every must be >= 1");
  if (config.stop.budget < 0) throw std::invalid_argument("budget must be >= 0");
  const bool constrained = spec.kind == CriterionKind::constrained_minimize;
  if (constrained && (constraint_sim == nullptr || initial_constraint == nullptr ||
                      initial_constraint->size() != initial.size())) {
    throw std::invalid_argument("constrained loop needs a constraint simulator and initial values");
  }

  RunHistory h;
  h.initial_X = initial.X;
  h.initial_z = initial.z_raw;
  if (config.stop.threshold) {
    h.threshold = *config.stop.threshold;
  } else if (spec.is_contour_family()) {
    throw std::invalid_argument("contour criteria need an explicit stop threshold");
  } else {
    h.threshold = 1e-3 * (initial.y.maxCoeff() - initial.y.minCoeff());
  }
  if (!(h.threshold >= 0.0)) throw std::invalid_argument("stop threshold must be >= 0");

  Dataset data = initial;
  Eigen::VectorXd cvals = constrained ? *initial_constraint : Eigen::VectorXd();
  std::optional<CorrelationParams> last;
  double last_nugget = config.fit.nugget;

  for (int iter = 0;; ++iter) {
    const int added = static_cast<int>(h.iterations.size());
    std::optional<GpModel> model;
    if (last && iter % config.refit_every != 0) {
      try {
        model = GpModel::build(data, *last, last_nugget);
      } catch (const FactorizationError&) {
        model.reset();
      }
    }
    if (!model) {
      FitConfig fc = config.fit;
      fc.seed = derive_seed(config.seed, static_cast<std::uint64_t>(iter));
      if (last) fc.warm_start = last;
      model = fit(data, fc);
    }
    last = model->params();
    last_nugget = model->nugget();

    std::optional<GpModel> cmodel;
    if (constrained) {
      const Dataset cdata(data.X, cvals, Transformation(), data.domain);
      FitConfig fc = config.fit;
      fc.seed = derive_seed(config.seed, 1000000ULL + static_cast<std::uint64_t>(iter));
      cmodel = fit(cdata, fc);
    }

    IncumbentOptions io;
    io.percentile_mc = config.percentile_mc;
    io.percentile_seed = derive_seed(config.seed, 2000000ULL + static_cast<std::uint64_t>(iter));
    io.constraint_values = constrained ? &cvals : nullptr;
    const Incumbent inc = update_incumbent(*model, spec, io);

    Proposal prop = propose(*model, spec, inc, candidates, cmodel ? &*cmodel : nullptr,
                            config.keep_surfaces);
    StopDecision decision = stop_check(prop.ei_value, h.threshold, added, config.stop.budget);
    if (!decision.stop && prop.ei_value == 0.0 && coincides_with_training(*model, prop.x_new)) {
      decision = {true, StopReason::ei_below_threshold};
    }

    h.final_incumbent = inc.value;
    h.final_model = ModelSummary::of(*model);
    if (spec.minimizes()) {
      const Eigen::Index b = best_run(data.y, spec, constrained ? &cvals : nullptr);
      h.best_x = data.X.row(b).transpose();
      h.best_z = data.z_raw[b];
    }
    if (decision.stop) {
      h.stop_reason = decision.reason;
      h.final_ei_max = prop.ei_value;
      break;
    }

    IterationRecord rec;
    rec.index = added + 1;
    rec.x = prop.x_new;
    rec.incumbent = inc.value;
    rec.ei_max = prop.ei_value;
    rec.tie_broken = prop.tie_broken;
    rec.model = ModelSummary::of(*model);
    rec.surface = std::move(prop.surface);
    try {
      rec.z = simulator(rec.x);
      if (!std::isfinite(rec.z)) throw std::runtime_error("simulator returned a non-finite value");
      if (constrained) {
        rec.constraint = (*constraint_sim)(rec.x);
        if (!std::isfinite(rec.constraint)) {
          throw std::runtime_error("constraint simulator returned a non-finite value");
        }
      }
      rec.y = data.transformation.forward(rec.z);
    } catch (const std::exception& e) {
      h.stop_reason = StopReason::simulator_failure;
      h.failure_message = e.what();
      break;
    }
    data = data.with_run(rec.x, rec.z);
    if (constrained) {
      cvals.conservativeResize(cvals.size() + 1);
      cvals[cvals.size() - 1] = rec.constraint;
    }
    h.iterations.push_back(std::move(rec));
  }
  return h;
}

}  // namespace seqei
