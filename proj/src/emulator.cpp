#include "seqei/emulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace seqei {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Smallest acceptable squared Cholesky pivot; below it the matrix is treated
// as numerically singular.
constexpr double kMinPivot = 1e-14;

// Floor on sigma^2 for constant outputs, relative to the output scale.
constexpr double kDegenerateSigma2 = 1e-12;

// Pairwise |u_i - u_k| per dimension, reused across likelihood evaluations.
class PairwiseGaps {
 public:
  explicit PairwiseGaps(const Eigen::MatrixXd& unit_x) : n_(unit_x.rows()), d_(unit_x.cols()) {
    gaps_.resize(d_);
    for (Eigen::Index j = 0; j < d_; ++j) {
      gaps_[static_cast<std::size_t>(j)] = Eigen::MatrixXd::Zero(n_, n_);
      for (Eigen::Index i = 0; i < n_; ++i) {
        for (Eigen::Index k = i + 1; k < n_; ++k) {
          const double g = std::abs(unit_x(i, j) - unit_x(k, j));
          gaps_[static_cast<std::size_t>(j)](i, k) = gaps_[static_cast<std::size_t>(j)](k, i) = g;
        }
      }
    }
  }

  Eigen::MatrixXd correlation(const CorrelationParams& params, double nugget) const {
    Eigen::MatrixXd expo = Eigen::MatrixXd::Zero(n_, n_);
    for (Eigen::Index j = 0; j < d_; ++j) {
      const double theta = params.theta[j];
      if (theta == 0.0) continue;
      const double p = params.p[j];
      const auto& g = gaps_[static_cast<std::size_t>(j)];
      if (p == 2.0) {
        expo.array() += theta * g.array().square();
      } else if (p == 1.0) {
        expo.array() += theta * g.array();
      } else {
        expo.array() += theta * g.array().pow(p);
      }
    }
    Eigen::MatrixXd r = (-expo.array()).exp().matrix();
    r.diagonal().array() += nugget;
    return r;
  }

 private:
  Eigen::Index n_;
  Eigen::Index d_;
  std::vector<Eigen::MatrixXd> gaps_;
};

// Lower Cholesky factor, or nullopt if a pivot is non-positive or tiny.
std::optional<Eigen::MatrixXd> cholesky(const Eigen::MatrixXd& r) {
  Eigen::LLT<Eigen::MatrixXd> llt(r);
  if (llt.info() != Eigen::Success) return std::nullopt;
  Eigen::MatrixXd l = llt.matrixL();
  if (l.diagonal().array().square().minCoeff() < kMinPivot) return std::nullopt;
  return l;
}

struct Concentrated {
  ProfileLikelihood lik;
  Eigen::MatrixXd chol;
  Eigen::VectorXd whitened_ones;
  Eigen::VectorXd whitened_resid;
};

Concentrated concentrate(const Eigen::MatrixXd& r, const Eigen::VectorXd& y) {
  auto l = cholesky(r);
  if (!l) {
    throw FactorizationError(
        "correlation matrix is numerically singular; increase the nugget");
  }
  const auto n = static_cast<double>(y.size());
  const auto tri = l->triangularView<Eigen::Lower>();
  Eigen::VectorXd a = tri.solve(Eigen::VectorXd::Ones(y.size()));
  Eigen::VectorXd b = tri.solve(y);
  const double mu = a.dot(b) / a.squaredNorm();
  Eigen::VectorXd w = b - mu * a;
  const double sigma2 = w.squaredNorm() / n;
  const double logdet = 2.0 * l->diagonal().array().log().sum();
  const double loglik =
      sigma2 > 0.0 ? -0.5 * (n * std::log(2.0 * std::numbers::pi * sigma2) + logdet + n) : kInf;
  return {{loglik, mu, sigma2}, std::move(*l), std::move(a), std::move(w)};
}

// Bounded Nelder-Mead minimization; points are clamped into [lo, hi].
struct NelderMead {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
  int max_evals = 400;

  template <typename F>
  std::pair<Eigen::VectorXd, double> minimize(F&& f, Eigen::VectorXd start) const {
    const Eigen::Index m = start.size();
    auto clamp = [&](Eigen::VectorXd v) { return v.cwiseMax(lo).cwiseMin(hi).eval(); };
    int evals = 0;
    auto eval = [&](const Eigen::VectorXd& v) {
      ++evals;
      return f(v);
    };

    std::vector<Eigen::VectorXd> pts;
    std::vector<double> vals;
    pts.push_back(clamp(start));
    vals.push_back(eval(pts[0]));
    for (Eigen::Index i = 0; i < m; ++i) {
      Eigen::VectorXd v = pts[0];
      const double step = 0.1 * (hi[i] - lo[i]);
      v[i] = v[i] + step <= hi[i] ? v[i] + step : v[i] - step;
      pts.push_back(v);
      vals.push_back(eval(v));
    }

    std::vector<std::size_t> order(pts.size());
    while (evals < max_evals) {
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
      const std::size_t best = order.front();
      const std::size_t worst = order.back();
      const std::size_t second = order[order.size() - 2];

      double diameter = 0.0;
      for (const auto& p : pts) diameter = std::max(diameter, (p - pts[best]).cwiseAbs().maxCoeff());
      if (std::isfinite(vals[worst]) &&
          vals[worst] - vals[best] <= 1e-10 * (1.0 + std::abs(vals[best])) && diameter < 1e-6) {
        break;
      }

      Eigen::VectorXd centroid = Eigen::VectorXd::Zero(m);
      for (std::size_t i : order) {
        if (i != worst) centroid += pts[i];
      }
      centroid /= static_cast<double>(m);

      const Eigen::VectorXd xr = clamp(centroid + (centroid - pts[worst]));
      const double fr = eval(xr);
      if (fr < vals[best]) {
        const Eigen::VectorXd xe = clamp(centroid + 2.0 * (centroid - pts[worst]));
        const double fe = eval(xe);
        if (fe < fr) {
          pts[worst] = xe;
          vals[worst] = fe;
        } else {
          pts[worst] = xr;
          vals[worst] = fr;
        }
        continue;
      }
      if (fr < vals[second]) {
        pts[worst] = xr;
        vals[worst] = fr;
        continue;
      }
      const bool outside = fr < vals[worst];
      const Eigen::VectorXd xc = outside ? clamp(centroid + 0.5 * (xr - centroid))
                                         : clamp(centroid + 0.5 * (pts[worst] - centroid));
      const double fc = eval(xc);
      if (fc < (outside ? fr : vals[worst])) {
        pts[worst] = xc;
        vals[worst] = fc;
        continue;
      }
      for (std::size_t i = 0; i < pts.size(); ++i) {
        if (i == best) continue;
        pts[i] = clamp(pts[best] + 0.5 * (pts[i] - pts[best]));
        vals[i] = eval(pts[i]);
      }
    }
    const auto it = std::min_element(vals.begin(), vals.end());
    return {pts[static_cast<std::size_t>(it - vals.begin())], *it};
  }
};

Eigen::VectorXd column_range(const Eigen::VectorXd& v) {
  Eigen::VectorXd r(2);
  r << v.minCoeff(), v.maxCoeff();
  return r;
}

}  // namespace

// ---------------------------------------------------------------------------
// Transformation

Transformation Transformation::parse(std::string_view name) {
  if (name == "identity" || name == "none") return Transformation(TransformKind::identity);
  if (name == "sqrt") return Transformation(TransformKind::sqrt);
  if (name == "log1p" || name == "log") return Transformation(TransformKind::log1p);
  throw std::invalid_argument("unknown transformation '" + std::string(name) + "'");
}

std::string_view Transformation::name() const {
  switch (kind_) {
    case TransformKind::identity: return "identity";
    case TransformKind::sqrt: return "sqrt";
    case TransformKind::log1p: return "log1p";
  }
  return "identity";
}

bool Transformation::admits(double z) const {
  if (!std::isfinite(z)) return false;
  switch (kind_) {
    case TransformKind::identity: return true;
    case TransformKind::sqrt: return z >= 0.0;
    case TransformKind::log1p: return z > -1.0;
  }
  return false;
}

double Transformation::forward(double z) const {
  if (!admits(z)) {
    throw std::domain_error("output " + std::to_string(z) + " outside the domain of the " +
                            std::string(name()) + " transformation");
  }
  switch (kind_) {
    case TransformKind::identity: return z;
    case TransformKind::sqrt: return std::sqrt(z);
    case TransformKind::log1p: return std::log1p(z);
  }
  return z;
}

double Transformation::inverse(double y) const {
  switch (kind_) {
    case TransformKind::identity: return y;
    case TransformKind::sqrt: return y * y;
    case TransformKind::log1p: return std::expm1(y);
  }
  return y;
}

// ---------------------------------------------------------------------------
// Dataset

Dataset::Dataset(Eigen::MatrixXd inputs, Eigen::VectorXd raw, Transformation t, Domain dom)
    : X(std::move(inputs)), z_raw(std::move(raw)), transformation(t), domain(std::move(dom)) {
  if (X.rows() < 1) throw std::invalid_argument("dataset needs at least one run");
  if (X.rows() != z_raw.size()) throw std::invalid_argument("dataset inputs/outputs length mismatch");
  if (X.cols() != domain.dims()) throw std::invalid_argument("dataset/domain dimension mismatch");
  y.resize(z_raw.size());
  for (Eigen::Index i = 0; i < z_raw.size(); ++i) y[i] = transformation.forward(z_raw[i]);
  const Eigen::MatrixXd u = domain.rows_to_unit(X);
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    for (Eigen::Index k = i + 1; k < u.rows(); ++k) {
      if ((u.row(i) - u.row(k)).cwiseAbs().maxCoeff() <= 1e-12) {
        throw std::invalid_argument("dataset runs " + std::to_string(i + 1) + " and " +
                                    std::to_string(k + 1) + " have identical inputs");
      }
    }
  }
}

Dataset Dataset::with_run(const Eigen::Ref<const Eigen::VectorXd>& x, double z) const {
  Eigen::MatrixXd x2(X.rows() + 1, X.cols());
  x2.topRows(X.rows()) = X;
  x2.row(X.rows()) = x.transpose();
  Eigen::VectorXd z2(z_raw.size() + 1);
  z2.head(z_raw.size()) = z_raw;
  z2[z_raw.size()] = z;
  return Dataset(std::move(x2), std::move(z2), transformation, domain);
}

// ---------------------------------------------------------------------------
// Correlation and likelihood

CorrelationParams CorrelationParams::uniform(Eigen::Index dims, double theta, double p) {
  return {Eigen::VectorXd::Constant(dims, theta), Eigen::VectorXd::Constant(dims, p)};
}

void CorrelationParams::validate(Eigen::Index dims) const {
  if (theta.size() != dims || p.size() != dims) {
    throw std::invalid_argument("correlation parameters have the wrong dimension");
  }
  for (Eigen::Index j = 0; j < dims; ++j) {
    if (!(theta[j] >= 0.0) || !std::isfinite(theta[j])) {
      throw std::invalid_argument("theta must be finite and >= 0");
    }
    if (!(p[j] >= 1.0 && p[j] <= 2.0)) throw std::invalid_argument("p must lie in [1, 2]");
  }
}

double correlation(const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& x2, const CorrelationParams& params) {
  if (x.size() != x2.size() || x.size() != params.theta.size() ||
      x.size() != params.p.size()) {
    throw std::invalid_argument("correlation: dimension mismatch");
  }
  double s = 0.0;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    if (params.theta[j] == 0.0) continue;
    s += params.theta[j] * std::pow(std::abs(x[j] - x2[j]), params.p[j]);
  }
  return std::exp(-s);
}

ProfileLikelihood profile_loglik(const Dataset& data, const CorrelationParams& params,
                                 double nugget) {
  if (data.size() < 2) throw std::invalid_argument("likelihood needs at least two runs");
  params.validate(data.dims());
  const PairwiseGaps gaps(data.domain.rows_to_unit(data.X));
  return concentrate(gaps.correlation(params, nugget), data.y).lik;
}

double Diagnostics::max_abs_residual() const {
  return standardized_residuals.size() ? standardized_residuals.cwiseAbs().maxCoeff() : 0.0;
}

double Diagnostics::rms_residual() const {
  if (standardized_residuals.size() == 0) return 0.0;
  return std::sqrt(standardized_residuals.squaredNorm() /
                   static_cast<double>(standardized_residuals.size()));
}

// ---------------------------------------------------------------------------
// GpModel

GpModel::GpModel(Dataset data, CorrelationParams params, double nugget)
    : data_(std::move(data)), params_(std::move(params)), nugget_(nugget) {
  params_.validate(data_.dims());
  if (!(nugget_ >= 0.0)) throw std::invalid_argument("nugget must be >= 0");
  unit_X_ = data_.domain.rows_to_unit(data_.X);
}

void GpModel::factorize() {
  const PairwiseGaps gaps(unit_X_);
  auto c = concentrate(gaps.correlation(params_, nugget_), data_.y);
  chol_ = std::move(c.chol);
  whitened_ones_ = std::move(c.whitened_ones);
  // Residual whitening uses the model's mu, which may be a restored value.
  const auto tri = chol_.triangularView<Eigen::Lower>();
  whitened_resid_ = tri.solve((data_.y.array() - mu_).matrix());
  alpha_ = chol_.transpose().triangularView<Eigen::Upper>().solve(whitened_resid_);
}

GpModel GpModel::build(Dataset data, CorrelationParams params, double nugget) {
  GpModel m(std::move(data), std::move(params), nugget);
  const PairwiseGaps gaps(m.unit_X_);
  const auto c = concentrate(gaps.correlation(m.params_, m.nugget_), m.data_.y);
  m.mu_ = c.lik.mu;
  m.sigma2_ = c.lik.sigma2;
  m.loglik_ = c.lik.loglik;
  if (!(m.sigma2_ > 0.0)) {
    m.degenerate_ = true;
    m.sigma2_ = kDegenerateSigma2 * std::max(1.0, m.mu_ * m.mu_);
    const auto n = static_cast<double>(m.data_.size());
    const double logdet = 2.0 * c.chol.diagonal().array().log().sum();
    m.loglik_ = -0.5 * (n * std::log(2.0 * std::numbers::pi * m.sigma2_) + logdet +
                        c.whitened_resid.squaredNorm() / m.sigma2_);
  }
  m.factorize();
  return m;
}

GpModel GpModel::restore(Dataset data, CorrelationParams params, double nugget, double mu,
                         double sigma2, double loglik) {
  GpModel m(std::move(data), std::move(params), nugget);
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw std::invalid_argument("sigma2 must be > 0");
  m.mu_ = mu;
  m.sigma2_ = sigma2;
  m.loglik_ = loglik;
  const double spread = m.data_.y.maxCoeff() - m.data_.y.minCoeff();
  m.degenerate_ = spread == 0.0;
  m.factorize();
  return m;
}

PredictiveDistribution GpModel::predict(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != data_.dims()) throw std::invalid_argument("predict: dimension mismatch");
  const Eigen::VectorXd u = data_.domain.to_unit(x);
  const Eigen::Index n = unit_X_.rows();
  Eigen::VectorXd r(n);
  for (Eigen::Index i = 0; i < n; ++i) r[i] = correlation(u, unit_X_.row(i).transpose(), params_);
  const Eigen::VectorXd v = chol_.triangularView<Eigen::Lower>().solve(r);
  const double mean = mu_ + v.dot(whitened_resid_);
  const double ones = whitened_ones_.squaredNorm();
  const double gls = 1.0 - whitened_ones_.dot(v);
  const double var = sigma2_ * (1.0 - v.squaredNorm() + gls * gls / ones);
  return {mean, std::sqrt(std::max(var, 0.0))};
}

// ---------------------------------------------------------------------------
// Fitting

GpModel fit(const Dataset& data, const FitConfig& config) {
  const Eigen::Index d = data.dims();
  const Eigen::Index n = data.size();
  if (n < 2) throw std::invalid_argument("fitting needs at least two runs");

  const Eigen::VectorXd yr = column_range(data.y);
  if (yr[0] == yr[1]) {
    // Constant outputs carry no information about the correlation.
    GpModel m = GpModel::build(data, CorrelationParams::uniform(d, 1.0, config.fixed_p.value_or(2.0)),
                               std::max(config.nugget, 0.0));
    m.degenerate_ = true;
    return m;
  }

  const bool fit_p = !config.fixed_p.has_value();
  if (!fit_p && !(*config.fixed_p >= 1.0 && *config.fixed_p <= 2.0)) {
    throw std::invalid_argument("fixed p must lie in [1, 2]");
  }
  const Eigen::Index m = fit_p ? 2 * d : d;
  Eigen::VectorXd lo(m), hi(m);
  lo.head(d).setConstant(config.log10_theta_min);
  hi.head(d).setConstant(config.log10_theta_max);
  if (fit_p) {
    lo.tail(d).setConstant(1.0);
    hi.tail(d).setConstant(2.0);
  }

  auto to_params = [&](const Eigen::VectorXd& v) {
    CorrelationParams cp;
    cp.theta = Eigen::pow(10.0, v.head(d).array()).matrix();
    cp.p = fit_p ? Eigen::VectorXd(v.tail(d)) : Eigen::VectorXd::Constant(d, *config.fixed_p);
    return cp;
  };

  const int starts = config.starts > 0 ? config.starts : static_cast<int>(10 * d);
  // Start points: a Latin hypercube over the search box.
  const Domain box(lo, hi);
  Eigen::MatrixXd start_pts = starts >= 1 ? latin_hypercube(starts, box, config.seed).points
                                          : Eigen::MatrixXd(0, m);
  if (config.warm_start) {
    const auto& ws = *config.warm_start;
    ws.validate(d);
    Eigen::VectorXd v(m);
    v.head(d) = ws.theta.array().max(1e-300).log10().matrix();
    if (fit_p) v.tail(d) = ws.p;
    Eigen::MatrixXd all(start_pts.rows() + 1, m);
    all.row(0) = v.cwiseMax(lo).cwiseMin(hi).transpose();
    all.bottomRows(start_pts.rows()) = start_pts;
    start_pts = std::move(all);
  }

  const PairwiseGaps gaps(data.domain.rows_to_unit(data.X));
  const NelderMead nm{lo, hi, config.max_evals_per_start};

  double nugget = std::max(config.nugget, 0.0);
  for (;;) {
    auto objective = [&](const Eigen::VectorXd& v) {
      try {
        const auto lik = concentrate(gaps.correlation(to_params(v), nugget), data.y).lik;
        return std::isfinite(lik.loglik) ? -lik.loglik : kInf;
      } catch (const FactorizationError&) {
        return kInf;
      }
    };
    Eigen::VectorXd best_v;
    double best_f = kInf;
    for (Eigen::Index s = 0; s < start_pts.rows(); ++s) {
      auto [v, f] = nm.minimize(objective, start_pts.row(s).transpose());
      if (f < best_f) {  // strict: earliest start wins ties
        best_f = f;
        best_v = v;
      }
    }
    if (std::isfinite(best_f)) return GpModel::build(data, to_params(best_v), nugget);
    if (nugget == 0.0 || nugget >= config.max_nugget) break;
    nugget = std::min(nugget * 10.0, config.max_nugget);
  }
  throw FactorizationError("GP fit failed: no start produced a factorizable correlation matrix");
}

// ---------------------------------------------------------------------------
// Diagnostics

Diagnostics loo_cv(const GpModel& model) {
  const Eigen::Index n = model.dataset().size();
  if (n < 3) throw std::invalid_argument("leave-one-out needs at least three runs");
  const auto tri = model.chol().triangularView<Eigen::Lower>();
  const Eigen::MatrixXd linv = tri.solve(Eigen::MatrixXd::Identity(n, n));
  const Eigen::MatrixXd rinv = linv.transpose() * linv;
  const Eigen::VectorXd& a = model.alpha();
  const Eigen::VectorXd& y = model.dataset().y;

  Diagnostics diag;
  diag.loo_means.resize(n);
  diag.loo_sds.resize(n);
  diag.standardized_residuals.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double q = rinv(i, i);
    diag.loo_means[i] = y[i] - a[i] / q;
    diag.loo_sds[i] = std::sqrt(model.sigma2() / q);
    const double resid = y[i] - diag.loo_means[i];
    diag.standardized_residuals[i] =
        diag.loo_sds[i] > 0.0 ? resid / diag.loo_sds[i] : (resid == 0.0 ? 0.0 : kInf);
  }
  return diag;
}

TransformSelection choose_transformation(const Eigen::MatrixXd& X, const Eigen::VectorXd& z_raw,
                                         const Domain& domain, const FitConfig& config,
                                         const std::vector<TransformKind>& candidates) {
  constexpr double kTieTol = 1e-9;
  TransformSelection sel;
  std::optional<std::size_t> best;
  for (const auto kind : candidates) {
    TransformScore sc;
    sc.transformation = Transformation(kind);
    sc.admissible = std::all_of(z_raw.begin(), z_raw.end(),
                                [&](double z) { return sc.transformation.admits(z); });
    if (sc.admissible) {
      const Dataset data(X, z_raw, sc.transformation, domain);
      const Diagnostics diag = loo_cv(fit(data, config));
      sc.max_abs_residual = diag.max_abs_residual();
      sc.rms_residual = diag.rms_residual();
    }
    sel.scores.push_back(sc);
    if (!sc.admissible) continue;
    if (!best) {
      best = sel.scores.size() - 1;
      continue;
    }
    const auto& cur = sel.scores[*best];
    const double scale = std::max({1.0, std::abs(cur.max_abs_residual), std::abs(sc.max_abs_residual)});
    if (sc.max_abs_residual < cur.max_abs_residual - kTieTol * scale) {
      best = sel.scores.size() - 1;
    } else if (std::abs(sc.max_abs_residual - cur.max_abs_residual) <= kTieTol * scale &&
               std::abs(sc.rms_residual - 1.0) < std::abs(cur.rms_residual - 1.0) - kTieTol) {
      best = sel.scores.size() - 1;
    }
  }
  if (!best) {
    throw std::domain_error("no candidate transformation admits every output value");
  }
  sel.chosen = sel.scores[*best].transformation;
  return sel;
}

}  // namespace seqei
