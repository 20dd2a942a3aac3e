#include "seqei/criteria.hpp"

#include "seqei/normal.hpp"
#include "seqei/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace seqei {

namespace {

// Phi(u2) - Phi(u1) for u1 <= u2, evaluated in whichever tail keeps precision.
double normal_mass(double u1, double u2) {
  if (u1 > 0.0) return norm_cdf(-u1) - norm_cdf(-u2);
  return norm_cdf(u2) - norm_cdf(u1);
}

// E[(eps^2 - (Y - center)^2) 1{lo < Y < hi}] for Y ~ N(mean, sd^2), sd > 0.
// With lo = a - eps, hi = a + eps this is the closed-form contour EI.
double contour_band(double mean, double sd, double center, double lo, double hi, double eps) {
  const double u1 = (lo - mean) / sd;
  const double u2 = (hi - mean) / sd;
  const double mass = normal_mass(u1, u2);
  const double phi1 = norm_pdf(u1);
  const double phi2 = norm_pdf(u2);
  const double b = mean - center;
  return (eps * eps - b * b) * mass + sd * sd * ((u2 * phi2 - u1 * phi1) - mass) +
         2.0 * b * sd * (phi2 - phi1);
}

// Fixed standard-normal sample shared by every Monte Carlo evaluation of the
// higher-order exponentiated improvement.
const std::vector<double>& exponentiated_sample() {
  static const std::vector<double> sample = [] {
    constexpr int kSamples = 200000;
    constexpr std::uint64_t kSeed = 0x5eed0e1ULL;
    Rng rng(kSeed);
    std::vector<double> z(kSamples);
    for (auto& v : z) v = rng.normal();
    return z;
  }();
  return sample;
}

void require_sd(const PredictiveDistribution& pred) {
  if (!(pred.sd >= 0.0)) throw std::invalid_argument("predictive sd must be >= 0");
}

}  // namespace

std::string_view to_string(CriterionKind kind) {
  switch (kind) {
    case CriterionKind::minimize: return "minimize";
    case CriterionKind::minimize_exponentiated: return "minimize_exponentiated";
    case CriterionKind::minimize_weighted: return "minimize_weighted";
    case CriterionKind::contour: return "contour";
    case CriterionKind::multi_contour: return "multi_contour";
    case CriterionKind::percentile: return "percentile";
    case CriterionKind::noisy_quantile: return "noisy_quantile";
    case CriterionKind::constrained_minimize: return "constrained_minimize";
  }
  return "minimize";
}

CriterionKind parse_criterion_kind(std::string_view name) {
  for (auto k : {CriterionKind::minimize, CriterionKind::minimize_exponentiated,
                 CriterionKind::minimize_weighted, CriterionKind::contour,
                 CriterionKind::multi_contour, CriterionKind::percentile,
                 CriterionKind::noisy_quantile, CriterionKind::constrained_minimize}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown criterion kind '" + std::string(name) + "'");
}

void CriterionSpec::validate() const {
  switch (kind) {
    case CriterionKind::minimize:
      break;
    case CriterionKind::minimize_exponentiated:
      if (g < 1) throw std::invalid_argument("exponentiated EI needs g >= 1");
      break;
    case CriterionKind::minimize_weighted:
      if (!(w >= 0.0 && w <= 1.0)) throw std::invalid_argument("weight w must lie in [0, 1]");
      break;
    case CriterionKind::contour:
      if (!std::isfinite(a)) throw std::invalid_argument("contour level must be finite");
      if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be > 0");
      break;
    case CriterionKind::multi_contour:
      if (levels.empty()) throw std::invalid_argument("multi_contour needs at least one level");
      for (std::size_t i = 1; i < levels.size(); ++i) {
        if (!(levels[i] > levels[i - 1])) {
          throw std::invalid_argument("contour levels must be strictly increasing");
        }
      }
      if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be > 0");
      break;
    case CriterionKind::percentile:
      if (!(p_target > 0.0 && p_target < 1.0)) {
        throw std::invalid_argument("percentile target must lie in (0, 1)");
      }
      if (g < 2 || g % 2 != 0) throw std::invalid_argument("percentile EI needs an even g");
      if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be > 0");
      break;
    case CriterionKind::noisy_quantile:
      if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be > 0");
      break;
    case CriterionKind::constrained_minimize:
      if (!(constraint_lo < constraint_hi)) {
        throw std::invalid_argument("constraint interval needs lo < hi");
      }
      break;
  }
}

bool CriterionSpec::minimizes() const {
  return kind == CriterionKind::minimize || kind == CriterionKind::minimize_exponentiated ||
         kind == CriterionKind::minimize_weighted || kind == CriterionKind::constrained_minimize;
}

bool CriterionSpec::is_contour_family() const {
  return kind == CriterionKind::contour || kind == CriterionKind::multi_contour ||
         kind == CriterionKind::percentile;
}

CriterionSpec CriterionSpec::contour_spec(double level, double alpha) {
  CriterionSpec s;
  s.kind = CriterionKind::contour;
  s.a = level;
  s.alpha = alpha;
  return s;
}

double improvement_min(double y, double y_min) { return std::max(y_min - y, 0.0); }

double improvement_contour(double y, double pred_sd, double a, double alpha) {
  const double eps = alpha * pred_sd;
  const double e2 = eps * eps;
  return e2 - std::min((y - a) * (y - a), e2);
}

double ei_min(const PredictiveDistribution& pred, double y_min) {
  require_sd(pred);
  const double delta = y_min - pred.mean;
  if (pred.sd == 0.0) return std::max(delta, 0.0);
  const double u = delta / pred.sd;
  return std::max(pred.sd * norm_pdf(u) + delta * norm_cdf(u), 0.0);
}

double ei_min_ds(const PredictiveDistribution& pred, double y_min) {
  require_sd(pred);
  if (pred.sd == 0.0) return 0.0;
  return norm_pdf((y_min - pred.mean) / pred.sd);
}

double ei_min_exponentiated(const PredictiveDistribution& pred, double y_min, int g) {
  if (g < 1) throw std::invalid_argument("exponentiated EI needs g >= 1");
  if (g == 1) return ei_min(pred, y_min);
  require_sd(pred);
  const double delta = y_min - pred.mean;
  if (pred.sd == 0.0) return std::pow(std::max(delta, 0.0), g);
  const double s = pred.sd;
  if (g == 2) {
    const double u = delta / s;
    return std::max((delta * delta + s * s) * norm_cdf(u) + delta * s * norm_pdf(u), 0.0);
  }
  double acc = 0.0;
  for (double z : exponentiated_sample()) {
    const double imp = delta - s * z;
    if (imp > 0.0) acc += std::pow(imp, g);
  }
  return acc / static_cast<double>(exponentiated_sample().size());
}

double ei_min_weighted(const PredictiveDistribution& pred, double y_min, double w) {
  if (!(w >= 0.0 && w <= 1.0)) throw std::invalid_argument("weight w must lie in [0, 1]");
  require_sd(pred);
  const double delta = y_min - pred.mean;
  if (pred.sd == 0.0) return w * std::max(delta, 0.0);
  const double u = delta / pred.sd;
  const double explore = pred.sd * norm_pdf(u);
  const double exploit = delta * norm_cdf(u);
  return std::max(w * exploit + (1.0 - w) * explore, 0.0);
}

double ei_contour(const PredictiveDistribution& pred, double a, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be > 0");
  require_sd(pred);
  if (pred.sd == 0.0) return 0.0;
  const double eps = alpha * pred.sd;
  return std::max(contour_band(pred.mean, pred.sd, a, a - eps, a + eps, eps), 0.0);
}

double ei_multi_contour(const PredictiveDistribution& pred, const std::vector<double>& levels,
                        double alpha) {
  if (levels.empty()) throw std::invalid_argument("multi-contour EI needs at least one level");
  for (std::size_t i = 1; i < levels.size(); ++i) {
    if (!(levels[i] > levels[i - 1])) {
      throw std::invalid_argument("contour levels must be strictly increasing");
    }
  }
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be > 0");
  require_sd(pred);
  if (pred.sd == 0.0) return 0.0;
  const double eps = alpha * pred.sd;
  // Level i is the nearest one between the midpoints to its neighbours; inside
  // that cell and within eps of it the improvement is eps^2 - (y - a_i)^2.
  double total = 0.0;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    double lo = levels[i] - eps;
    double hi = levels[i] + eps;
    if (i > 0) lo = std::max(lo, 0.5 * (levels[i - 1] + levels[i]));
    if (i + 1 < levels.size()) hi = std::min(hi, 0.5 * (levels[i] + levels[i + 1]));
    if (lo < hi) total += contour_band(pred.mean, pred.sd, levels[i], lo, hi, eps);
  }
  return std::max(total, 0.0);
}

double ei_percentile(const PredictiveDistribution& pred, double nu_hat, double alpha, int g) {
  if (g < 2 || g % 2 != 0) throw std::invalid_argument("percentile EI needs an even g");
  if (g == 2) return ei_contour(pred, nu_hat, alpha);
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be > 0");
  require_sd(pred);
  if (pred.sd == 0.0) return 0.0;
  // With t = (y - nu_hat)/s ~ N(beta, 1): EI = s^g E[(alpha^g - t^g) 1{|t| < alpha}].
  const double beta = (pred.mean - nu_hat) / pred.sd;
  if (!(std::abs(beta) < alpha + 40.0)) return 0.0;
  const double lo = -alpha - beta;
  const double hi = alpha - beta;
  const double phi_lo = norm_pdf(lo);
  const double phi_hi = norm_pdf(hi);
  // Moments M_k = int_{-alpha}^{alpha} t^k phi(t - beta) dt.
  std::vector<double> moment(static_cast<std::size_t>(g) + 1);
  moment[0] = normal_mass(lo, hi);
  moment[1] = beta * moment[0] + phi_lo - phi_hi;
  for (int k = 2; k <= g; ++k) {
    const auto i = static_cast<std::size_t>(k);
    moment[i] = beta * moment[i - 1] + (k - 1) * moment[i - 2] +
                std::pow(-alpha, k - 1) * phi_lo - std::pow(alpha, k - 1) * phi_hi;
  }
  const double standardized = std::pow(alpha, g) * moment[0] - moment[static_cast<std::size_t>(g)];
  return std::max(std::pow(pred.sd, g) * standardized, 0.0);
}

double ei_noisy_quantile(const PredictiveDistribution& pred, double q_min, double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be > 0");
  require_sd(pred);
  if (pred.sd == 0.0) return std::max(q_min - pred.mean, 0.0);
  const double t = q_min - pred.mean + lambda * pred.sd;
  const double u = t / pred.sd;
  return std::max(pred.sd * norm_pdf(u) + t * norm_cdf(u), 0.0);
}

double feasibility_probability(const PredictiveDistribution& pred_c, double lo, double hi) {
  if (!(lo < hi)) throw std::invalid_argument("feasibility interval needs lo < hi");
  require_sd(pred_c);
  if (pred_c.sd == 0.0) return (lo < pred_c.mean && pred_c.mean < hi) ? 1.0 : 0.0;
  const double u1 = (lo - pred_c.mean) / pred_c.sd;
  const double u2 = (hi - pred_c.mean) / pred_c.sd;
  return std::clamp(normal_mass(u1, u2), 0.0, 1.0);
}

double ei_constrained(const PredictiveDistribution& pred_y, double y_min,
                      const PredictiveDistribution& pred_c, double lo, double hi) {
  return ei_min(pred_y, y_min) * feasibility_probability(pred_c, lo, hi);
}

double estimate_percentile(const GpModel& model, double p_target, int n_mc, std::uint64_t seed) {
  if (!(p_target > 0.0 && p_target < 1.0)) {
    throw std::invalid_argument("percentile target must lie in (0, 1)");
  }
  if (n_mc < 1) throw std::invalid_argument("percentile estimate needs n_mc >= 1");
  const Domain& dom = model.dataset().domain;
  Rng rng(seed);
  std::vector<double> means(static_cast<std::size_t>(n_mc));
  Eigen::VectorXd x(dom.dims());
  for (auto& m : means) {
    for (Eigen::Index j = 0; j < dom.dims(); ++j) x[j] = rng.uniform(dom.lower()[j], dom.upper()[j]);
    m = model.predict(x).mean;
  }
  std::sort(means.begin(), means.end());
  const double h = (static_cast<double>(n_mc) - 1.0) * p_target;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= means.size()) return means.back();
  return means[lo] + (h - static_cast<double>(lo)) * (means[lo + 1] - means[lo]);
}

double expected_improvement(const CriterionSpec& spec, const PredictiveDistribution& pred,
                            const Incumbent& incumbent, const PredictiveDistribution* pred_c) {
  switch (spec.kind) {
    case CriterionKind::minimize:
      return ei_min(pred, incumbent.value);
    case CriterionKind::minimize_exponentiated:
      return ei_min_exponentiated(pred, incumbent.value, spec.g);
    case CriterionKind::minimize_weighted:
      return ei_min_weighted(pred, incumbent.value, spec.w);
    case CriterionKind::contour:
      return ei_contour(pred, spec.a, spec.alpha);
    case CriterionKind::multi_contour:
      return ei_multi_contour(pred, spec.levels, spec.alpha);
    case CriterionKind::percentile:
      return ei_percentile(pred, incumbent.value, spec.alpha, spec.g);
    case CriterionKind::noisy_quantile:
      return ei_noisy_quantile(pred, incumbent.value, spec.lambda);
    case CriterionKind::constrained_minimize:
      if (pred_c == nullptr) {
        throw std::invalid_argument("constrained EI needs a constraint prediction");
      }
      return ei_constrained(pred, incumbent.value, *pred_c, spec.constraint_lo, spec.constraint_hi);
  }
  return 0.0;
}

}  // namespace seqei
