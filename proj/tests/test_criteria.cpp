#include "seqei/criteria.hpp"
#include "seqei/normal.hpp"
#include "seqei/oracle.hpp"
#include "seqei/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace seqei;

namespace {

constexpr long kDraws = 1000000;

// |closed form - MC| in units of the MC standard error.
double z_score(double closed, const McEstimate& mc) {
  if (mc.std_error == 0.0) return closed == mc.mean ? 0.0 : INFINITY;
  return std::abs(closed - mc.mean) / mc.std_error;
}

}  // namespace

TEST_CASE("criterion names and validation") {
  for (int k = 0; k < 8; ++k) {
    const auto kind = static_cast<CriterionKind>(k);
    CHECK(parse_criterion_kind(to_string(kind)) == kind);
  }
  CHECK_THROWS_AS(parse_criterion_kind("maximize"), std::invalid_argument);
  CriterionSpec s;
  s.kind = CriterionKind::minimize_weighted;
  s.w = 1.5;
  CHECK_THROWS(s.validate());
  s = CriterionSpec::contour_spec(1.0, -1.0);
  CHECK_THROWS(s.validate());
  s = {};
  s.kind = CriterionKind::percentile;
  s.g = 3;
  CHECK_THROWS(s.validate());
  s.g = 2;
  s.p_target = 1.0;
  CHECK_THROWS(s.validate());
  s = {};
  s.kind = CriterionKind::multi_contour;
  s.levels = {1.0, 0.0};
  CHECK_THROWS(s.validate());
  s = {};
  s.kind = CriterionKind::constrained_minimize;
  CHECK_THROWS(s.validate());
  s.constraint_hi = 1.0;
  CHECK_NOTHROW(s.validate());
  CHECK(s.minimizes());
  CHECK(CriterionSpec::contour_spec(0.5).is_contour_family());
}

TEST_CASE("improvement for minimization") {
  CHECK(improvement_min(1, 3) == 2);
  CHECK(improvement_min(3, 3) == 0);
  CHECK(improvement_min(5, 3) == 0);
}

TEST_CASE("ei_min closed form") {
  CHECK(ei_min({0.0, 1.0}, 0.0) == doctest::Approx(0.398942).epsilon(1e-6));
  CHECK(ei_min({5.0, 0.0}, 3.0) == 0.0);
  CHECK(ei_min({1.0, 0.0}, 3.0) == 2.0);
  const PredictiveDistribution pred{0.3, 0.7};
  const McEstimate mc = mc_ei(pred, [](double y) { return improvement_min(y, 0.1); }, kDraws, 11);
  CHECK(z_score(ei_min(pred, 0.1), mc) <= 4.0);
  CHECK_THROWS(ei_min({0.0, -1.0}, 0.0));
}

TEST_CASE("ei_min trades off local and global search") {
  double prev = 0.0;
  for (double s : {0.1, 0.5, 1.0, 2.0, 4.0}) {
    const double v = ei_min({1.0, s}, 0.5);
    CHECK(v > prev);
    prev = v;
  }
  CHECK(ei_min({-1e6, 1.0}, 0.0) == doctest::Approx(1e6));
  CHECK(ei_min({2.0, 1e-6}, 1.0) < 1e-300);
}

TEST_CASE("ei_min derivative in s") {
  Rng rng(5);
  for (int t = 0; t < 200; ++t) {
    const double m = rng.uniform(-2, 2), s = rng.uniform(0.1, 2), ym = rng.uniform(-2, 2);
    const double h = 1e-5;
    const double fd = (ei_min({m, s + h}, ym) - ei_min({m, s - h}, ym)) / (2 * h);
    CHECK(ei_min_ds({m, s}, ym) == doctest::Approx(fd).epsilon(1e-6).scale(1.0));
    CHECK(ei_min_ds({m, s}, ym) > 0.0);
  }
}

TEST_CASE("exponentiated EI") {
  Rng rng(6);
  for (int t = 0; t < 100; ++t) {
    const PredictiveDistribution p{rng.uniform(-2, 2), rng.uniform(0, 2)};
    const double ym = rng.uniform(-2, 2);
    CHECK(ei_min_exponentiated(p, ym, 1) == ei_min(p, ym));
  }
  CHECK(ei_min_exponentiated({1.0, 0.0}, 3.0, 2) == 4.0);
  const PredictiveDistribution pred{0.0, 1.0};
  const McEstimate mc2 =
      mc_ei(pred, [](double y) { return std::pow(improvement_min(y, 0.5), 2); }, kDraws, 12);
  CHECK(z_score(ei_min_exponentiated(pred, 0.5, 2), mc2) <= 4.0);
  // g >= 3 is itself a fixed 200k-draw estimate; allow for its own error.
  const McEstimate mc3 =
      mc_ei(pred, [](double y) { return std::pow(improvement_min(y, 0.5), 3); }, kDraws, 13);
  const double combined = mc3.std_error * std::sqrt(1.0 + kDraws / 200000.0);
  CHECK(std::abs(ei_min_exponentiated(pred, 0.5, 3) - mc3.mean) <= 4.0 * combined);
  CHECK(ei_min_exponentiated({1.0, 0.0}, 3.0, 3) == 8.0);
  CHECK_THROWS(ei_min_exponentiated(pred, 0.5, 0));
}

TEST_CASE("weighted EI") {
  Rng rng(7);
  for (int t = 0; t < 100; ++t) {
    const PredictiveDistribution p{rng.uniform(-2, 2), rng.uniform(0, 2)};
    const double ym = rng.uniform(-2, 2);
    CHECK(ei_min_weighted(p, ym, 0.5) == doctest::Approx(ei_min(p, ym) / 2).epsilon(1e-14));
  }
  CHECK(ei_min_weighted({1.0, 0.0}, 3.0, 1.0) == 2.0);
  CHECK(ei_min_weighted({0.0, 1.0}, 0.0, 0.0) == doctest::Approx(0.398942).epsilon(1e-6));
  CHECK(ei_min_weighted({3.0, 1.0}, 0.0, 1.0) == 0.0);
}

TEST_CASE("contour improvement") {
  CHECK(improvement_contour(2.0, 1.0, 2.0, 1.96) == doctest::Approx(3.8416));
  CHECK(improvement_contour(2.0 + 1.96, 1.0, 2.0, 1.96) == 0.0);
  CHECK(improvement_contour(7.0, 0.0, 2.0, 1.96) == 0.0);
  CHECK(improvement_contour(2.0, 0.0, 2.0, 1.96) == 0.0);
}

TEST_CASE("contour EI") {
  CHECK(ei_contour({3.0, 0.0}, 3.0, 1.96) == 0.0);
  const PredictiveDistribution pred{1.0, 1.0};
  const McEstimate mc =
      mc_ei(pred, [](double y) { return improvement_contour(y, 1.0, 1.0, 1.96); }, kDraws, 14);
  CHECK(z_score(ei_contour(pred, 1.0, 1.96), mc) <= 4.0);
  // Value confirmed against the Monte Carlo estimate above, then frozen.
  CHECK(ei_contour(pred, 1.0, 1.96) == doctest::Approx(2.9287).epsilon(1e-4));
  const double m = norm_cdf(1.96) - norm_cdf(-1.96);
  CHECK(ei_contour(pred, 1.0, 1.96) ==
        doctest::Approx(3.8416 * m + (2 * 1.96 * norm_pdf(1.96) - m)).epsilon(1e-4));
  CHECK_THROWS(ei_contour(pred, 1.0, 0.0));
}

TEST_CASE("multi-contour EI") {
  Rng rng(8);
  for (int t = 0; t < 100; ++t) {
    const PredictiveDistribution p{rng.uniform(-2, 2), rng.uniform(0, 2)};
    const double a = rng.uniform(-2, 2), alpha = rng.uniform(0.5, 3);
    CHECK(ei_multi_contour(p, {a}, alpha) == ei_contour(p, a, alpha));
  }
  CHECK(ei_multi_contour({1.0, 0.0}, {0.0, 1.0}, 1.96) == 0.0);
  const PredictiveDistribution pred{1.5, 1.0};
  const McEstimate mc = mc_ei(
      pred,
      [](double y) {
        const double e2 = 1.96 * 1.96;
        return e2 - std::min({y * y, (y - 3) * (y - 3), e2});
      },
      kDraws, 15);
  CHECK(z_score(ei_multi_contour(pred, {0.0, 3.0}, 1.96), mc) <= 4.0);
  CHECK_THROWS(ei_multi_contour(pred, {3.0, 0.0}, 1.96));
  CHECK_THROWS(ei_multi_contour(pred, {1.0, 1.0}, 1.96));
  CHECK_THROWS(ei_multi_contour(pred, {}, 1.96));
}

TEST_CASE("percentile EI") {
  Rng rng(9);
  for (int t = 0; t < 50; ++t) {
    const PredictiveDistribution p{rng.uniform(-2, 2), rng.uniform(0, 2)};
    CHECK(ei_percentile(p, 1.0, 1.96, 2) == ei_contour(p, 1.0, 1.96));
  }
  CHECK(ei_percentile({1.0, 0.0}, 1.2, 1.96, 4) == 0.0);
  const PredictiveDistribution pred{1.0, 0.5};
  const double eps = 1.96 * 0.5;
  const McEstimate mc = mc_ei(
      pred,
      [&](double y) { return std::pow(eps, 4) - std::min(std::pow(y - 1.2, 4), std::pow(eps, 4)); },
      kDraws, 16);
  CHECK(z_score(ei_percentile(pred, 1.2, 1.96, 4), mc) <= 4.0);
  CHECK_THROWS(ei_percentile(pred, 1.2, 1.96, 3));
  CHECK_THROWS(ei_percentile(pred, 1.2, 1.96, 1));
}

TEST_CASE("noisy-quantile EI") {
  CHECK(ei_noisy_quantile({0.0, 1.0}, -1.96, 1.96) == doctest::Approx(0.398942).epsilon(1e-6));
  CHECK(ei_noisy_quantile({1.0, 0.0}, 3.0, 1.96) == 2.0);
  Rng rng(10);
  for (int t = 0; t < 5; ++t) {
    const PredictiveDistribution p{rng.uniform(-2, 2), rng.uniform(0.1, 2)};
    const double q = p.mean - 1.96 * p.sd + p.sd * rng.uniform(-2, 2);
    const McEstimate mc = mc_ei(
        p, [&](double y) { return std::max(0.0, q - (y - 1.96 * p.sd)); }, kDraws, 17 + t);
    CHECK(z_score(ei_noisy_quantile(p, q, 1.96), mc) <= 4.0);
  }
}

TEST_CASE("feasibility probability") {
  CHECK(feasibility_probability({0.0, 1.0}, -1.96, 1.96) == doctest::Approx(0.9500).epsilon(1e-4));
  CHECK(feasibility_probability({5.0, 0.0}, 0.0, 1.0) == 0.0);
  CHECK(feasibility_probability({0.5, 0.0}, 0.0, 1.0) == 1.0);
  CHECK(feasibility_probability({0.0, 2.0}, 0.0, 1.0) ==
        doctest::Approx(norm_cdf(0.5) - 0.5).epsilon(1e-12));
  CHECK_THROWS(feasibility_probability({0.0, 1.0}, 1.0, 1.0));
}

TEST_CASE("constrained EI") {
  const PredictiveDistribution y{0.0, 1.0};
  CHECK(ei_constrained(y, 0.0, {5.0, 0.0}, 0.0, 1.0) == 0.0);
  CHECK(ei_constrained(y, 0.0, {0.5, 0.0}, 0.0, 1.0) == ei_min(y, 0.0));
  CHECK(ei_constrained(y, 0.0, {0.0, 1.0}, -1.96, 1.96) == doctest::Approx(0.378995).epsilon(1e-5));
}

TEST_CASE("dispatcher") {
  const PredictiveDistribution p{0.2, 0.8};
  const Incumbent inc{0.5};
  CriterionSpec s;
  CHECK(expected_improvement(s, p, inc) == ei_min(p, 0.5));
  s.kind = CriterionKind::noisy_quantile;
  CHECK(expected_improvement(s, p, inc) == ei_noisy_quantile(p, 0.5, 1.96));
  s = CriterionSpec::contour_spec(0.3);
  CHECK(expected_improvement(s, p, inc) == ei_contour(p, 0.3, 1.96));
  s = {};
  s.kind = CriterionKind::constrained_minimize;
  s.constraint_lo = -1;
  s.constraint_hi = 1;
  CHECK_THROWS(expected_improvement(s, p, inc));
  const PredictiveDistribution c{0.0, 1.0};
  CHECK(expected_improvement(s, p, inc, &c) == ei_constrained(p, 0.5, c, -1, 1));
}

TEST_CASE("zero at resolved points") {
  CHECK(ei_min({2.0, 0.0}, 1.0) == 0.0);
  CHECK(ei_min({1.0, 0.0}, 1.0) == 0.0);
  CHECK(ei_contour({1.0, 0.0}, 1.0, 1.96) == 0.0);
  CHECK(ei_percentile({1.0, 0.0}, 1.0, 1.96, 6) == 0.0);
}

TEST_CASE("percentile estimation") {
  Eigen::MatrixXd X(11, 1);
  for (int i = 0; i <= 10; ++i) X(i, 0) = i / 10.0;
  const Dataset flat(X, Eigen::VectorXd::Constant(11, 2.5), Transformation(), Domain::unit(1));
  const GpModel cm = GpModel::build(flat, CorrelationParams::uniform(1, 1.0, 2.0), 1e-8);
  CHECK(estimate_percentile(cm, 0.1, 1000, 1) == doctest::Approx(2.5));
  CHECK(estimate_percentile(cm, 0.9, 1000, 1) == doctest::Approx(2.5));

  const Dataset line(X, X.col(0), Transformation(), Domain::unit(1));
  const GpModel lm = GpModel::build(line, CorrelationParams::uniform(1, 0.5, 2.0), 1e-10);
  const double median = estimate_percentile(lm, 0.5, 100000, 2);
  CHECK(median == doctest::Approx(0.5).epsilon(0.02));
  CHECK(std::abs(median - 0.5) <= 0.01);
  CHECK(estimate_percentile(lm, 0.5, 100000, 2) == median);
  CHECK_THROWS(estimate_percentile(lm, 0.0, 100, 2));
}
