#include "dense_oracle.hpp"
#include "seqei/emulator.hpp"

#include <doctest.h>

#include <cmath>

using namespace seqei;
using seqei::testing::DenseGp;
using seqei::testing::gp_draw;

namespace {

Dataset five_point_set() {
  Eigen::MatrixXd X(5, 1);
  X << 0.05, 0.3, 0.45, 0.7, 0.95;
  Eigen::VectorXd z(5);
  z << 1.2, 0.4, -0.3, 0.8, 2.0;
  return Dataset(X, z, Transformation(), Domain::unit(1));
}

double rel(double a, double b) {
  const double s = std::max(std::abs(a), std::abs(b));
  return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

}  // namespace

TEST_CASE("transformations") {
  for (auto kind : {TransformKind::identity, TransformKind::sqrt, TransformKind::log1p}) {
    const Transformation t(kind);
    for (double z : {0.0, 0.25, 3.0, 1234.5}) {
      CHECK(t.inverse(t.forward(z)) == doctest::Approx(z).epsilon(1e-12));
    }
    CHECK(Transformation::parse(t.name()) == t);
  }
  CHECK_FALSE(Transformation(TransformKind::sqrt).admits(-0.5));
  CHECK(Transformation(TransformKind::log1p).admits(-0.5));
  CHECK_FALSE(Transformation(TransformKind::log1p).admits(-1.0));
  CHECK_THROWS_AS(Transformation(TransformKind::sqrt).forward(-1.0), std::domain_error);
  CHECK_THROWS_AS(Transformation::parse("cube"), std::invalid_argument);
}

TEST_CASE("dataset validation") {
  Eigen::MatrixXd X(2, 1);
  X << 0.2, 0.2;
  CHECK_THROWS_AS(Dataset(X, Eigen::Vector2d(1, 2), Transformation(), Domain::unit(1)),
                  std::invalid_argument);
  X << 0.2, 0.4;
  const Dataset d(X, Eigen::Vector2d(4, 9), Transformation(TransformKind::sqrt), Domain::unit(1));
  CHECK(d.y[0] == 2.0);
  CHECK(d.y[1] == 3.0);
  CHECK_THROWS(d.with_run(Eigen::VectorXd::Constant(1, 0.2), 1.0));
  CHECK(d.with_run(Eigen::VectorXd::Constant(1, 0.6), 16.0).y[2] == 4.0);
}

TEST_CASE("correlation function") {
  const Eigen::Vector2d x(0.1, 0.9);
  CHECK(correlation(x, x, CorrelationParams::uniform(2, 3.0, 1.5)) == 1.0);
  CHECK(correlation(x, Eigen::Vector2d(0.7, 0.2), CorrelationParams::uniform(2, 0.0, 2.0)) == 1.0);
  const Eigen::VectorXd a = Eigen::VectorXd::Constant(1, 0.0);
  const Eigen::VectorXd b = Eigen::VectorXd::Constant(1, 1.0);
  CHECK(correlation(a, b, CorrelationParams::uniform(1, 1.0, 2.0)) ==
        doctest::Approx(0.367879).epsilon(1e-6));
  CHECK_THROWS(correlation(a, x, CorrelationParams::uniform(1, 1.0, 2.0)));
}

TEST_CASE("correlation strictly decreases as theta grows") {
  const Eigen::Vector2d x(0.1, 0.4), x2(0.3, 0.4);
  double prev = 1.0;
  for (double theta : {0.01, 0.1, 1.0, 5.0, 20.0}) {
    CorrelationParams p = CorrelationParams::uniform(2, 0.5, 1.7);
    p.theta[0] = theta;
    const double c = correlation(x, x2, p);
    CHECK(c < prev);
    prev = c;
  }
}

TEST_CASE("profile likelihood, independent case") {
  Eigen::MatrixXd X(2, 1);
  X << 0.0, 1.0;
  const Dataset d(X, Eigen::Vector2d(1.0, 4.0), Transformation(), Domain::unit(1));
  const ProfileLikelihood pl = profile_loglik(d, CorrelationParams::uniform(1, 1000.0, 2.0), 0.0);
  CHECK(pl.mu == doctest::Approx(2.5));
  CHECK(pl.sigma2 == doctest::Approx((1.5 * 1.5 + 1.5 * 1.5) / 2.0));
}

TEST_CASE("profile likelihood, singular all-ones correlation") {
  const Dataset d = five_point_set();
  CHECK_THROWS_AS(profile_loglik(d, CorrelationParams::uniform(1, 0.0, 2.0), 0.0), FactorizationError);
}

TEST_CASE("likelihood and prediction against dense algebra") {
  const Dataset d = five_point_set();
  const CorrelationParams par = CorrelationParams::uniform(1, 4.0, 1.6);
  const DenseGp oracle(d, par, 0.0);
  const ProfileLikelihood pl = profile_loglik(d, par, 0.0);
  CHECK(rel(pl.loglik, oracle.loglik) < 1e-10);
  CHECK(rel(pl.mu, oracle.mu) < 1e-10);
  CHECK(rel(pl.sigma2, oracle.sigma2) < 1e-10);
  const GpModel m = GpModel::build(d, par, 0.0);
  for (double x : {0.0, 0.17, 0.5, 0.81, 1.0}) {
    const auto p = m.predict(Eigen::VectorXd::Constant(1, x));
    const auto [mean, var] = oracle.predict_unit(Eigen::VectorXd::Constant(1, x));
    CHECK(rel(p.mean, mean) < 1e-10);
    CHECK(rel(p.sd, std::sqrt(var)) < 1e-8);
  }
}

TEST_CASE("cholesky factor reproduces the correlation matrix") {
  const Dataset d = five_point_set();
  const CorrelationParams par = CorrelationParams::uniform(1, 2.0, 2.0);
  const GpModel m = GpModel::build(d, par, 1e-8);
  const DenseGp oracle(d, par, 1e-8);
  const Eigen::MatrixXd back = m.chol() * m.chol().transpose();
  CHECK((back - oracle.R).norm() <= 1e-8 * oracle.R.norm());
}

TEST_CASE("interpolation at training points") {
  const Dataset d = five_point_set();
  const GpModel m = GpModel::build(d, CorrelationParams::uniform(1, 10.0, 2.0), 0.0);
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    const auto p = m.predict(d.X.row(i).transpose());
    CHECK(p.mean == doctest::Approx(d.y[i]).epsilon(1e-6));
    CHECK(p.sd <= 1e-4 * std::sqrt(m.sigma2()));
  }
  const auto mid = m.predict(Eigen::VectorXd::Constant(1, 0.6));
  CHECK(mid.sd > 0.0);
}

TEST_CASE("single run with inactive inputs predicts its output everywhere") {
  Eigen::MatrixXd X(2, 2);
  X << 0.2, 0.2, 0.8, 0.8;
  const Dataset d(X, Eigen::Vector2d(3.0, 3.0 + 1e-9), Transformation(), Domain::unit(2));
  const GpModel m = GpModel::build(d, CorrelationParams::uniform(2, 1e-9, 2.0), 1e-6);
  CHECK(m.predict(Eigen::Vector2d(0.9, 0.05)).mean == doctest::Approx(3.0).epsilon(1e-8));
}

TEST_CASE("squared-exponential mean is smooth (Richardson ratio)") {
  const Dataset d = five_point_set();
  const GpModel m = GpModel::build(d, CorrelationParams::uniform(1, 3.0, 2.0), 1e-10);
  auto f = [&](double x) { return m.predict(Eigen::VectorXd::Constant(1, x)).mean; };
  auto deriv = [&](double x, double h) { return (f(x + h) - f(x - h)) / (2 * h); };
  const double x0 = 0.6, h = 0.02;
  const double ratio = (deriv(x0, h) - deriv(x0, h / 2)) / (deriv(x0, h / 2) - deriv(x0, h / 4));
  CHECK(ratio == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("leave-one-out matches explicit refits") {
  const Dataset d = five_point_set();
  const double nugget = 1e-6;
  const GpModel m = GpModel::build(d, CorrelationParams::uniform(1, 6.0, 1.8), nugget);
  const Diagnostics diag = loo_cv(m);
  const DenseGp full(d, m.params(), nugget);
  const Eigen::Index n = d.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    // Condition y_i on the other runs with (theta, p, mu, sigma^2) held fixed.
    std::vector<Eigen::Index> keep;
    for (Eigen::Index k = 0; k < n; ++k) {
      if (k != i) keep.push_back(k);
    }
    Eigen::MatrixXd R(n - 1, n - 1);
    Eigen::VectorXd r(n - 1), y(n - 1);
    for (Eigen::Index a = 0; a < n - 1; ++a) {
      r[a] = full.R(i, keep[a]);
      y[a] = d.y[keep[a]];
      for (Eigen::Index b = 0; b < n - 1; ++b) R(a, b) = full.R(keep[a], keep[b]);
    }
    const Eigen::MatrixXd Rinv = R.inverse();
    const double mean = m.mu() + r.dot(Rinv * (y - Eigen::VectorXd::Constant(n - 1, m.mu())));
    const double var = m.sigma2() * (1.0 + nugget - r.dot(Rinv * r));
    CHECK(rel(diag.loo_means[i], mean) < 1e-7);
    CHECK(rel(diag.loo_sds[i], std::sqrt(var)) < 1e-7);
    CHECK(diag.standardized_residuals[i] ==
          doctest::Approx((d.y[i] - mean) / std::sqrt(var)).epsilon(1e-6));
  }
  CHECK_THROWS(loo_cv(GpModel::build(Dataset(d.X.topRows(2), d.z_raw.head(2), Transformation(),
                                             d.domain),
                                     m.params(), nugget)));
}

TEST_CASE("standardized residual arithmetic") {
  CHECK((159.7 - 123.5) / 5.67 == doctest::Approx(6.4).epsilon(0.01));
}

TEST_CASE("antisymmetric data gives antisymmetric residuals") {
  Eigen::MatrixXd X(6, 1);
  X << 0.0, 0.2, 0.4, 0.6, 0.8, 1.0;
  Eigen::VectorXd z(6);
  z << -1.0, -0.7, 0.2, -0.2, 0.7, 1.0;
  const Dataset d(X, z, Transformation(), Domain::unit(1));
  const Diagnostics diag = loo_cv(GpModel::build(d, CorrelationParams::uniform(1, 5.0, 2.0), 1e-8));
  for (Eigen::Index i = 0; i < 6; ++i) {
    CHECK(diag.standardized_residuals[i] ==
          doctest::Approx(-diag.standardized_residuals[5 - i]).epsilon(1e-6));
  }
  CHECK(diag.standardized_residuals.sum() == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("fit reaches at least the generating likelihood and is deterministic") {
  const Domain dom = Domain::unit(1);
  Eigen::MatrixXd X(30, 1);
  for (int i = 0; i < 30; ++i) X(i, 0) = (i + 0.5) / 30.0;
  const CorrelationParams gen = CorrelationParams::uniform(1, 8.0, 1.7);
  const Eigen::VectorXd z = gp_draw(X, dom, gen, 42).array() * 2.0 + 5.0;
  const Dataset d(X, z, Transformation(), dom);
  FitConfig fc;
  fc.seed = 3;
  const GpModel m = fit(d, fc);
  CHECK(m.loglik() >= profile_loglik(d, gen, m.nugget()).loglik);
  for (Eigen::Index j = 0; j < 1; ++j) {
    CHECK(m.params().theta[j] >= 1e-6);
    CHECK(m.params().theta[j] <= 1e3);
    CHECK(m.params().p[j] >= 1.0);
    CHECK(m.params().p[j] <= 2.0);
  }
  const GpModel again = fit(d, fc);
  CHECK(again.params().theta == m.params().theta);
  CHECK(again.params().p == m.params().p);
  CHECK(again.loglik() == m.loglik());
}

TEST_CASE("fit honours fixed p and a warm start") {
  const Dataset d = five_point_set();
  FitConfig fc;
  fc.fixed_p = 2.0;
  const GpModel m = fit(d, fc);
  CHECK(m.params().p[0] == 2.0);
  fc.warm_start = m.params();
  CHECK(fit(d, fc).loglik() >= m.loglik() - 1e-9);
  fc.fixed_p = 2.5;
  CHECK_THROWS(fit(d, fc));
}

TEST_CASE("constant outputs are flagged as degenerate") {
  Eigen::MatrixXd X(4, 1);
  X << 0.1, 0.4, 0.6, 0.9;
  const Dataset d(X, Eigen::VectorXd::Constant(4, 7.0), Transformation(), Domain::unit(1));
  const GpModel m = fit(d);
  CHECK(m.degenerate_variance());
  CHECK(m.mu() == doctest::Approx(7.0));
  CHECK(m.sigma2() > 0.0);
  CHECK(m.sigma2() < 1e-9);
  CHECK(std::isfinite(m.loglik()));
  CHECK(m.predict(Eigen::VectorXd::Constant(1, 0.5)).mean == doctest::Approx(7.0));
}

TEST_CASE("transformation choice: tie rule and domain rule") {
  Eigen::MatrixXd X(4, 1);
  X << 0.1, 0.4, 0.6, 0.9;
  const TransformSelection tie =
      choose_transformation(X, Eigen::VectorXd::Constant(4, 2.0), Domain::unit(1));
  CHECK(tie.chosen.kind() == TransformKind::identity);
  CHECK(tie.scores.size() == 3);

  Eigen::VectorXd z(4);
  z << 1.0, -0.5, 2.0, 0.3;
  const TransformSelection sel = choose_transformation(X, z, Domain::unit(1));
  CHECK_FALSE(sel.scores[1].admissible);
  CHECK(sel.chosen.kind() != TransformKind::sqrt);

  z << -2.0, -1.5, 2.0, 0.3;
  CHECK_THROWS_AS(choose_transformation(X, z, Domain::unit(1), {},
                                        {TransformKind::sqrt, TransformKind::log1p}),
                  std::domain_error);
}

TEST_CASE("transformation choice: square of a GP draw prefers sqrt") {
  // Across other seed bases the observed rate ranges from about 55% to 85%.
  const Domain dom = Domain::unit(1);
  int sqrt_wins = 0;
  for (std::uint64_t rep = 0; rep < 20; ++rep) {
    const Design des = latin_hypercube(50, dom, 500 + rep);
    const Eigen::VectorXd g = gp_draw(des.points, dom, CorrelationParams::uniform(1, 5.0, 2.0), rep);
    const Eigen::VectorXd y = (g.array() + 2.0).max(0.05);
    const Eigen::VectorXd z = y.array().square();
    FitConfig fc;
    fc.seed = rep;
    const TransformSelection sel =
        choose_transformation(des.points, z, dom, fc, {TransformKind::identity, TransformKind::sqrt});
    if (sel.chosen.kind() == TransformKind::sqrt) ++sqrt_wins;
  }
  MESSAGE("sqrt chosen in " << sqrt_wins << " of 20 replicates");
  CHECK(sqrt_wins >= 12);
}
