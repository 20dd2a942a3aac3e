#include "seqei/design.hpp"
#include "seqei/simulators.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

using namespace seqei;

namespace {

GridSimulator small_grid(Interpolation interp) {
  Eigen::MatrixXd v(3, 4);
  v << 1, 2, 3, 4,
       5, 6, 7, 8,
       9, 10, 12, 20;
  return GridSimulator(Domain(Eigen::Vector2d(0, 0), Eigen::Vector2d(2, 3)), v, interp);
}

}  // namespace

TEST_CASE("grid nodes return tabled values in both modes") {
  for (auto interp : {Interpolation::nearest, Interpolation::bilinear}) {
    const GridSimulator g = small_grid(interp);
    for (Eigen::Index i = 0; i < g.rows(); ++i) {
      for (Eigen::Index k = 0; k < g.cols(); ++k) {
        CHECK(eval_grid(g, g.node(i, k)) == g.values(i, k));
      }
    }
  }
}

TEST_CASE("bilinear cell centres and edge midpoints") {
  const GridSimulator g = small_grid(Interpolation::bilinear);
  CHECK(eval_grid(g, Eigen::Vector2d(1.5, 2.5)) == doctest::Approx((7 + 8 + 12 + 20) / 4.0));
  CHECK(eval_grid(g, Eigen::Vector2d(0.5, 0.5)) == doctest::Approx((1 + 2 + 5 + 6) / 4.0));
  CHECK(eval_grid(g, Eigen::Vector2d(2.0, 2.5)) == doctest::Approx((12 + 20) / 2.0));
  CHECK(eval_grid(g, Eigen::Vector2d(0.5, 0.0)) == doctest::Approx((1 + 5) / 2.0));
}

TEST_CASE("bilinear reproduces affine functions") {
  const Domain dom(Eigen::Vector2d(0.75, 0.2), Eigen::Vector2d(0.95, 0.8));
  Eigen::MatrixXd v(13, 41);
  GridSimulator g(dom, Eigen::MatrixXd::Zero(13, 41));
  auto affine = [](const Eigen::Vector2d& x) { return 3.0 - 2.0 * x[0] + 0.7 * x[1]; };
  for (Eigen::Index i = 0; i < 13; ++i) {
    for (Eigen::Index k = 0; k < 41; ++k) v(i, k) = affine(g.node(i, k));
  }
  g.values = v;
  const Design probes = latin_hypercube(200, dom, 4);
  for (Eigen::Index r = 0; r < probes.size(); ++r) {
    const Eigen::Vector2d x = probes.points.row(r).transpose();
    CHECK(std::abs(eval_grid(g, x) - affine(x)) <= 1e-12);
  }
}

TEST_CASE("nearest lookup breaks ties toward the lower index") {
  const GridSimulator g = small_grid(Interpolation::nearest);
  CHECK(eval_grid(g, Eigen::Vector2d(0.5, 0.0)) == 1);
  CHECK(eval_grid(g, Eigen::Vector2d(0.51, 0.0)) == 5);
  CHECK(eval_grid(g, Eigen::Vector2d(1.0, 1.5)) == 6);
  CHECK(eval_grid(g, Eigen::Vector2d(1.6, 2.6)) == 20);
}

TEST_CASE("grid rejects points outside its domain") {
  const GridSimulator g = small_grid(Interpolation::bilinear);
  CHECK_THROWS_AS(eval_grid(g, Eigen::Vector2d(-0.1, 1.0)), std::out_of_range);
  CHECK_THROWS_AS(eval_grid(g, Eigen::Vector2d(1.0, 3.5)), std::out_of_range);
  CHECK_THROWS(GridSimulator(g.domain, Eigen::MatrixXd::Zero(1, 4)));
}

TEST_CASE("interpolation names") {
  CHECK(parse_interpolation("nearest") == Interpolation::nearest);
  CHECK(to_string(Interpolation::bilinear) == "bilinear");
  CHECK_THROWS(parse_interpolation("cubic"));
}

TEST_CASE("branin minimum by dense grid") {
  const CandidateSet dense = grid_candidates(branin_domain(), {1000, 1000});
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < dense.size(); ++i) {
    best = std::min(best, branin(dense.points.row(i).transpose()));
  }
  CHECK(best >= 0.397887);
  CHECK(best == doctest::Approx(0.397887).epsilon(1e-4));
  const double at_pi = branin(Eigen::Vector2d(std::numbers::pi, 2.275));
  CHECK(std::abs(at_pi - 0.397887) <= 1e-6);
  CHECK(branin(Eigen::Vector2d(-std::numbers::pi, 12.275)) == doctest::Approx(at_pi).epsilon(1e-9));
  CHECK(branin(Eigen::Vector2d(9.42478, 2.475)) == doctest::Approx(at_pi).epsilon(1e-6));
  CHECK(branin(Eigen::Vector2d(1.0, 2.0)) == branin(Eigen::Vector2d(1.0, 2.0)));
}

TEST_CASE("quadratic bowl") {
  CHECK(quadratic_bowl(Eigen::VectorXd::Constant(1, 0.3), Eigen::VectorXd::Constant(1, 0.3)) == 0.0);
  CHECK(quadratic_bowl(Eigen::Vector2d(1, 1), Eigen::Vector2d(0, 0)) == 2.0);
}

TEST_CASE("contour ring") {
  CHECK(contour_ring(Eigen::Vector2d(0.5, 0.5)) == 1.0);
  const double r = contour_ring_radius();
  CHECK(r == doctest::Approx(std::sqrt(std::log(2.0) / 8.0)));
  for (double angle : {0.0, 0.7, 2.0, 4.5}) {
    const Eigen::Vector2d x(0.5 + r * std::cos(angle), 0.5 + r * std::sin(angle));
    CHECK(contour_ring(x) == doctest::Approx(0.5).epsilon(1e-14));
  }
  CHECK(contour_ring(Eigen::Vector2d(0.0, 0.0)) < 0.02);
  CHECK(contour_ring(Eigen::Vector2d(0.0, 0.0)) > 0.0);
}

TEST_CASE("noise wrapper") {
  const Simulator base = [](const Eigen::VectorXd& x) { return x.sum(); };
  const Eigen::Vector2d x(0.2, 0.3);
  CHECK(with_noise(base, 0.0, 1)(x) == base(x));

  Simulator a = with_noise(base, 0.5, 9);
  Simulator b = with_noise(base, 0.5, 9);
  for (int i = 0; i < 10; ++i) CHECK(a(x) == b(x));

  Simulator c = with_noise(base, 0.5, 10);
  double sum = 0.0, sum2 = 0.0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const double e = c(x) - base(x);
    sum += e;
    sum2 += e * e;
  }
  const double sd = std::sqrt((sum2 - sum * sum / n) / (n - 1));
  CHECK(std::abs(sd - 0.5) <= 0.05 * 0.5);
  CHECK_THROWS(with_noise(base, -1.0, 1));
}

TEST_CASE("bundled grids") {
  const GridSimulator tidal = tidal_like_grid();
  CHECK(tidal.rows() == 13);
  CHECK(tidal.cols() == 41);
  CHECK(tidal.domain == Domain::parse("0.75:0.95,0.2:0.8"));
  Eigen::Index bi = 0, bk = 0;
  tidal.values.maxCoeff(&bi, &bk);
  CHECK(bi > 0);
  CHECK(bi < 12);
  CHECK(bk > 0);
  CHECK(bk < 40);

  const GridSimulator volcano = volcano_like_grid();
  for (Eigen::Index i = 0; i + 1 < volcano.rows(); ++i) {
    for (Eigen::Index k = 0; k + 1 < volcano.cols(); ++k) {
      CHECK(volcano.values(i + 1, k) >= volcano.values(i, k));
      CHECK(volcano.values(i, k + 1) <= volcano.values(i, k));
    }
  }
  CHECK(volcano.values.minCoeff() == 0.0);
}

TEST_CASE("simulator specs") {
  SimulatorSpec s;
  s.kind = SimulatorKind::quadratic_bowl;
  CHECK_FALSE(natural_domain(s).has_value());
  CHECK(make_simulator(s, 0)(Eigen::VectorXd::Constant(1, 0.3)) == 0.0);
  s.center = Eigen::VectorXd::Constant(1, 0.5);
  CHECK(make_simulator(s, 0)(Eigen::VectorXd::Constant(1, 0.5)) == 0.0);
  s = {};
  s.kind = SimulatorKind::branin;
  CHECK(*natural_domain(s) == branin_domain());
  s.kind = SimulatorKind::tidal_like;
  const Simulator tidal = make_simulator(s, 0);
  const GridSimulator g = tidal_like_grid();
  CHECK(tidal(g.node(3, 7)) == doctest::Approx(g.values(3, 7)).epsilon(1e-12));
  for (auto k : {SimulatorKind::grid_file, SimulatorKind::branin, SimulatorKind::quadratic_bowl,
                 SimulatorKind::contour_ring, SimulatorKind::tidal_like, SimulatorKind::volcano_like}) {
    CHECK(parse_simulator_kind(to_string(k)) == k);
  }
}
