#include "seqei/simulators.hpp"

#include "seqei/io.hpp"
#include "seqei/rng.hpp"

#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>

namespace seqei {

std::string_view to_string(Interpolation i) {
  return i == Interpolation::nearest ? "nearest" : "bilinear";
}

Interpolation parse_interpolation(std::string_view name) {
  if (name == "nearest") return Interpolation::nearest;
  if (name == "bilinear") return Interpolation::bilinear;
  throw std::invalid_argument("unknown interpolation '" + std::string(name) + "'");
}

GridSimulator::GridSimulator(Domain dom, Eigen::MatrixXd vals, Interpolation interp)
    : domain(std::move(dom)), values(std::move(vals)), interpolation(interp) {
  if (domain.dims() != 2) throw std::invalid_argument("grid simulators are two-dimensional");
  if (values.rows() < 2 || values.cols() < 2) {
    throw std::invalid_argument("grid needs at least two levels per input");
  }
  if (!values.allFinite()) throw std::invalid_argument("grid values must be finite");
}

Eigen::Vector2d GridSimulator::node(Eigen::Index i, Eigen::Index k) const {
  const auto w = domain.width();
  return {domain.lower()[0] + w[0] * static_cast<double>(i) / static_cast<double>(rows() - 1),
          domain.lower()[1] + w[1] * static_cast<double>(k) / static_cast<double>(cols() - 1)};
}

double eval_grid(const GridSimulator& sim, const Eigen::VectorXd& x) {
  if (x.size() != 2 || !sim.domain.contains(x)) {
    throw std::out_of_range("grid simulator evaluated outside its domain");
  }
  const Eigen::VectorXd u = sim.domain.to_unit(x);
  const double pos0 = u[0] * static_cast<double>(sim.rows() - 1);
  const double pos1 = u[1] * static_cast<double>(sim.cols() - 1);
  if (sim.interpolation == Interpolation::nearest) {
    // Halfway points go to the lower index.
    const auto i = static_cast<Eigen::Index>(std::ceil(pos0 - 0.5));
    const auto k = static_cast<Eigen::Index>(std::ceil(pos1 - 0.5));
    return sim.values(std::clamp<Eigen::Index>(i, 0, sim.rows() - 1),
                      std::clamp<Eigen::Index>(k, 0, sim.cols() - 1));
  }
  const auto i = std::min(static_cast<Eigen::Index>(std::floor(pos0)), sim.rows() - 2);
  const auto k = std::min(static_cast<Eigen::Index>(std::floor(pos1)), sim.cols() - 2);
  const double t = pos0 - static_cast<double>(i);
  const double s = pos1 - static_cast<double>(k);
  const auto& v = sim.values;
  return (1 - t) * (1 - s) * v(i, k) + t * (1 - s) * v(i + 1, k) + (1 - t) * s * v(i, k + 1) +
         t * s * v(i + 1, k + 1);
}

double branin(const Eigen::VectorXd& x) {
  if (x.size() != 2) throw std::invalid_argument("branin takes two inputs");
  constexpr double pi = std::numbers::pi;
  const double b = 5.1 / (4.0 * pi * pi);
  const double c = 5.0 / pi;
  const double t = 1.0 / (8.0 * pi);
  const double q = x[1] - b * x[0] * x[0] + c * x[0] - 6.0;
  return q * q + 10.0 * (1.0 - t) * std::cos(x[0]) + 10.0;
}

Domain branin_domain() { return Domain(Eigen::Vector2d(-5.0, 0.0), Eigen::Vector2d(10.0, 15.0)); }

double quadratic_bowl(const Eigen::VectorXd& x, const Eigen::VectorXd& center) {
  if (x.size() != center.size()) throw std::invalid_argument("quadratic_bowl: dimension mismatch");
  return (x - center).squaredNorm();
}

double contour_ring(const Eigen::VectorXd& x) {
  if (x.size() != 2) throw std::invalid_argument("contour_ring takes two inputs");
  return std::exp(-8.0 * (x - Eigen::Vector2d(0.5, 0.5)).squaredNorm());
}

double contour_ring_radius() { return std::sqrt(std::numbers::ln2 / 8.0); }

Simulator with_noise(Simulator base, double noise_sd, std::uint64_t seed) {
  if (!(noise_sd >= 0.0)) throw std::invalid_argument("noise sd must be >= 0");
  if (noise_sd == 0.0) return base;
  auto rng = std::make_shared<Rng>(seed);
  return [base = std::move(base), noise_sd, rng](const Eigen::VectorXd& x) {
    const double y = base(x);
    return y + noise_sd * rng->normal();
  };
}

GridSimulator tidal_like_grid() {
  const Domain dom(Eigen::Vector2d(0.75, 0.2), Eigen::Vector2d(0.95, 0.8));
  Eigen::MatrixXd v(13, 41);
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    for (Eigen::Index k = 0; k < v.cols(); ++k) {
      const double x1 = 0.75 + 0.2 * static_cast<double>(i) / 12.0;
      const double x2 = 0.2 + 0.6 * static_cast<double>(k) / 40.0;
      const double peak = std::exp(-(std::pow((x1 - 0.8) / 0.03, 2) + std::pow((x2 - 0.45) / 0.08, 2)));
      const double swell = std::exp(-(std::pow((x1 - 0.9) / 0.08, 2) + std::pow((x2 - 0.6) / 0.3, 2)));
      v(i, k) = 20.0 + 140.0 * peak + 60.0 * swell;
    }
  }
  return GridSimulator(dom, std::move(v));
}

GridSimulator volcano_like_grid() {
  const Domain dom(Eigen::Vector2d(5.0, 5.0), Eigen::Vector2d(12.0, 20.0));
  Eigen::MatrixXd v(29, 31);
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    for (Eigen::Index k = 0; k < v.cols(); ++k) {
      const double x1 = 5.0 + 7.0 * static_cast<double>(i) / 28.0;
      const double x2 = 5.0 + 15.0 * static_cast<double>(k) / 30.0;
      // Flow height grows with volume and falls with friction angle.
      const double drive = 1.2 * (x1 - 5.0) - 0.45 * (x2 - 5.0) + 0.3;
      v(i, k) = drive > 0.0 ? drive * drive : 0.0;
    }
  }
  return GridSimulator(dom, std::move(v));
}

std::string_view to_string(SimulatorKind k) {
  switch (k) {
    case SimulatorKind::grid_file: return "grid_file";
    case SimulatorKind::branin: return "branin";
    case SimulatorKind::quadratic_bowl: return "quadratic_bowl";
    case SimulatorKind::contour_ring: return "contour_ring";
    case SimulatorKind::tidal_like: return "tidal_like";
    case SimulatorKind::volcano_like: return "volcano_like";
  }
  return "quadratic_bowl";
}

SimulatorKind parse_simulator_kind(std::string_view name) {
  for (auto k : {SimulatorKind::grid_file, SimulatorKind::branin, SimulatorKind::quadratic_bowl,
                 SimulatorKind::contour_ring, SimulatorKind::tidal_like, SimulatorKind::volcano_like}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown simulator kind '" + std::string(name) + "'");
}

std::optional<Domain> natural_domain(const SimulatorSpec& spec) {
  switch (spec.kind) {
    case SimulatorKind::branin: return branin_domain();
    case SimulatorKind::contour_ring: return Domain::unit(2);
    case SimulatorKind::tidal_like: return tidal_like_grid().domain;
    case SimulatorKind::volcano_like: return volcano_like_grid().domain;
    case SimulatorKind::grid_file: return read_grid_json(spec.grid_path).domain;
    case SimulatorKind::quadratic_bowl: return std::nullopt;
  }
  return std::nullopt;
}

Simulator make_simulator(const SimulatorSpec& spec, std::uint64_t noise_seed) {
  Simulator base;
  switch (spec.kind) {
    case SimulatorKind::branin:
      base = [](const Eigen::VectorXd& x) { return branin(x); };
      break;
    case SimulatorKind::contour_ring:
      base = [](const Eigen::VectorXd& x) { return contour_ring(x); };
      break;
    case SimulatorKind::quadratic_bowl:
      base = [center = spec.center](const Eigen::VectorXd& x) {
        return quadratic_bowl(x, center ? *center : Eigen::VectorXd::Constant(x.size(), 0.3));
      };
      break;
    case SimulatorKind::tidal_like:
    case SimulatorKind::volcano_like:
    case SimulatorKind::grid_file: {
      GridSimulator grid = spec.kind == SimulatorKind::tidal_like    ? tidal_like_grid()
                           : spec.kind == SimulatorKind::volcano_like ? volcano_like_grid()
                                                                      : read_grid_json(spec.grid_path);
      grid.interpolation = spec.interpolation;
      base = [grid = std::move(grid)](const Eigen::VectorXd& x) { return eval_grid(grid, x); };
      break;
    }
  }
  return with_noise(std::move(base), spec.noise_sd, noise_seed);
}

}  // namespace seqei
