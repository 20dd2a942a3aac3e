#pragma once

#include "seqei/design.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace seqei {

/// A scalar-output computer model. May throw or return a non-finite value to
/// signal a failed run.
using Simulator = std::function<double(const Eigen::VectorXd&)>;

enum class Interpolation { nearest, bilinear };

std::string_view to_string(Interpolation i);
Interpolation parse_interpolation(std::string_view name);

/// Tabulated two-input simulator. values(i, k) is the output at the i-th
/// level of x1 and the k-th level of x2, levels equally spaced over the domain.
struct GridSimulator {
  Domain domain;
  Eigen::MatrixXd values;
  Interpolation interpolation = Interpolation::bilinear;

  GridSimulator(Domain dom, Eigen::MatrixXd vals, Interpolation interp = Interpolation::bilinear);

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
  /// Input location of node (i, k).
  Eigen::Vector2d node(Eigen::Index i, Eigen::Index k) const;
};

/// Throws std::out_of_range outside the grid's domain.
double eval_grid(const GridSimulator& sim, const Eigen::VectorXd& x);

/// Branin-Hoo on [-5, 10] x [0, 15].
double branin(const Eigen::VectorXd& x);
Domain branin_domain();

/// Sum of squared offsets from `center`.
double quadratic_bowl(const Eigen::VectorXd& x, const Eigen::VectorXd& center);

/// exp(-8 |x - (0.5, 0.5)|^2) on [0, 1]^2; its 0.5 level set is the circle
/// of radius contour_ring_radius() about the centre.
double contour_ring(const Eigen::VectorXd& x);
double contour_ring_radius();

/// Adds independent N(0, noise_sd^2) noise from a seeded stream, one draw per
/// call in call order. The returned callable shares its stream across copies.
Simulator with_noise(Simulator base, double noise_sd, std::uint64_t seed);

/// Synthetic stand-ins for tabulated codes: a 13 x 41 grid with a single
/// interior peak, and a grid rising monotonically along a ridge.
GridSimulator tidal_like_grid();
GridSimulator volcano_like_grid();

enum class SimulatorKind { grid_file, branin, quadratic_bowl, contour_ring, tidal_like, volcano_like };

std::string_view to_string(SimulatorKind k);
SimulatorKind parse_simulator_kind(std::string_view name);

struct SimulatorSpec {
  SimulatorKind kind = SimulatorKind::quadratic_bowl;
  std::string grid_path;                   // grid_file
  Interpolation interpolation = Interpolation::bilinear;
  std::optional<Eigen::VectorXd> center;   // quadratic_bowl; defaults to 0.3 in every dimension
  double noise_sd = 0.0;
};

/// Natural domain of a simulator kind, if it has one.
std::optional<Domain> natural_domain(const SimulatorSpec& spec);

/// Builds the simulator; noise (if any) is drawn from `noise_seed`.
Simulator make_simulator(const SimulatorSpec& spec, std::uint64_t noise_seed);

}  // namespace seqei
