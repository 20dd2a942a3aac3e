#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string_view>
#include <vector>

namespace seqei {

/// Rectangular input region, one closed interval per input dimension.
class Domain {
 public:
  Domain(Eigen::VectorXd lower, Eigen::VectorXd upper);

  /// Parses "l1:u1,l2:u2,..." as used on the command line.
  static Domain parse(std::string_view spec);
  static Domain unit(Eigen::Index dims);

  Eigen::Index dims() const { return lower_.size(); }
  const Eigen::VectorXd& lower() const { return lower_; }
  const Eigen::VectorXd& upper() const { return upper_; }
  Eigen::VectorXd width() const { return upper_ - lower_; }

  bool contains(const Eigen::Ref<const Eigen::VectorXd>& x, double tol = 0.0) const;

  // Maps between natural units and the unit cube, row-wise for matrices.
  Eigen::VectorXd to_unit(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  Eigen::MatrixXd rows_to_unit(const Eigen::MatrixXd& points) const;
  Eigen::VectorXd from_unit(const Eigen::Ref<const Eigen::VectorXd>& u) const;
  Eigen::MatrixXd rows_from_unit(const Eigen::MatrixXd& unit_points) const;

  bool operator==(const Domain& other) const;

 private:
  Eigen::VectorXd lower_;
  Eigen::VectorXd upper_;
};

/// A set of n input points (rows) inside a Domain.
struct Design {
  Eigen::MatrixXd points;
  Domain domain;

  Design(Eigen::MatrixXd pts, Domain dom);
  Eigen::Index size() const { return points.rows(); }

  /// True if two rows coincide within 1e-12 in unit-scaled coordinates.
  bool has_duplicate_rows() const;
};

enum class Provenance { grid, lhs, user };

std::string_view to_string(Provenance p);

struct CandidateSet {
  Eigen::MatrixXd points;
  Provenance provenance = Provenance::user;

  CandidateSet(Eigen::MatrixXd pts, Provenance prov);
  Eigen::Index size() const { return points.rows(); }
};

/// Initial run-count rule: ten runs per input dimension.
int initial_run_count(int dims);

struct LhsOptions {
  /// Place points at stratum centres instead of jittering within strata.
  bool centered = false;
};

/// Latin hypercube: every one-dimensional projection has exactly one point
/// in each of the n equal-width strata.
Design latin_hypercube(int n, const Domain& domain, std::uint64_t seed,
                       LhsOptions options = {});

/// Best of n_restarts Latin hypercubes, each improved by column-swap hill
/// climbing, ranked by minimum pairwise unit-scaled distance. Restart 0
/// starts from latin_hypercube(n, domain, seed), so the result never has a
/// smaller minimum distance than that plain draw.
Design maximin_lhs(int n, const Domain& domain, std::uint64_t seed, int n_restarts,
                   LhsOptions options = {});

/// Full factorial grid, dimension 1 varying slowest.
CandidateSet grid_candidates(const Domain& domain, const std::vector<int>& resolution);

/// Minimum pairwise Euclidean distance in unit-scaled coordinates.
double min_interpoint_distance(const Design& design);

}  // namespace seqei
