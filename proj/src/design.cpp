#include "seqei/design.hpp"

#include "seqei/rng.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace seqei {

namespace {

double parse_double(std::string_view s) {
  double v = 0.0;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  while (first != last && *first == ' ') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last) {
    throw std::invalid_argument("not a number: '" + std::string(s) + "'");
  }
  return v;
}

// Squared pairwise distances between rows of a unit-scaled matrix.
Eigen::MatrixXd pairwise_sq(const Eigen::MatrixXd& u) {
  const Eigen::Index n = u.rows();
  Eigen::MatrixXd d2 = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = i + 1; k < n; ++k) {
      d2(i, k) = d2(k, i) = (u.row(i) - u.row(k)).squaredNorm();
    }
  }
  return d2;
}

struct MaximinScore {
  double min_sq = std::numeric_limits<double>::infinity();
  int count = 0;  // pairs attaining the minimum

  bool better_than(const MaximinScore& o) const {
    constexpr double kTol = 1e-14;
    if (min_sq > o.min_sq + kTol) return true;
    if (min_sq < o.min_sq - kTol) return false;
    return count < o.count;
  }
};

MaximinScore score(const Eigen::MatrixXd& d2) {
  constexpr double kTol = 1e-14;
  MaximinScore s;
  const Eigen::Index n = d2.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = i + 1; k < n; ++k) {
      const double v = d2(i, k);
      if (v < s.min_sq - kTol) {
        s.min_sq = v;
        s.count = 1;
      } else if (v <= s.min_sq + kTol) {
        ++s.count;
      }
    }
  }
  return s;
}

void refresh_rows(const Eigen::MatrixXd& u, Eigen::MatrixXd& d2, Eigen::Index a, Eigen::Index b) {
  for (Eigen::Index r : {a, b}) {
    for (Eigen::Index k = 0; k < u.rows(); ++k) {
      if (k == r) continue;
      d2(r, k) = d2(k, r) = (u.row(r) - u.row(k)).squaredNorm();
    }
  }
}

// Pairwise column-swap hill climbing on a unit-scaled Latin hypercube.
// Swaps preserve each column's multiset of values, hence stratification.
void improve_by_swaps(Eigen::MatrixXd& u) {
  const Eigen::Index n = u.rows();
  const Eigen::Index d = u.cols();
  Eigen::MatrixXd d2 = pairwise_sq(u);
  MaximinScore current = score(d2);
  bool improved = true;
  while (improved) {
    improved = false;
    for (Eigen::Index j = 0; j < d; ++j) {
      for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index k = i + 1; k < n; ++k) {
          std::swap(u(i, j), u(k, j));
          refresh_rows(u, d2, i, k);
          const MaximinScore trial = score(d2);
          if (trial.better_than(current)) {
            current = trial;
            improved = true;
          } else {
            std::swap(u(i, j), u(k, j));
            refresh_rows(u, d2, i, k);
          }
        }
      }
    }
  }
}

Eigen::MatrixXd unit_lhs(int n, Eigen::Index d, std::uint64_t seed, bool centered) {
  Rng rng(seed);
  Eigen::MatrixXd u(n, d);
  std::vector<int> perm(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < d; ++j) {
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm.begin(), perm.end());
    for (int i = 0; i < n; ++i) {
      const double offset = centered ? 0.5 : rng.uniform();
      u(i, j) = (perm[static_cast<std::size_t>(i)] + offset) / n;
    }
  }
  return u;
}

}  // namespace

Domain::Domain(Eigen::VectorXd lower, Eigen::VectorXd upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() < 1) throw std::invalid_argument("domain needs at least one dimension");
  if (lower_.size() != upper_.size()) {
    throw std::invalid_argument("domain lower/upper length mismatch");
  }
  for (Eigen::Index j = 0; j < lower_.size(); ++j) {
    if (!std::isfinite(lower_[j]) || !std::isfinite(upper_[j]) || !(lower_[j] < upper_[j])) {
      throw std::invalid_argument("domain bounds must satisfy lower < upper in dimension " +
                                  std::to_string(j + 1));
    }
  }
}

Domain Domain::parse(std::string_view spec) {
  std::vector<double> lo, hi;
  std::size_t start = 0;
  while (start <= spec.size()) {
    const auto comma = spec.find(',', start);
    const auto item = spec.substr(start, comma == std::string_view::npos ? spec.npos : comma - start);
    const auto colon = item.find(':');
    if (colon == std::string_view::npos) {
      throw std::invalid_argument("bounds entry '" + std::string(item) + "' is not of the form lo:hi");
    }
    lo.push_back(parse_double(item.substr(0, colon)));
    hi.push_back(parse_double(item.substr(colon + 1)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return Domain(Eigen::Map<Eigen::VectorXd>(lo.data(), static_cast<Eigen::Index>(lo.size())),
                Eigen::Map<Eigen::VectorXd>(hi.data(), static_cast<Eigen::Index>(hi.size())));
}

Domain Domain::unit(Eigen::Index dims) {
  return Domain(Eigen::VectorXd::Zero(dims), Eigen::VectorXd::Ones(dims));
}

bool Domain::contains(const Eigen::Ref<const Eigen::VectorXd>& x, double tol) const {
  if (x.size() != dims()) return false;
  for (Eigen::Index j = 0; j < dims(); ++j) {
    const double slack = tol * (upper_[j] - lower_[j]);
    if (x[j] < lower_[j] - slack || x[j] > upper_[j] + slack) return false;
  }
  return true;
}

Eigen::VectorXd Domain::to_unit(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return ((x - lower_).array() / width().array()).matrix();
}

Eigen::MatrixXd Domain::rows_to_unit(const Eigen::MatrixXd& points) const {
  Eigen::MatrixXd u = points.rowwise() - lower_.transpose();
  return u.array().rowwise() / width().transpose().array();
}

Eigen::VectorXd Domain::from_unit(const Eigen::Ref<const Eigen::VectorXd>& u) const {
  return lower_ + (u.array() * width().array()).matrix();
}

Eigen::MatrixXd Domain::rows_from_unit(const Eigen::MatrixXd& unit_points) const {
  Eigen::MatrixXd x = unit_points.array().rowwise() * width().transpose().array();
  return x.rowwise() + lower_.transpose();
}

bool Domain::operator==(const Domain& other) const {
  return lower_ == other.lower_ && upper_ == other.upper_;
}

Design::Design(Eigen::MatrixXd pts, Domain dom) : points(std::move(pts)), domain(std::move(dom)) {
  if (points.rows() < 1) throw std::invalid_argument("design needs at least one point");
  if (points.cols() != domain.dims()) throw std::invalid_argument("design/domain dimension mismatch");
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    if (!domain.contains(points.row(i).transpose(), 1e-12)) {
      throw std::invalid_argument("design point " + std::to_string(i + 1) + " lies outside the domain");
    }
  }
}

bool Design::has_duplicate_rows() const {
  const Eigen::MatrixXd u = domain.rows_to_unit(points);
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    for (Eigen::Index k = i + 1; k < u.rows(); ++k) {
      if ((u.row(i) - u.row(k)).cwiseAbs().maxCoeff() <= 1e-12) return true;
    }
  }
  return false;
}

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::grid: return "grid";
    case Provenance::lhs: return "lhs";
    case Provenance::user: return "user";
  }
  return "user";
}

CandidateSet::CandidateSet(Eigen::MatrixXd pts, Provenance prov)
    : points(std::move(pts)), provenance(prov) {
  if (points.rows() < 1) throw std::invalid_argument("candidate set is empty");
}

int initial_run_count(int dims) {
  if (dims < 1) throw std::invalid_argument("dimension must be positive");
  return 10 * dims;
}

Design latin_hypercube(int n, const Domain& domain, std::uint64_t seed, LhsOptions options) {
  if (n < 1) throw std::invalid_argument("latin hypercube needs n >= 1");
  return Design(domain.rows_from_unit(unit_lhs(n, domain.dims(), seed, options.centered)), domain);
}

Design maximin_lhs(int n, const Domain& domain, std::uint64_t seed, int n_restarts,
                   LhsOptions options) {
  if (n < 2) throw std::invalid_argument("maximin design needs n >= 2");
  if (n_restarts < 1) throw std::invalid_argument("maximin design needs at least one restart");
  Eigen::MatrixXd best;
  MaximinScore best_score{-1.0, 0};
  for (int r = 0; r < n_restarts; ++r) {
    const std::uint64_t s = r == 0 ? seed : derive_seed(seed, static_cast<std::uint64_t>(r));
    Eigen::MatrixXd u = unit_lhs(n, domain.dims(), s, options.centered);
    improve_by_swaps(u);
    const MaximinScore sc = score(pairwise_sq(u));
    if (best.size() == 0 || sc.better_than(best_score)) {  // ties keep the earliest restart
      best = std::move(u);
      best_score = sc;
    }
  }
  return Design(domain.rows_from_unit(best), domain);
}

CandidateSet grid_candidates(const Domain& domain, const std::vector<int>& resolution) {
  const Eigen::Index d = domain.dims();
  if (static_cast<Eigen::Index>(resolution.size()) != d) {
    throw std::invalid_argument("grid resolution must give one level count per dimension");
  }
  Eigen::Index total = 1;
  std::vector<Eigen::VectorXd> levels;
  for (Eigen::Index j = 0; j < d; ++j) {
    const int m = resolution[static_cast<std::size_t>(j)];
    if (m < 2) throw std::invalid_argument("grid resolution must be >= 2 in every dimension");
    Eigen::VectorXd lv(m);
    for (int k = 0; k < m; ++k) {
      lv[k] = domain.lower()[j] + domain.width()[j] * k / (m - 1);
    }
    lv[m - 1] = domain.upper()[j];
    levels.push_back(std::move(lv));
    total *= m;
  }
  Eigen::MatrixXd pts(total, d);
  for (Eigen::Index row = 0; row < total; ++row) {
    Eigen::Index rem = row;
    for (Eigen::Index j = d - 1; j >= 0; --j) {
      const Eigen::Index m = levels[static_cast<std::size_t>(j)].size();
      pts(row, j) = levels[static_cast<std::size_t>(j)][rem % m];
      rem /= m;
    }
  }
  return CandidateSet(std::move(pts), Provenance::grid);
}

double min_interpoint_distance(const Design& design) {
  if (design.size() < 2) throw std::invalid_argument("minimum distance needs at least two points");
  const Eigen::MatrixXd u = design.domain.rows_to_unit(design.points);
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    for (Eigen::Index k = i + 1; k < u.rows(); ++k) {
      best = std::min(best, (u.row(i) - u.row(k)).norm());
    }
  }
  return best;
}

}  // namespace seqei
