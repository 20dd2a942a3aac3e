#include "seqei/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace seqei {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(line);
  while (std::getline(in, item, sep)) {
    while (!item.empty() && (item.back() == '\r' || item.back() == ' ')) item.pop_back();
    while (!item.empty() && item.front() == ' ') item.erase(item.begin());
    out.push_back(item);
  }
  return out;
}

double to_double(const std::string& s, const std::string& where) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw std::runtime_error(where + ": not a number: '" + s + "'");
  }
  return v;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return in;
}

json vector_to_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vector_from_json(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(vector_to_json(m.row(i).transpose()));
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j, Eigen::Index cols) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), cols);
  for (std::size_t i = 0; i < j.size(); ++i) {
    const Eigen::VectorXd row = vector_from_json(j[i]);
    if (row.size() != cols) throw std::runtime_error("matrix row has the wrong length");
    m.row(static_cast<Eigen::Index>(i)) = row.transpose();
  }
  return m;
}

json summary_to_json(const ModelSummary& s) {
  return {{"theta", vector_to_json(s.theta)}, {"p", vector_to_json(s.p)}, {"mu", s.mu},
          {"sigma2", s.sigma2},               {"nugget", s.nugget},       {"loglik", s.loglik}};
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw std::runtime_error("cannot format number");
  return std::string(buf, ptr);
}

CsvTable read_csv(const std::string& path) {
  auto in = open_in(path);
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("'" + path + "' is empty");
  t.header = split(line, ',');
  std::vector<std::vector<double>> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \r\t") == std::string::npos) continue;
    const auto cells = split(line, ',');
    if (cells.size() != t.header.size()) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected " +
                               std::to_string(t.header.size()) + " fields");
    }
    std::vector<double> row;
    for (const auto& c : cells) row.push_back(to_double(c, path + ":" + std::to_string(lineno)));
    rows.push_back(std::move(row));
  }
  t.rows.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(t.header.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      t.rows(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return t;
}

void write_csv(std::ostream& out, const std::vector<std::string>& header, const Eigen::MatrixXd& rows) {
  for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
  out << '\n';
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    for (Eigen::Index j = 0; j < rows.cols(); ++j) out << (j ? "," : "") << format_double(rows(i, j));
    out << '\n';
  }
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const Eigen::MatrixXd& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  write_csv(out, header, rows);
}

std::vector<std::string> input_header(Eigen::Index dims) {
  std::vector<std::string> h;
  for (Eigen::Index j = 0; j < dims; ++j) h.push_back("x" + std::to_string(j + 1));
  return h;
}

void write_points_csv(std::ostream& out, const Eigen::MatrixXd& points) {
  write_csv(out, input_header(points.cols()), points);
}

void write_points_csv(const std::string& path, const Eigen::MatrixXd& points) {
  write_csv(path, input_header(points.cols()), points);
}

CandidateSet read_candidates_csv(const std::string& path) {
  CsvTable t = read_csv(path);
  if (t.rows.rows() < 1) throw std::runtime_error("'" + path + "' has no candidate rows");
  return CandidateSet(std::move(t.rows), Provenance::user);
}

Domain bounding_domain(const Eigen::MatrixXd& X) {
  Eigen::VectorXd lo = X.colwise().minCoeff().transpose();
  Eigen::VectorXd hi = X.colwise().maxCoeff().transpose();
  for (Eigen::Index j = 0; j < lo.size(); ++j) {
    if (!(lo[j] < hi[j])) {
      lo[j] -= 0.5;
      hi[j] += 0.5;
    }
  }
  return Domain(lo, hi);
}

Dataset read_dataset_csv(const std::string& path, Transformation t,
                         const std::optional<Domain>& domain) {
  CsvTable table = read_csv(path);
  if (table.header.size() < 2) throw std::runtime_error("'" + path + "' needs x1,...,xd,z columns");
  if (table.rows.rows() < 1) throw std::runtime_error("'" + path + "' has no data rows");
  const Eigen::Index d = table.rows.cols() - 1;
  Eigen::MatrixXd X = table.rows.leftCols(d);
  Eigen::VectorXd z = table.rows.col(d);
  Domain dom = domain ? *domain : bounding_domain(X);
  return Dataset(std::move(X), std::move(z), t, std::move(dom));
}

void write_dataset_csv(const std::string& path, const Dataset& data) {
  auto header = input_header(data.dims());
  header.push_back("z");
  Eigen::MatrixXd rows(data.size(), data.dims() + 1);
  rows << data.X, data.z_raw;
  write_csv(path, header, rows);
}

void write_surface_csv(const std::string& path, const EiSurface& s) {
  auto header = input_header(s.points.cols());
  header.insert(header.end(), {"yhat", "s", "ei"});
  Eigen::MatrixXd rows(s.points.rows(), s.points.cols() + 3);
  rows << s.points, s.mean, s.sd, s.ei;
  write_csv(path, header, rows);
}

json domain_to_json(const Domain& d) {
  json b = json::array();
  for (Eigen::Index j = 0; j < d.dims(); ++j) b.push_back({d.lower()[j], d.upper()[j]});
  return {{"bounds", b}};
}

Domain domain_from_json(const json& j) {
  const json& b = j.contains("bounds") ? j.at("bounds") : j;
  Eigen::VectorXd lo(static_cast<Eigen::Index>(b.size())), hi(static_cast<Eigen::Index>(b.size()));
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (b[i].size() != 2) throw std::runtime_error("each bound must be a [lower, upper] pair");
    lo[static_cast<Eigen::Index>(i)] = b[i][0].get<double>();
    hi[static_cast<Eigen::Index>(i)] = b[i][1].get<double>();
  }
  return Domain(lo, hi);
}

json model_to_json(const GpModel& m) {
  const Dataset& d = m.dataset();
  return {
      {"format", "seqei-gp/1"},
      {"theta", vector_to_json(m.params().theta)},
      {"p", vector_to_json(m.params().p)},
      {"mu", m.mu()},
      {"sigma2", m.sigma2()},
      {"nugget", m.nugget()},
      {"loglik", m.loglik()},
      {"transformation", std::string(d.transformation.name())},
      {"domain", domain_to_json(d.domain)},
      {"training", {{"X", matrix_to_json(d.X)}, {"z", vector_to_json(d.z_raw)}}},
      {"plug_in", m.plug_in()},
      {"degenerate_variance", m.degenerate_variance()},
  };
}

GpModel model_from_json(const json& j) {
  try {
    const Domain dom = domain_from_json(j.at("domain"));
    const Transformation t = Transformation::parse(j.at("transformation").get<std::string>());
    Eigen::MatrixXd X = matrix_from_json(j.at("training").at("X"), dom.dims());
    Eigen::VectorXd z = vector_from_json(j.at("training").at("z"));
    Dataset data(std::move(X), std::move(z), t, dom);
    CorrelationParams cp{vector_from_json(j.at("theta")), vector_from_json(j.at("p"))};
    return GpModel::restore(std::move(data), std::move(cp), j.at("nugget").get<double>(),
                            j.at("mu").get<double>(), j.at("sigma2").get<double>(),
                            j.value("loglik", 0.0));
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("malformed model JSON: ") + e.what());
  }
}

GridSimulator read_grid_json(const std::string& path) {
  const json j = read_json(path);
  try {
    const Domain dom = domain_from_json(j);
    const auto res = j.at("resolution").get<std::vector<int>>();
    const auto vals = j.at("values").get<std::vector<double>>();
    if (res.size() != 2 || res[0] < 2 || res[1] < 2) {
      throw std::runtime_error("grid resolution must be two counts >= 2");
    }
    if (vals.size() != static_cast<std::size_t>(res[0]) * static_cast<std::size_t>(res[1])) {
      throw std::runtime_error("grid value count does not match its resolution");
    }
    Eigen::MatrixXd v(res[0], res[1]);
    for (int i = 0; i < res[0]; ++i) {
      for (int k = 0; k < res[1]; ++k) v(i, k) = vals[static_cast<std::size_t>(i * res[1] + k)];
    }
    const auto interp = parse_interpolation(j.value("interpolation", std::string("bilinear")));
    return GridSimulator(dom, std::move(v), interp);
  } catch (const json::exception& e) {
    throw std::runtime_error("malformed grid file '" + path + "': " + e.what());
  }
}

json grid_to_json(const GridSimulator& g) {
  std::vector<double> vals;
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    for (Eigen::Index k = 0; k < g.cols(); ++k) vals.push_back(g.values(i, k));
  }
  json j = domain_to_json(g.domain);
  j["resolution"] = {g.rows(), g.cols()};
  j["values"] = vals;
  j["interpolation"] = std::string(to_string(g.interpolation));
  return j;
}

json criterion_to_json(const CriterionSpec& s) {
  json j = {{"kind", std::string(to_string(s.kind))}};
  switch (s.kind) {
    case CriterionKind::minimize: break;
    case CriterionKind::minimize_exponentiated: j["g"] = s.g; break;
    case CriterionKind::minimize_weighted: j["w"] = s.w; break;
    case CriterionKind::contour: j["a"] = s.a; j["alpha"] = s.alpha; break;
    case CriterionKind::multi_contour: j["levels"] = s.levels; j["alpha"] = s.alpha; break;
    case CriterionKind::percentile:
      j["p_target"] = s.p_target; j["alpha"] = s.alpha; j["g"] = s.g;
      break;
    case CriterionKind::noisy_quantile: j["lambda"] = s.lambda; break;
    case CriterionKind::constrained_minimize:
      j["constraint"] = {s.constraint_lo, s.constraint_hi};
      break;
  }
  return j;
}

CriterionSpec criterion_from_json(const json& j) {
  try {
    CriterionSpec s;
    s.kind = parse_criterion_kind(j.at("kind").get<std::string>());
    if (s.kind == CriterionKind::percentile) s.g = 2;
    if (s.kind == CriterionKind::minimize_exponentiated) s.g = 1;
    if (j.contains("a")) s.a = j["a"].get<double>();
    if (j.contains("levels")) s.levels = j["levels"].get<std::vector<double>>();
    if (j.contains("alpha")) s.alpha = j["alpha"].get<double>();
    if (j.contains("g")) s.g = j["g"].get<int>();
    if (j.contains("w")) s.w = j["w"].get<double>();
    if (j.contains("lambda")) s.lambda = j["lambda"].get<double>();
    if (j.contains("p_target")) s.p_target = j["p_target"].get<double>();
    if (j.contains("constraint")) {
      const auto c = j["constraint"].get<std::vector<double>>();
      if (c.size() != 2) throw std::invalid_argument("constraint must be [lo, hi]");
      s.constraint_lo = c[0];
      s.constraint_hi = c[1];
    }
    if (s.kind == CriterionKind::contour && !j.contains("a")) {
      throw std::invalid_argument("contour criterion needs a level 'a'");
    }
    if (s.kind == CriterionKind::constrained_minimize && !j.contains("constraint")) {
      throw std::invalid_argument("constrained_minimize needs 'constraint': [lo, hi]");
    }
    s.validate();
    return s;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed criterion: ") + e.what());
  }
}

json proposal_to_json(const Proposal& p, const Incumbent& incumbent, const CriterionSpec& spec) {
  return {{"x_new", vector_to_json(p.x_new)},
          {"candidate_index", p.index},
          {"ei_value", p.ei_value},
          {"tie_broken", p.tie_broken},
          {"incumbent", incumbent.value},
          {"criterion", criterion_to_json(spec)}};
}

json history_to_json(const RunHistory& h) {
  json its = json::array();
  for (const auto& r : h.iterations) {
    its.push_back({{"index", r.index},
                   {"x", vector_to_json(r.x)},
                   {"z", r.z},
                   {"y", r.y},
                   {"constraint", r.constraint},
                   {"incumbent", r.incumbent},
                   {"ei_max", r.ei_max},
                   {"tie_broken", r.tie_broken},
                   {"model", summary_to_json(r.model)}});
  }
  json j = {{"initial", {{"X", matrix_to_json(h.initial_X)}, {"z", vector_to_json(h.initial_z)}}},
            {"iterations", its},
            {"stop_reason", std::string(to_string(h.stop_reason))},
            {"threshold", h.threshold},
            {"final_incumbent", h.final_incumbent},
            {"final_ei_max", h.final_ei_max},
            {"final_model", summary_to_json(h.final_model)}};
  if (h.best_x.size() > 0) {
    j["best"] = {{"x", vector_to_json(h.best_x)}, {"z", h.best_z}};
  }
  if (!h.failure_message.empty()) j["failure_message"] = h.failure_message;
  return j;
}

json report_to_json(const VerifyReport& r) {
  json trials = json::array();
  for (const auto& t : r.results) {
    json config = criterion_to_json(t.spec);
    config["yhat"] = t.pred.mean;
    config["s"] = t.pred.sd;
    config["incumbent"] = t.incumbent.value;
    trials.push_back({{"config", config},
                      {"closed_form", t.closed_form},
                      {"mc_mean", t.mc_mean},
                      {"mc_stderr", t.mc_stderr},
                      {"z", t.z}});
  }
  return {{"kind", std::string(to_string(r.kind))},
          {"trials", r.trials},
          {"n_samples", r.n_samples},
          {"seed", r.seed},
          {"z_limit", r.z_limit},
          {"max_abs_z", r.max_abs_z},
          {"failures", r.failures},
          {"pass", r.pass},
          {"results", trials}};
}

json read_json(const std::string& path) {
  auto in = open_in(path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error("'" + path + "' is not valid JSON: " + e.what());
  }
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

}  // namespace seqei
