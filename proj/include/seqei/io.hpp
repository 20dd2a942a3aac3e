#pragma once

#include "seqei/criteria.hpp"
#include "seqei/design.hpp"
#include "seqei/emulator.hpp"
#include "seqei/oracle.hpp"
#include "seqei/sequential.hpp"
#include "seqei/simulators.hpp"

#include <json.hpp>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace seqei {

using json = nlohmann::json;

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

struct CsvTable {
  std::vector<std::string> header;
  Eigen::MatrixXd rows;
};

CsvTable read_csv(const std::string& path);
void write_csv(std::ostream& out, const std::vector<std::string>& header, const Eigen::MatrixXd& rows);
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const Eigen::MatrixXd& rows);

/// x1,...,xd
std::vector<std::string> input_header(Eigen::Index dims);

void write_points_csv(std::ostream& out, const Eigen::MatrixXd& points);
void write_points_csv(const std::string& path, const Eigen::MatrixXd& points);
CandidateSet read_candidates_csv(const std::string& path);

/// Dataset CSV: x1,...,xd,z. Without a domain, the bounding box of the
/// inputs is used (padded by 0.5 where a column is constant).
Dataset read_dataset_csv(const std::string& path, Transformation t,
                         const std::optional<Domain>& domain = std::nullopt);
void write_dataset_csv(const std::string& path, const Dataset& data);
Domain bounding_domain(const Eigen::MatrixXd& X);

/// x1,...,xd,yhat,s,ei
void write_surface_csv(const std::string& path, const EiSurface& surface);

json domain_to_json(const Domain& d);
Domain domain_from_json(const json& j);

json model_to_json(const GpModel& m);
GpModel model_from_json(const json& j);

GridSimulator read_grid_json(const std::string& path);
json grid_to_json(const GridSimulator& g);

json criterion_to_json(const CriterionSpec& s);
CriterionSpec criterion_from_json(const json& j);

json proposal_to_json(const Proposal& p, const Incumbent& incumbent, const CriterionSpec& spec);
json history_to_json(const RunHistory& h);
json report_to_json(const VerifyReport& r);

json read_json(const std::string& path);
/// Writes j.dump(2) plus a trailing newline.
void write_json(const std::string& path, const json& j);

}  // namespace seqei
