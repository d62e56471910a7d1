#pragma once

// File formats of the command-line tool: JSON for specs, blocks, configs and
// reports; CSV for datasets and per-replication rows. Every float is written
// with 17 significant digits so that emitted files re-parse exactly.

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

#include "rcreg/dataset.hpp"
#include "rcreg/errors.hpp"
#include "rcreg/estimation.hpp"
#include "rcreg/identification.hpp"
#include "rcreg/simulation.hpp"

namespace rcreg::cli {

using nlohmann::json;

// Malformed input file.
class InputError : public Error {
 public:
  using Error::Error;
};

std::string format_double(double x);

/// Pretty JSON; arrays of scalars stay on one line. Non-finite numbers become null.
std::string emit_json(const json& j);

/// Throws InputError for a missing, empty or unparsable file.
json read_json_file(const std::string& path);

/// {"supports": [[w11, w12, ...], [w21, ...], ...]}
SupportSpec support_spec_from_json(const json& j);
json to_json(const SupportSpec& spec);

/// {identified, rank, full_dim, deficient_coordinates, witness_points}
json to_json(const IdentReport& r);
IdentReport ident_report_from_json(const json& j);

/// {cov_B0_B2: [[...]], cov_B1_B2: [...], var_B0_plus_B1: x}
PartialIdBlocks blocks_from_json(const json& j);
json to_json(const PartialIdBlocks& b);

/// {lower, upper, classification}
json to_json(const VarianceBounds& b);
VarianceBounds bounds_from_json(const json& j);

/// Header "y,w1,...,w{p-1}", one observation per line. Errors name the line.
Dataset parse_dataset_csv(std::istream& in);
Dataset read_dataset_csv(const std::string& path);
void write_dataset_csv(std::ostream& out, const Dataset& data);

/// Serialized view of a MomentFit.
struct FitRecord {
  Eigen::VectorXd mu_hat;
  Eigen::VectorXd sigma_init;
  Eigen::VectorXd sigma_hat;
  Eigen::MatrixXd Sigma_hat;
  std::vector<int> active_set;  // 0-based half-vector positions
  bool psd = false;
  double min_eigenvalue = 0.0;
  double lambda_used = 0.0;
  bool converged = false;
};

FitRecord fit_record(const MomentFit& fit);
json to_json(const FitRecord& r);
FitRecord fit_record_from_json(const json& j);

void write_path_csv(std::ostream& out, const std::vector<PathPoint>& path);

/// A simulation config plus an optional sweep over n.
struct SimPlan {
  SimConfig config;
  std::vector<int> sweep_n;
};

/// Unknown keys are rejected. "lambda" may be a number, null or "AUTO".
SimPlan sim_plan_from_json(const json& j);
json to_json(const SimConfig& cfg);
SimConfig sim_config_from_json(const json& j);

/// Everything in a SimReport except the per-replication rows.
json summary_to_json(const SimReport& r);
SimReport summary_from_json(const json& j);

/// Columns rep, sign_ok, fp, fn (failed replications: sign_ok = fp = fn = NA).
void write_replications_csv(std::ostream& out, const SimReport& r);

}  // namespace rcreg::cli
