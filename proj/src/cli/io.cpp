#include "rcreg/cli/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace rcreg::cli {

namespace {

bool is_scalar(const json& j) { return !j.is_array() && !j.is_object(); }

void emit(const json& j, std::string& out, int depth) {
  const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
  const std::string close(static_cast<std::size_t>(2 * depth), ' ');
  if (j.is_object()) {
    if (j.empty()) {
      out += "{}";
      return;
    }
    out += "{\n";
    bool first = true;
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (!first) out += ",\n";
      first = false;
      out += pad;
      out += json(it.key()).dump();
      out += ": ";
      emit(it.value(), out, depth + 1);
    }
    out += "\n" + close + "}";
  } else if (j.is_array()) {
    if (j.empty()) {
      out += "[]";
      return;
    }
    bool flat = true;
    for (const auto& e : j) flat = flat && is_scalar(e);
    if (flat) {
      out += "[";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ", ";
        emit(j[i], out, depth + 1);
      }
      out += "]";
      return;
    }
    out += "[\n";
    for (std::size_t i = 0; i < j.size(); ++i) {
      if (i) out += ",\n";
      out += pad;
      emit(j[i], out, depth + 1);
    }
    out += "\n" + close + "]";
  } else if (j.is_number_float()) {
    const double x = j.get<double>();
    out += std::isfinite(x) ? format_double(x) : "null";
  } else {
    out += j.dump();
  }
}

[[noreturn]] void bad(const std::string& what) { throw InputError(what); }

const json& field(const json& j, const char* key) {
  if (!j.is_object()) bad("expected a JSON object");
  const auto it = j.find(key);
  if (it == j.end()) bad(std::string("missing field '") + key + "'");
  return *it;
}

double number(const json& j, const std::string& what) {
  if (!j.is_number()) bad(what + ": expected a number");
  return j.get<double>();
}

int integer(const json& j, const std::string& what) {
  if (!j.is_number_integer()) bad(what + ": expected an integer");
  return j.get<int>();
}

bool boolean(const json& j, const std::string& what) {
  if (!j.is_boolean()) bad(what + ": expected true or false");
  return j.get<bool>();
}

Eigen::VectorXd vector_from(const json& j, const std::string& what) {
  if (!j.is_array()) bad(what + ": expected an array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = number(j[i], what);
  return v;
}

Eigen::MatrixXd matrix_from(const json& j, const std::string& what) {
  if (!j.is_array()) bad(what + ": expected an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  Eigen::Index cols = 0;
  if (rows > 0) {
    if (!j[0].is_array()) bad(what + ": expected an array of rows");
    cols = static_cast<Eigen::Index>(j[0].size());
  }
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) bad(what + ": ragged matrix");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = number(row[static_cast<std::size_t>(c)], what);
  }
  return m;
}

json to_array(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json to_rows(const Eigen::MatrixXd& m) {
  json a = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) a.push_back(to_array(m.row(r).transpose()));
  return a;
}

std::vector<int> int_list(const json& j, const std::string& what) {
  if (!j.is_array()) bad(what + ": expected an array of integers");
  std::vector<int> out;
  for (const auto& e : j) out.push_back(integer(e, what));
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, ',')) out.push_back(trim(cur));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  std::string s(buf);
  // Keep floats recognizable as floats.
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string emit_json(const json& j) {
  std::string out;
  emit(j, out, 0);
  out += "\n";
  return out;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) bad("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  if (trim(text).empty()) bad(path + ": empty file");
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    bad(path + ": " + e.what());
  }
}

SupportSpec support_spec_from_json(const json& j) {
  const json& s = field(j, "supports");
  if (!s.is_array()) bad("'supports' must be an array of arrays");
  std::vector<std::vector<double>> supports;
  for (std::size_t c = 0; c < s.size(); ++c) {
    const std::string what = "coordinate " + std::to_string(c + 1);
    if (!s[c].is_array()) bad(what + ": expected an array of support points");
    std::vector<double> pts;
    for (const auto& e : s[c]) pts.push_back(number(e, what));
    supports.push_back(std::move(pts));
  }
  return SupportSpec(std::move(supports));
}

json to_json(const SupportSpec& spec) {
  json s = json::array();
  for (const auto& pts : spec.supports()) s.push_back(pts);
  return json{{"supports", s}};
}

json to_json(const IdentReport& r) {
  json pts = json::array();
  for (const auto& w : r.witness_points) pts.push_back(to_array(w));
  json j;
  j["identified"] = r.identified;
  j["rank"] = r.achieved_rank;
  j["full_dim"] = r.full_dim;
  j["deficient_coordinates"] = r.deficient_coordinates;
  j["witness_points"] = pts;
  return j;
}

IdentReport ident_report_from_json(const json& j) {
  IdentReport r;
  r.identified = boolean(field(j, "identified"), "identified");
  r.achieved_rank = integer(field(j, "rank"), "rank");
  r.full_dim = integer(field(j, "full_dim"), "full_dim");
  r.deficient_coordinates = int_list(field(j, "deficient_coordinates"), "deficient_coordinates");
  const json& pts = field(j, "witness_points");
  if (!pts.is_array()) bad("witness_points: expected an array");
  for (const auto& w : pts) r.witness_points.push_back(vector_from(w, "witness_points"));
  return r;
}

PartialIdBlocks blocks_from_json(const json& j) {
  PartialIdBlocks b;
  b.cov_b0_b2 = matrix_from(field(j, "cov_B0_B2"), "cov_B0_B2");
  b.cov_b1_b2 = vector_from(field(j, "cov_B1_B2"), "cov_B1_B2");
  b.var_b0_plus_b1 = number(field(j, "var_B0_plus_B1"), "var_B0_plus_B1");
  return b;
}

json to_json(const PartialIdBlocks& b) {
  json j;
  j["cov_B0_B2"] = to_rows(b.cov_b0_b2);
  j["cov_B1_B2"] = to_array(b.cov_b1_b2);
  j["var_B0_plus_B1"] = b.var_b0_plus_b1;
  return j;
}

json to_json(const VarianceBounds& b) {
  json j;
  j["lower"] = b.lower;
  j["upper"] = b.upper;
  j["classification"] = to_string(b.classification);
  return j;
}

VarianceBounds bounds_from_json(const json& j) {
  VarianceBounds b;
  b.lower = number(field(j, "lower"), "lower");
  b.upper = number(field(j, "upper"), "upper");
  const json& c = field(j, "classification");
  if (!c.is_string()) bad("classification: expected a string");
  try {
    b.classification = randomness_from_string(c.get<std::string>());
  } catch (const Error& e) {
    bad(e.what());
  }
  return b;
}

Dataset parse_dataset_csv(std::istream& in) {
  std::string line;
  int lineno = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineno;
    if (!trim(line).empty()) {
      header = split_csv(line);
      break;
    }
  }
  if (header.empty()) bad("dataset: missing header line");
  if (header[0] != "y") bad("line " + std::to_string(lineno) + ": first column must be 'y'");
  for (std::size_t k = 1; k < header.size(); ++k) {
    if (header[k] != "w" + std::to_string(k)) {
      bad("line " + std::to_string(lineno) + ": column " + std::to_string(k + 1) + " must be 'w" +
          std::to_string(k) + "'");
    }
  }
  const std::size_t width = header.size();
  std::vector<double> values;
  int n = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != width) {
      bad("line " + std::to_string(lineno) + ": expected " + std::to_string(width) + " fields, got " +
          std::to_string(cells.size()));
    }
    for (std::size_t k = 0; k < width; ++k) {
      const std::string& c = cells[k];
      char* end = nullptr;
      const double v = c.empty() ? 0.0 : std::strtod(c.c_str(), &end);
      if (c.empty() || end != c.c_str() + c.size() || !std::isfinite(v)) {
        bad("line " + std::to_string(lineno) + ": field " + std::to_string(k + 1) + " is not a finite number");
      }
      values.push_back(v);
    }
    ++n;
  }
  if (n == 0) bad("dataset: no observations");
  const auto p = static_cast<Eigen::Index>(width);
  Eigen::MatrixXd X(n, p);
  Eigen::VectorXd Y(n);
  for (int i = 0; i < n; ++i) {
    const double* row = values.data() + static_cast<std::size_t>(i) * width;
    Y(i) = row[0];
    X(i, 0) = 1.0;
    for (Eigen::Index k = 1; k < p; ++k) X(i, k) = row[k];
  }
  return Dataset(std::move(X), std::move(Y));
}

Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) bad("cannot open " + path);
  return parse_dataset_csv(in);
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
  out << "y";
  for (int k = 1; k < data.p(); ++k) out << ",w" << k;
  out << "\n";
  for (int i = 0; i < data.n(); ++i) {
    out << format_double(data.Y()(i));
    for (int k = 1; k < data.p(); ++k) out << "," << format_double(data.X()(i, k));
    out << "\n";
  }
}

FitRecord fit_record(const MomentFit& fit) {
  FitRecord r;
  r.mu_hat = fit.mu_hat;
  r.sigma_init = fit.sigma_init;
  r.sigma_hat = fit.sigma_hat.entries();
  r.Sigma_hat = fit.Sigma_hat.matrix();
  r.active_set = fit.lasso.active_set;
  r.psd = fit.psd;
  r.min_eigenvalue = fit.min_eigenvalue;
  r.lambda_used = fit.lambda_used;
  r.converged = fit.lasso.converged;
  return r;
}

json to_json(const FitRecord& r) {
  json j;
  j["mu_hat"] = to_array(r.mu_hat);
  j["sigma_init"] = to_array(r.sigma_init);
  j["sigma_hat"] = to_array(r.sigma_hat);
  j["Sigma_hat"] = to_rows(r.Sigma_hat);
  j["active_set"] = r.active_set;
  j["psd"] = r.psd;
  j["min_eigenvalue"] = r.min_eigenvalue;
  j["lambda_used"] = r.lambda_used;
  j["converged"] = r.converged;
  return j;
}

FitRecord fit_record_from_json(const json& j) {
  FitRecord r;
  r.mu_hat = vector_from(field(j, "mu_hat"), "mu_hat");
  r.sigma_init = vector_from(field(j, "sigma_init"), "sigma_init");
  r.sigma_hat = vector_from(field(j, "sigma_hat"), "sigma_hat");
  r.Sigma_hat = matrix_from(field(j, "Sigma_hat"), "Sigma_hat");
  r.active_set = int_list(field(j, "active_set"), "active_set");
  r.psd = boolean(field(j, "psd"), "psd");
  r.min_eigenvalue = number(field(j, "min_eigenvalue"), "min_eigenvalue");
  r.lambda_used = number(field(j, "lambda_used"), "lambda_used");
  r.converged = boolean(field(j, "converged"), "converged");
  return r;
}

void write_path_csv(std::ostream& out, const std::vector<PathPoint>& path) {
  out << "lambda,df,rss,bic\n";
  for (const auto& pt : path) {
    out << format_double(pt.lambda) << "," << pt.df << "," << format_double(pt.rss) << "," << format_double(pt.bic)
        << "\n";
  }
}

namespace {

const std::set<std::string> kConfigKeys = {
    "n",        "p",          "covariate_law",         "mu1",        "Sigma1",         "b4",
    "lambda",   "replications", "seed",                "pilot_replications", "grid_size", "grid_min_ratio",
    "lambda_grid", "penalize_intercept_variance", "sweep_n"};

}  // namespace

SimPlan sim_plan_from_json(const json& j) {
  if (!j.is_object()) bad("simulation config must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!kConfigKeys.count(it.key())) bad("unknown config key '" + it.key() + "'");
  }
  SimPlan plan;
  SimConfig& c = plan.config;
  if (j.contains("n")) c.n = integer(j["n"], "n");
  if (j.contains("p")) c.p = integer(j["p"], "p");
  if (j.contains("covariate_law")) {
    if (!j["covariate_law"].is_string()) bad("covariate_law: expected a string");
    try {
      c.covariate_law = covariate_law_from_string(j["covariate_law"].get<std::string>());
    } catch (const Error& e) {
      bad(e.what());
    }
  }
  if (j.contains("mu1")) {
    const Eigen::VectorXd mu = vector_from(j["mu1"], "mu1");
    if (mu.size() != 4) bad("mu1: expected 4 entries");
    c.mu1 = mu;
  }
  if (j.contains("Sigma1")) {
    const Eigen::MatrixXd s = matrix_from(j["Sigma1"], "Sigma1");
    if (s.rows() != 4 || s.cols() != 4) bad("Sigma1: expected a 4 x 4 matrix");
    c.Sigma1 = s;
  }
  if (j.contains("b4")) c.b4 = number(j["b4"], "b4");
  if (j.contains("lambda")) {
    const json& l = j["lambda"];
    if (l.is_null() || (l.is_string() && l.get<std::string>() == "AUTO")) {
      c.lambda.reset();
    } else {
      c.lambda = number(l, "lambda");
    }
  }
  if (j.contains("replications")) c.replications = integer(j["replications"], "replications");
  if (j.contains("seed")) {
    const json& s = j["seed"];
    if (!s.is_number_integer()) bad("seed: expected a non-negative integer");
    if (s.is_number_unsigned()) {
      c.seed = s.get<std::uint64_t>();
    } else {
      if (s.get<std::int64_t>() < 0) bad("seed: expected a non-negative integer");
      c.seed = static_cast<std::uint64_t>(s.get<std::int64_t>());
    }
  }
  if (j.contains("pilot_replications")) c.pilot_replications = integer(j["pilot_replications"], "pilot_replications");
  if (j.contains("grid_size")) c.grid_size = integer(j["grid_size"], "grid_size");
  if (j.contains("grid_min_ratio")) c.grid_min_ratio = number(j["grid_min_ratio"], "grid_min_ratio");
  if (j.contains("lambda_grid")) {
    const Eigen::VectorXd g = vector_from(j["lambda_grid"], "lambda_grid");
    c.lambda_grid.assign(g.data(), g.data() + g.size());
  }
  if (j.contains("penalize_intercept_variance")) {
    c.penalize_intercept_variance = boolean(j["penalize_intercept_variance"], "penalize_intercept_variance");
  }
  if (j.contains("sweep_n")) {
    plan.sweep_n = int_list(j["sweep_n"], "sweep_n");
    if (plan.sweep_n.empty()) bad("sweep_n: expected at least one sample size");
  }
  return plan;
}

json to_json(const SimConfig& c) {
  json j;
  j["n"] = c.n;
  j["p"] = c.p;
  j["covariate_law"] = to_string(c.covariate_law);
  j["mu1"] = to_array(c.mu1);
  j["Sigma1"] = to_rows(c.Sigma1);
  j["b4"] = c.b4;
  j["lambda"] = c.lambda ? json(*c.lambda) : json("AUTO");
  j["replications"] = c.replications;
  j["seed"] = c.seed;
  j["pilot_replications"] = c.pilot_replications;
  j["grid_size"] = c.grid_size;
  j["grid_min_ratio"] = c.grid_min_ratio;
  j["lambda_grid"] = c.lambda_grid;
  j["penalize_intercept_variance"] = c.penalize_intercept_variance;
  return j;
}

SimConfig sim_config_from_json(const json& j) {
  SimPlan plan = sim_plan_from_json(j);
  if (!plan.sweep_n.empty()) bad("sweep_n is not part of a single configuration");
  return plan.config;
}

json summary_to_json(const SimReport& r) {
  json j;
  j["lambda_used"] = r.lambda_used;
  j["lambda_tuned"] = r.lambda_tuned;
  j["tuning_fallback"] = r.tuning_fallback;
  j["replications"] = r.replications;
  j["failures"] = r.failures;
  j["successes"] = r.successes;
  j["sign_recovery_rate"] = r.sign_recovery_rate;
  j["fp_histogram"] = r.fp_histogram;
  j["fn_histogram"] = r.fn_histogram;
  j["psd_among_success"] = r.psd_among_success;
  j["superset_violations"] = r.superset_violations;
  return j;
}

SimReport summary_from_json(const json& j) {
  SimReport r;
  r.lambda_used = number(field(j, "lambda_used"), "lambda_used");
  r.lambda_tuned = boolean(field(j, "lambda_tuned"), "lambda_tuned");
  r.tuning_fallback = boolean(field(j, "tuning_fallback"), "tuning_fallback");
  r.replications = integer(field(j, "replications"), "replications");
  r.failures = integer(field(j, "failures"), "failures");
  r.successes = integer(field(j, "successes"), "successes");
  r.sign_recovery_rate = number(field(j, "sign_recovery_rate"), "sign_recovery_rate");
  r.fp_histogram = int_list(field(j, "fp_histogram"), "fp_histogram");
  r.fn_histogram = int_list(field(j, "fn_histogram"), "fn_histogram");
  r.psd_among_success = integer(field(j, "psd_among_success"), "psd_among_success");
  r.superset_violations = integer(field(j, "superset_violations"), "superset_violations");
  return r;
}

void write_replications_csv(std::ostream& out, const SimReport& r) {
  out << "rep,sign_ok,fp,fn\n";
  for (const auto& row : r.per_rep) {
    if (row.failed) {
      out << row.rep << ",NA,NA,NA\n";
    } else {
      out << row.rep << "," << (row.sign_ok ? 1 : 0) << "," << row.fp << "," << row.fn << "\n";
    }
  }
}

}  // namespace rcreg::cli
