#include "rcreg/identification.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "rcreg/errors.hpp"
#include "rcreg/moment_algebra.hpp"

namespace rcreg {

namespace {

std::string coord_label(int coord) { return "coordinate " + std::to_string(coord + 1); }

std::string join(const std::vector<int>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  return os.str();
}

std::vector<int> deficient_coordinates(const SupportSpec& spec) {
  std::vector<int> out;
  for (int j = 0; j < spec.num_covariates(); ++j) {
    if (spec.points(j).size() < 3) out.push_back(j + 1);
  }
  return out;
}

}  // namespace

SupportSpec::SupportSpec(std::vector<std::vector<double>> supports) : supports_(std::move(supports)) {
  for (std::size_t j = 0; j < supports_.size(); ++j) {
    auto& pts = supports_[j];
    const int c = static_cast<int>(j);
    if (pts.empty()) throw DomainError(coord_label(c) + ": support has no points");
    for (double x : pts) {
      if (!std::isfinite(x)) throw DomainError(coord_label(c) + ": support point is not finite");
    }
    std::sort(pts.begin(), pts.end());
    auto dup = std::adjacent_find(pts.begin(), pts.end());
    if (dup != pts.end()) {
      std::ostringstream os;
      os << coord_label(c) << ": repeated support point " << *dup;
      throw DomainError(os.str());
    }
  }
}

std::size_t SupportSpec::product_size() const {
  std::size_t total = 1;
  for (const auto& pts : supports_) {
    if (total > std::numeric_limits<std::size_t>::max() / pts.size()) {
      return std::numeric_limits<std::size_t>::max();
    }
    total *= pts.size();
  }
  return total;
}

Eigen::MatrixXd build_design_S(const std::vector<CovariatePoint>& points) {
  if (points.empty()) throw DimensionError("build_design_S needs at least one point");
  const Eigen::Index q = points.front().size();
  const int p = static_cast<int>(q) + 1;
  Eigen::MatrixXd s(static_cast<Eigen::Index>(points.size()), half_length(p));
  Eigen::VectorXd x(p);
  x(0) = 1.0;
  for (std::size_t r = 0; r < points.size(); ++r) {
    if (points[r].size() != q) {
      throw DimensionError("point " + std::to_string(r) + " has dimension " +
                           std::to_string(points[r].size()) + ", expected " + std::to_string(q));
    }
    x.tail(q) = points[r];
    v_transform_into(x, s.row(static_cast<Eigen::Index>(r)));
  }
  return s;
}

std::vector<CovariatePoint> cartesian_identifying_points(const SupportSpec& spec) {
  const auto deficient = deficient_coordinates(spec);
  if (!deficient.empty()) {
    throw NotIdentifiable("coordinates with fewer than three support points: " + join(deficient),
                          deficient);
  }
  const int q = spec.num_covariates();
  auto level = [&](int coord, int l) { return spec.points(coord)[static_cast<std::size_t>(l)]; };

  CovariatePoint base(q);
  for (int j = 0; j < q; ++j) base(j) = level(j, 0);

  std::vector<CovariatePoint> out;
  out.reserve(static_cast<std::size_t>(half_length(q + 1)));
  // One coordinate at its second level.
  for (int j = 0; j < q; ++j) {
    CovariatePoint w = base;
    w(j) = level(j, 1);
    out.push_back(std::move(w));
  }
  out.push_back(base);
  // Two coordinates at their second level.
  for (int j = 0; j < q; ++j) {
    for (int k = j + 1; k < q; ++k) {
      CovariatePoint w = base;
      w(j) = level(j, 1);
      w(k) = level(k, 1);
      out.push_back(std::move(w));
    }
  }
  // One coordinate at its third level.
  for (int k = 0; k < q; ++k) {
    CovariatePoint z = base;
    z(k) = level(k, 2);
    out.push_back(std::move(z));
  }
  return out;
}

IdentReport check_identified(const SupportSpec& spec, const IdentOptions& opts) {
  IdentReport rep;
  const int p = spec.p();
  rep.full_dim = half_length(p);
  rep.deficient_coordinates = deficient_coordinates(spec);

  if (rep.deficient_coordinates.empty()) {
    rep.witness_points = cartesian_identifying_points(spec);
    rep.achieved_rank = numeric_rank(build_design_S(rep.witness_points), opts.rank_tol);
    rep.identified = rep.achieved_rank == rep.full_dim;
    return rep;
  }

  const std::size_t total = spec.product_size();
  if (total > opts.product_cap) {
    throw ExplosionError("Cartesian product of the supports has " +
                         (total == std::numeric_limits<std::size_t>::max() ? std::string("too many")
                                                                           : std::to_string(total)) +
                         " points (cap " + std::to_string(opts.product_cap) +
                         "); subsample the supports or raise the cap");
  }

  const int q = spec.num_covariates();
  std::vector<CovariatePoint> points;
  points.reserve(total);
  std::vector<std::size_t> idx(static_cast<std::size_t>(q), 0);
  for (std::size_t c = 0; c < total; ++c) {
    CovariatePoint w(q);
    for (int j = 0; j < q; ++j) w(j) = spec.points(j)[idx[static_cast<std::size_t>(j)]];
    points.push_back(std::move(w));
    for (int j = q - 1; j >= 0; --j) {
      auto& i = idx[static_cast<std::size_t>(j)];
      if (++i < spec.points(j).size()) break;
      i = 0;
    }
  }

  const Eigen::MatrixXd s = build_design_S(points);
  rep.achieved_rank = numeric_rank(s, opts.rank_tol);
  rep.identified = rep.achieved_rank == rep.full_dim;

  // Pivot columns of S' pick a maximal independent subset of the rows of S.
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(s.transpose());
  std::vector<Eigen::Index> chosen;
  for (int k = 0; k < rep.achieved_rank; ++k) chosen.push_back(qr.colsPermutation().indices()(k));
  std::sort(chosen.begin(), chosen.end());
  for (auto r : chosen) rep.witness_points.push_back(points[static_cast<std::size_t>(r)]);
  return rep;
}

const char* to_string(Randomness r) {
  switch (r) {
    case Randomness::ForcedZero: return "FORCED_ZERO";
    case Randomness::ForcedPositive: return "FORCED_POSITIVE";
    case Randomness::Interval: return "INTERVAL";
  }
  return "INTERVAL";
}

Randomness randomness_from_string(const std::string& s) {
  if (s == "FORCED_ZERO") return Randomness::ForcedZero;
  if (s == "FORCED_POSITIVE") return Randomness::ForcedPositive;
  if (s == "INTERVAL") return Randomness::Interval;
  throw DomainError("unknown classification '" + s + "'");
}

VarianceBounds binary_variance_interval(double s1, double s2) {
  if (!(s1 >= 0) || !(s2 >= 0)) throw DomainError("standard deviations must be nonnegative");
  VarianceBounds b;
  b.lower = std::abs(s1 - s2);
  b.upper = s1 + s2;
  b.classification = (s1 == 0.0 && s2 == 0.0) ? Randomness::ForcedZero : Randomness::Interval;
  return b;
}

double correlation_for_variance(double s1, double s2, double u) {
  if (!(s1 > 0)) throw DomainError("sd(B0) must be positive");
  if (!(s2 >= 0)) throw DomainError("sd(B0 + B1) must be nonnegative");
  if (!(u > 0)) throw DomainError("sd(B1) must be positive");
  const double lo = std::abs(s1 - s2);
  const double hi = s1 + s2;
  const double slack = 1e-12 * hi;
  if (u < lo - slack || u > hi + slack) {
    std::ostringstream os;
    os << "sd(B1) = " << u << " outside the admissible interval [" << lo << ", " << hi << "]";
    throw DomainError(os.str());
  }
  const double rho = (s2 * s2 - s1 * s1 - u * u) / (2.0 * s1 * u);
  return std::clamp(rho, -1.0, 1.0);
}

MixedMoments mixed_moments_single_regressor(const std::vector<double>& support,
                                            const std::vector<double>& cond_moments, int order) {
  if (order < 0) throw DomainError("moment order must be nonnegative");
  const auto m = static_cast<std::size_t>(order) + 1;
  if (support.size() != m || cond_moments.size() != m) {
    throw DimensionError("order " + std::to_string(order) + " needs " + std::to_string(m) +
                         " support points and conditional moments");
  }
  {
    auto sorted = support;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw SingularSystem("repeated support point makes the Vandermonde system singular");
    }
  }

  // Bjorck-Pereyra: monomial coefficients a of the polynomial through
  // (w_j, f_j); Newton divided differences, then expansion to monomials.
  const int n = order;
  std::vector<double> a = cond_moments;
  const auto& x = support;
  for (int k = 0; k < n; ++k) {
    for (int i = n; i > k; --i) {
      a[i] = (a[i] - a[i - 1]) / (x[i] - x[i - k - 1]);
    }
  }
  for (int k = n - 1; k >= 0; --k) {
    for (int i = k; i < n; ++i) a[i] -= x[k] * a[i + 1];
  }

  MixedMoments out;
  out.moments.resize(n + 1);
  double binom = 1.0;
  for (int k = 0; k <= n; ++k) {
    out.moments(k) = a[k] / binom;
    binom = binom * (n - k) / (k + 1);
  }

  double res = 0.0;
  double scale = 0.0;
  for (int j = 0; j <= n; ++j) {
    double acc = 0.0;
    double c = 1.0;
    double wk = 1.0;
    for (int k = 0; k <= n; ++k) {
      acc += c * wk * out.moments(k);
      c = c * (n - k) / (k + 1);
      wk *= x[j];
    }
    res = std::max(res, std::abs(acc - cond_moments[j]));
    scale = std::max(scale, std::abs(cond_moments[j]));
  }
  out.relative_residual = scale > 0 ? res / scale : res;
  return out;
}

void PartialIdBlocks::validate() const {
  if (cov_b0_b2.rows() < 1 || cov_b0_b2.rows() != cov_b0_b2.cols()) {
    throw DimensionError("Cov((B0, B2')') must be a non-empty square matrix");
  }
  if (cov_b1_b2.size() != cov_b0_b2.rows() - 1) {
    throw DimensionError("Cov(B1; B2) must have length " + std::to_string(cov_b0_b2.rows() - 1));
  }
  if (!cov_b0_b2.allFinite() || !cov_b1_b2.allFinite() || !std::isfinite(var_b0_plus_b1)) {
    throw DomainError("blocks contain non-finite values");
  }
  if ((cov_b0_b2 - cov_b0_b2.transpose()).cwiseAbs().maxCoeff() >
      1e-12 * std::max(1.0, cov_b0_b2.cwiseAbs().maxCoeff())) {
    throw DomainError("Cov((B0, B2')') is not symmetric");
  }
  const double lmin = min_eigenvalue(cov_b0_b2);
  if (lmin < -1e-10) {
    std::ostringstream os;
    os.precision(17);
    os << "Cov((B0, B2')') is not positive semidefinite: min eigenvalue " << lmin;
    throw DomainError(os.str());
  }
  if (var_b0_plus_b1 < 0) throw DomainError("Var(B0 + B1) must be nonnegative");
}

Eigen::MatrixXd PartialIdBlocks::assemble(double s) const {
  const int p = this->p();
  const int q = p - 2;
  Eigen::MatrixXd m(p, p);
  const double v0 = cov_b0_b2(0, 0);
  const double c01 = 0.5 * (var_b0_plus_b1 - v0 - s);
  m(0, 0) = v0;
  m(0, 1) = m(1, 0) = c01;
  m(1, 1) = s;
  if (q > 0) {
    m.block(0, 2, 1, q) = cov_b0_b2.block(0, 1, 1, q);
    m.block(2, 0, q, 1) = cov_b0_b2.block(1, 0, q, 1);
    m.block(1, 2, 1, q) = cov_b1_b2.transpose();
    m.block(2, 1, q, 1) = cov_b1_b2;
    m.block(2, 2, q, q) = cov_b0_b2.block(1, 1, q, q);
  }
  return m;
}

VarianceBounds partial_id_bounds(const PartialIdBlocks& blocks, double tol) {
  if (!(tol > 0)) throw DomainError("tolerance must be positive");
  blocks.validate();

  auto slack = [&](double s) { return min_eigenvalue(blocks.assemble(s)); };
  auto feasible = [&](double s) { return slack(s) >= -tol; };

  // The (B0, B1) minor alone confines s to the squared sd interval of the
  // single binary regressor case.
  const double sd0 = std::sqrt(std::max(0.0, blocks.cov_b0_b2(0, 0)));
  const double sd01 = std::sqrt(blocks.var_b0_plus_b1);
  const double lo = (sd0 - sd01) * (sd0 - sd01);
  const double hi = (sd0 + sd01) * (sd0 + sd01);

  // The minimum eigenvalue is concave in s; golden section finds its maximum.
  double a = lo;
  double b = hi;
  double best_s = lo;
  double best = slack(lo);
  if (const double g = slack(hi); g > best) {
    best = g;
    best_s = hi;
  }
  if (!(best >= -tol)) {
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double gc = slack(c);
    double gd = slack(d);
    for (int it = 0; it < 200 && (b - a) > tol * 1e-3; ++it) {
      if (gc >= -tol || gd >= -tol) break;
      if (gc > gd) {
        b = d;
        d = c;
        gd = gc;
        c = b - invphi * (b - a);
        gc = slack(c);
      } else {
        a = c;
        c = d;
        gc = gd;
        d = a + invphi * (b - a);
        gd = slack(d);
      }
    }
    if (gc >= gd) {
      best = gc;
      best_s = c;
    } else {
      best = gd;
      best_s = d;
    }
  }
  if (!(best >= -tol)) {
    std::ostringstream os;
    os.precision(17);
    os << "no positive semidefinite completion exists; best min eigenvalue " << best << " at Var(B1) = "
       << best_s;
    throw InfeasibleError(os.str());
  }

  auto bisect = [&](double infeasible, double ok) {
    while (std::abs(ok - infeasible) > tol) {
      const double mid = 0.5 * (ok + infeasible);
      if (mid == ok || mid == infeasible) break;
      (feasible(mid) ? ok : infeasible) = mid;
    }
    return ok;
  };

  VarianceBounds out;
  out.lower = feasible(lo) ? lo : bisect(lo, best_s);
  out.upper = feasible(hi) ? hi : bisect(hi, best_s);

  const double zero_slack = 1e3 * tol;
  if (out.upper <= zero_slack) {
    out.lower = out.upper = 0.0;
    out.classification = Randomness::ForcedZero;
  } else if (out.lower > zero_slack) {
    out.classification = Randomness::ForcedPositive;
  } else {
    out.classification = Randomness::Interval;
  }
  return out;
}

VarianceBounds classify_randomness(const PartialIdBlocks& blocks, double tol) {
  blocks.validate();
  const double v0 = blocks.cov_b0_b2(0, 0);
  const double scale = std::max({1.0, std::abs(v0), std::abs(blocks.var_b0_plus_b1)});
  const bool unequal = std::abs(v0 - blocks.var_b0_plus_b1) > tol * scale;
  const bool cross = blocks.cov_b1_b2.size() > 0 && blocks.cov_b1_b2.lpNorm<Eigen::Infinity>() > tol * scale;
  if (unequal || cross) {
    VarianceBounds b = partial_id_bounds(blocks, tol);
    b.classification = Randomness::ForcedPositive;
    return b;
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(blocks.cov_b0_b2);
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double kernel_cut = tol * std::max(1.0, ev.cwiseAbs().maxCoeff());
  for (Eigen::Index k = 0; k < ev.size(); ++k) {
    if (ev(k) <= kernel_cut && std::abs(es.eigenvectors()(0, k)) > 1e-6) {
      return VarianceBounds{0.0, 0.0, Randomness::ForcedZero};
    }
  }

  VarianceBounds b = partial_id_bounds(blocks, tol);
  if (ev(0) > kernel_cut) b.classification = Randomness::Interval;
  return b;
}

}  // namespace rcreg
