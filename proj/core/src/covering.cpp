#include "sofdim/covering.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "sofdim/lp.hpp"

namespace sofdim {

namespace {

constexpr double kTie = 1e-12;

struct Geometry {
  int d;
  int J;
  std::vector<double> row_weight;  // w_j / d per stacked row
};

Geometry geometry(const PointCloud& cloud, const NormSelector& rho) {
  Geometry g{cloud.d, rho.components, {}};
  g.row_weight.resize(static_cast<std::size_t>(g.J) * g.d);
  for (int j = 0; j < g.J; ++j)
    for (int c = 0; c < g.d; ++c) g.row_weight[j * g.d + c] = rho.component_weight(j) / g.d;
  return g;
}

double tail_term(const PointCloud& cloud, const NormSelector& rho) {
  if (!rho.is_product() || cloud.tail_bound == 0) return 0.0;
  ProductNorm pn{rho.p, rho.ratio};
  return pn.tail_weight(rho.components) * std::pow(cloud.tail_bound, rho.p);
}

// Per-coordinate contribution to rho^p.
std::vector<double> coord_costs(const Eigen::VectorXd& r, const Geometry& g, double p) {
  std::vector<double> cost(g.d, 0.0);
  for (int j = 0; j < g.J; ++j)
    for (int c = 0; c < g.d; ++c) {
      const double v = std::abs(r[j * g.d + c]);
      cost[c] += g.row_weight[j * g.d + c] * (p == 2.0 ? v * v : std::pow(v, p));
    }
  return cost;
}

// Keeps the `keep` cheapest coordinates; returns the kept set and its cost sum.
std::pair<std::vector<int>, double> best_cut(const std::vector<double>& cost, int keep) {
  std::vector<int> idx(cost.size());
  std::iota(idx.begin(), idx.end(), 0);
  if (keep < static_cast<int>(idx.size()))
    std::nth_element(idx.begin(), idx.begin() + keep, idx.end(),
                     [&](int a, int b) { return cost[a] < cost[b] || (cost[a] == cost[b] && a < b); });
  idx.resize(keep);
  std::sort(idx.begin(), idx.end());
  double s = 0;
  for (int c : idx) s += cost[c];
  return {idx, s};
}

double finish(double cost_sum, double tail, double p) { return std::pow(cost_sum + tail, 1.0 / p); }

Eigen::MatrixXd stack(const std::vector<Eigen::VectorXd>& cols, Eigen::Index rows) {
  Eigen::MatrixXd m(rows, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (cols[i].size() != rows) throw DimensionError("basis vector length differs from the cloud's");
    m.col(static_cast<Eigen::Index>(i)) = cols[i];
  }
  return m;
}

// Weighted least squares of f on the columns of B using the rows of the kept
// coordinates (all components).
Eigen::VectorXd fit(const Eigen::MatrixXd& B, const Eigen::VectorXd& f, const Geometry& g,
                    const std::vector<int>& kept) {
  if (B.cols() == 0) return Eigen::VectorXd();
  const Eigen::Index rows = static_cast<Eigen::Index>(kept.size()) * g.J;
  Eigen::MatrixXd A(rows, B.cols());
  Eigen::VectorXd b(rows);
  Eigen::Index r = 0;
  for (int j = 0; j < g.J; ++j)
    for (int c : kept) {
      const int row = j * g.d + c;
      const double s = std::sqrt(g.row_weight[row]);
      A.row(r) = s * B.row(row);
      b[r] = s * f[row];
      ++r;
    }
  return A.colPivHouseholderQr().solve(b);
}

std::vector<int> all_coords(int d) {
  std::vector<int> v(d);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

double rho_norm(const Eigen::VectorXd& v, const Geometry& g, double p) {
  const auto cost = coord_costs(v, g, p);
  return std::pow(std::accumulate(cost.begin(), cost.end(), 0.0), 1.0 / p);
}

void clamp_to_bound(Eigen::VectorXd& coeffs, const Eigen::MatrixXd& B, const Geometry& g, double p,
                    std::optional<double> bound) {
  if (!bound || coeffs.size() == 0) return;
  const double n = rho_norm(B * coeffs, g, p);
  if (n > *bound) coeffs *= *bound / n;
}

PointWitness witness_for_point(const Eigen::MatrixXd& B, const Eigen::VectorXd& f, const Geometry& g,
                               int keep, double tail, double p, std::optional<double> bound) {
  PointWitness best;
  std::vector<int> kept = all_coords(g.d);
  for (int round = 0; round < 4; ++round) {
    Eigen::VectorXd coeffs = fit(B, f, g, kept);
    clamp_to_bound(coeffs, B, g, p, bound);
    const Eigen::VectorXd r = B.cols() ? Eigen::VectorXd(f - B * coeffs) : f;
    auto [cut, s] = best_cut(coord_costs(r, g, p), keep);
    const double res = finish(s, tail, p);
    if (round > 0 && !(res < best.residual - 1e-15)) break;
    best = {cut, coeffs, res};
    kept = std::move(cut);
  }
  return best;
}

void for_each_combination(int n, int k, const std::function<bool(const std::vector<int>&)>& fn) {
  std::vector<int> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  if (k > n) return;
  while (true) {
    if (!fn(idx)) return;
    int i = k - 1;
    while (i >= 0 && idx[i] == n - k + i) --i;
    if (i < 0) return;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace

double NormSelector::component_weight(int j) const {
  return is_product() ? std::pow(ratio, -static_cast<double>(j + 1)) : 1.0;
}

void NormSelector::validate() const {
  if (!(p >= 1.0)) throw ParameterError("norm selector: p must be >= 1");
  if (components < 1) throw ParameterError("norm selector: components must be >= 1");
  if (is_product() && !(ratio > 1.0)) throw ParameterError("norm selector: ratio must exceed 1");
}

void PointCloud::validate(const NormSelector& rho) const {
  rho.validate();
  if (d < 1) throw DimensionError("point cloud: d must be positive");
  const Eigen::Index len = static_cast<Eigen::Index>(d) * rho.components;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].size() != len)
      throw DimensionError("point cloud: point " + std::to_string(i) + " has length " +
                           std::to_string(points[i].size()) + ", expected " + std::to_string(len));
    if (!points[i].allFinite()) throw DimensionError("point cloud: point " + std::to_string(i) + " is not finite");
  }
  if (!(tail_bound >= 0) || !std::isfinite(tail_bound))
    throw ParameterError("point cloud: tail bound must be finite and nonnegative");
}

int min_kept(int d, double eps) {
  return static_cast<int>(std::ceil((1.0 - eps) * d - 1e-12));
}

CoveringResult epsilon_contains(const PointCloud& cloud, const std::vector<Eigen::VectorXd>& basis,
                                double eps, std::optional<double> bound, const NormSelector& rho) {
  if (!(eps > 0 && eps < 1)) throw ParameterError("epsilon_contains: eps must lie in (0,1)");
  cloud.validate(rho);
  const Geometry g = geometry(cloud, rho);
  const Eigen::MatrixXd B = stack(basis, static_cast<Eigen::Index>(g.d) * g.J);
  const int keep = min_kept(g.d, eps);
  const double tail = tail_term(cloud, rho);

  CoveringResult out;
  out.basis = basis;
  out.dim = numerical_rank(B);
  out.success = true;
  for (int i = 0; i < cloud.size(); ++i) {
    PointWitness w = witness_for_point(B, cloud.points[i], g, keep, tail, rho.p, bound);
    const bool ok = w.residual < eps - kTie;
    out.per_point.push_back(std::move(w));
    if (!ok) {
      out.success = false;
      out.failing_point = i;
      out.failing_residual = out.per_point.back().residual;
      break;
    }
  }
  return out;
}

bool replay_witnesses(const PointCloud& cloud, const CoveringResult& result, double eps,
                      std::optional<double> bound, const NormSelector& rho) {
  if (!result.success || static_cast<int>(result.per_point.size()) != cloud.size()) return false;
  const Geometry g = geometry(cloud, rho);
  const Eigen::MatrixXd B = stack(result.basis, static_cast<Eigen::Index>(g.d) * g.J);
  const int keep = min_kept(g.d, eps);
  const double tail = tail_term(cloud, rho);
  for (int i = 0; i < cloud.size(); ++i) {
    const auto& w = result.per_point[i];
    if (static_cast<int>(w.cut.size()) < keep) return false;
    if (w.coeffs.size() != B.cols()) return false;
    const Eigen::VectorXd gv = B.cols() ? Eigen::VectorXd(B * w.coeffs) : Eigen::VectorXd::Zero(B.rows());
    if (bound && rho_norm(gv, g, rho.p) > *bound * (1 + 1e-12)) return false;
    const auto cost = coord_costs(cloud.points[i] - gv, g, rho.p);
    double s = 0;
    for (int c : w.cut) {
      if (c < 0 || c >= g.d) return false;
      s += cost[c];
    }
    if (!(finish(s, tail, rho.p) < eps - kTie)) return false;
  }
  return true;
}

GreedyResult d_eps_greedy_detail(const PointCloud& cloud, double eps, const NormSelector& rho) {
  if (!(eps > 0 && eps < 1)) throw ParameterError("d_eps_greedy: eps must lie in (0,1)");
  cloud.validate(rho);
  if (!(finish(0.0, tail_term(cloud, rho), rho.p) < eps - kTie))
    throw ParameterError("d_eps_greedy: the tail bound alone reaches eps; no subspace can contain the cloud");
  const Geometry g = geometry(cloud, rho);
  const Eigen::Index D = static_cast<Eigen::Index>(g.d) * g.J;
  const int n = cloud.size();
  GreedyResult out;
  if (n == 0) {
    out.witness = epsilon_contains(cloud, {}, eps, std::nullopt, rho);
    return out;
  }
  Eigen::VectorXd s(D);
  for (Eigen::Index r = 0; r < D; ++r) s[r] = std::sqrt(g.row_weight[r]);
  Eigen::MatrixXd Y(D, n);
  for (int i = 0; i < n; ++i) Y.col(i) = s.cwiseProduct(cloud.points[i]);

  Eigen::BDCSVD<Eigen::MatrixXd> svd(Y, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > 1e-10 * std::max(1.0, sv[0])) ++rank;
  const Eigen::MatrixXd U = svd.matrixU().leftCols(rank);
  const Eigen::MatrixXd C = U.transpose() * Y;

  const int keep = min_kept(g.d, eps);
  const double tail = tail_term(cloud, rho);
  Eigen::MatrixXd R = Y;
  int found = rank;
  for (int r = 0; r <= rank; ++r) {
    if (r > 0) R.noalias() -= U.col(r - 1) * C.row(r - 1);
    bool all = true;
    for (int i = 0; i < n && all; ++i) {
      const Eigen::VectorXd orig = R.col(i).cwiseQuotient(s);
      const double res = finish(best_cut(coord_costs(orig, g, rho.p), keep).second, tail, rho.p);
      all = res < eps - kTie;
    }
    if (all) {
      found = r;
      break;
    }
  }
  out.dim = found;
  std::vector<Eigen::VectorXd> basis;
  for (int r = 0; r < found; ++r) basis.push_back(U.col(r).cwiseQuotient(s));
  out.witness = epsilon_contains(cloud, basis, eps, std::nullopt, rho);
  return out;
}

int d_eps_greedy(const PointCloud& cloud, double eps, const NormSelector& rho) {
  return d_eps_greedy_detail(cloud, eps, rho).dim;
}

int d_eps_exact(const PointCloud& cloud, double eps, const NormSelector& rho) {
  if (!(eps > 0 && eps < 1)) throw ParameterError("d_eps_exact: eps must lie in (0,1)");
  cloud.validate(rho);
  if (cloud.d > 8 || cloud.size() > 32)
    throw ScopeError("d_eps_exact: oracle regime is d <= 8 and at most 32 points (got d=" +
                     std::to_string(cloud.d) + ", " + std::to_string(cloud.size()) + " points)");
  const Geometry g = geometry(cloud, rho);
  const Eigen::Index D = static_cast<Eigen::Index>(g.d) * g.J;
  const int n = cloud.size();
  const int keep = min_kept(g.d, eps);
  const double tail = tail_term(cloud, rho);

  std::vector<std::vector<int>> cuts;
  for_each_combination(g.d, keep, [&](const std::vector<int>& c) {
    cuts.push_back(c);
    return true;
  });

  auto point_ok = [&](const Eigen::MatrixXd& B, const Eigen::VectorXd& f) {
    for (const auto& cut : cuts) {
      const Eigen::VectorXd coeffs = fit(B, f, g, cut);
      const Eigen::VectorXd r = B.cols() ? Eigen::VectorXd(f - B * coeffs) : f;
      const auto cost = coord_costs(r, g, rho.p);
      double s = 0;
      for (int c : cut) s += cost[c];
      if (finish(s, tail, rho.p) < eps - kTie) return true;
    }
    return false;
  };
  auto subspace_ok = [&](const Eigen::MatrixXd& B) {
    for (int i = 0; i < n; ++i)
      if (!point_ok(B, cloud.points[i])) return false;
    return true;
  };

  const GreedyResult greedy = d_eps_greedy_detail(cloud, eps, rho);
  Eigen::MatrixXd all(D, n);
  for (int i = 0; i < n; ++i) all.col(i) = cloud.points[i];
  const int rank = numerical_rank(all);

  for (int r = 0; r <= rank; ++r) {
    if (r == greedy.dim) return r;  // the greedy subspace itself is in the family
    bool found = false;
    for_each_combination(n, r, [&](const std::vector<int>& subset) {
      Eigen::MatrixXd B(D, r);
      for (int k = 0; k < r; ++k) B.col(k) = cloud.points[subset[k]];
      if (numerical_rank(B) < r) return true;
      found = subspace_ok(B);
      return !found;
    });
    if (found) return r;
  }
  return rank;
}

double kappa_log_rhs(double k, double eps) {
  return 0.5 * std::log(2.0) + ((1.0 - k) - eps) * std::log(eps) + k * std::log(2.0 + 4.0 * eps) -
         eps * std::log(eps) - (1.0 - eps) * std::log(1.0 - eps);
}

double kappa_proj_log_rhs(double k, double eps, double q) {
  const double head = q < 1.0 ? (1.0 - q) * std::log(1.0 - q) : 0.0;
  return head - (q - eps) * std::log(q - eps) - eps * std::log(eps) - (1.0 - eps) * std::log(1.0 - eps) +
         k * q * std::log(4.0) + q * std::log(2.0) + (1.0 - k) * q * std::log(eps);
}

namespace {
template <class F>
KappaResult bisect_increasing(F f, double target) {
  KappaResult out;
  const double f0 = f(0.0), f1 = f(1.0);
  if (f0 >= target) {
    out.value = 0.0;
    out.clamped = f0 > target + 1e-12;
    return out;
  }
  if (f1 < target) {
    out.value = 1.0;
    out.clamped = true;
    return out;
  }
  double lo = 0.0, hi = 1.0;
  while (hi - lo > 1e-10 && out.iterations < 200) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < target ? lo : hi) = mid;
    ++out.iterations;
  }
  out.value = 0.5 * (lo + hi);
  return out;
}
}  // namespace

KappaResult kappa(double alpha, double eps, double p) {
  if (!(alpha > 0 && alpha <= 1)) throw ParameterError("kappa: alpha must lie in (0,1]");
  if (!(eps > 0 && eps < 0.5)) throw ParameterError("kappa: eps must lie in (0,1/2)");
  if (!(p >= 1)) throw ParameterError("kappa: p must be >= 1");
  return bisect_increasing([eps](double k) { return kappa_log_rhs(k, eps); }, std::log(alpha));
}

KappaResult kappa_proj(double alpha, double eps, double q) {
  if (!(alpha > 0)) throw ParameterError("kappa_proj: alpha must be positive");
  if (!(eps > 0 && eps < 1)) throw ParameterError("kappa_proj: eps must lie in (0,1)");
  if (!(q > eps && q <= 1)) throw ParameterError("kappa_proj: q must lie in (eps,1]");
  return bisect_increasing([eps, q](double k) { return kappa_proj_log_rhs(k, eps, q); }, std::log(alpha));
}

}  // namespace sofdim
