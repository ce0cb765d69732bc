// Epsilon-containment of point clouds in linear subspaces, covering
// dimensions, and the volume-packing lower bounds.
#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "sofdim/core.hpp"

namespace sofdim {

// Norm used to measure residuals on l^p(d) with normalized counting measure.
// `components` > 1 selects the product norm over stacked tuples
// (f_1, ..., f_J), each f_j in l^p(d): rho(f)^p = sum_j ratio^{-j} ||f_j||_p^p.
struct NormSelector {
  double p = 2.0;
  int components = 1;
  double ratio = 2.0;

  static NormSelector lp(double p) { return {p, 1, 2.0}; }
  static NormSelector product(double p, int components, double ratio = 2.0) {
    return {p, components, ratio};
  }
  bool is_product() const { return components > 1; }
  double component_weight(int j) const;  // j = 0-based component index
  void validate() const;
};

struct PointCloud {
  int d = 0;                            // coordinates per component
  std::vector<Eigen::VectorXd> points;  // each of length components * d
  // Bound on |f_j| for components beyond the stored prefix (product norm
  // only); contributes to the upper end of every residual interval.
  double tail_bound = 0.0;

  void validate(const NormSelector& rho) const;
  int size() const { return static_cast<int>(points.size()); }
};

// Cut sets must keep at least ceil((1-eps) d) coordinates.
int min_kept(int d, double eps);

struct PointWitness {
  std::vector<int> cut;     // kept coordinates C (sorted)
  Eigen::VectorXd coeffs;   // g = basis * coeffs
  double residual = 0.0;    // upper end of rho(chi_C (f - g))
};

struct CoveringResult {
  bool success = false;
  int dim = 0;                        // rank of the basis
  std::vector<Eigen::VectorXd> basis;
  std::vector<PointWitness> per_point;
  int failing_point = -1;             // first point without a witness
  double failing_residual = 0.0;
};

// Tries every point against span(basis): fit, delete the worst coordinates,
// refit on the kept set; a point passes when its residual is below eps - 1e-12.
// With `bound`, the fitted g is scaled into the rho-ball of that radius.
CoveringResult epsilon_contains(const PointCloud& cloud, const std::vector<Eigen::VectorXd>& basis,
                                double eps, std::optional<double> bound, const NormSelector& rho);

// Re-evaluates stored witnesses (cut sizes, residuals, bound) without refitting.
bool replay_witnesses(const PointCloud& cloud, const CoveringResult& result, double eps,
                      std::optional<double> bound, const NormSelector& rho);

// Smallest r such that the top-r weighted principal subspace contains the
// cloud, each point fit by least squares on all coordinates before its worst
// coordinates are deleted. Nonincreasing in eps.
struct GreedyResult {
  int dim = 0;
  CoveringResult witness;
};
GreedyResult d_eps_greedy_detail(const PointCloud& cloud, double eps, const NormSelector& rho);
int d_eps_greedy(const PointCloud& cloud, double eps, const NormSelector& rho);

// Exhaustive minimum over a finite witness family: spans of point subsets and
// the greedy principal prefixes, each point taking its best cut. Limited to
// d <= 8 and at most 32 points; otherwise throws ScopeError.
int d_eps_exact(const PointCloud& cloud, double eps, const NormSelector& rho);

struct KappaResult {
  double value = 0.0;
  bool clamped = false;  // no root in [0,1]; value is the nearer endpoint
  int iterations = 0;
};

// Root in kappa of
//   alpha = sqrt(2) eps^{(1-kappa)-eps} (2+4eps)^kappa (1/eps)^eps (1/(1-eps))^{1-eps}.
// Requires 0 < alpha <= 1, 0 < eps < 1/2, p >= 1. Bisection to 1e-10.
KappaResult kappa(double alpha, double eps, double p);

// Root in kappa of
//   alpha = (1-q)^{1-q} / ((q-eps)^{q-eps} eps^eps (1-eps)^{1-eps}) 4^{kappa q} 2^q eps^{(1-kappa) q}.
// Requires alpha > 0, 0 < eps < 1, eps < q <= 1.
KappaResult kappa_proj(double alpha, double eps, double q);

// Log of the right-hand sides above, exposed for tests and plots.
double kappa_log_rhs(double k, double eps);
double kappa_proj_log_rhs(double k, double eps, double q);

}  // namespace sofdim
