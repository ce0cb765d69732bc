// l^p norms, product norms on bounded sequences, finite direct integrals.
#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "sofdim/core.hpp"

namespace sofdim {

// (sum_i w_i |v_i|^p)^{1/p}. Without weights: unit weights, or 1/n each when
// `normalized` is set.
double lp_norm(const Eigen::VectorXd& v, double p,
               const std::optional<std::vector<double>>& weights = std::nullopt,
               bool normalized = false);

// Weighted l^p norm on N with geometric weights w_j = ratio^{-j}, j >= 1.
struct ProductNorm {
  double p = 1.0;
  double ratio = 2.0;

  double weight(int j) const;             // j >= 1
  double tail_weight(int prefix) const;   // sum_{j > prefix} w_j
  void validate() const;
};

struct Interval {
  double lower = 0;
  double upper = 0;
  bool contains(double x) const { return lower <= x && x <= upper; }
  double width() const { return upper - lower; }
};

// Encloses rho(f) for f given as a finite prefix (entries j = 1..n) and a
// bound |f(j)| <= tail_bound for j > n. Width is at most
// tail_weight(n)^{1/p} * tail_bound.
Interval product_norm_eval(const ProductNorm& rho, const std::vector<double>& prefix,
                           double tail_bound);

// Per-atom fiber vectors over an atom space (fiber dimensions may vary).
struct VectorField {
  std::vector<double> weights;
  std::vector<Eigen::VectorXd> fibers;

  VectorField() = default;
  VectorField(const AtomSpace& space, std::vector<Eigen::VectorXd> fibers);
  static VectorField zero(const AtomSpace& space, const std::vector<int>& dims);
  int atoms() const { return static_cast<int>(fibers.size()); }
};

double direct_integral_norm(const VectorField& field, double p);

struct SupportSet {
  std::vector<int> atoms;
  bool operator==(const SupportSet&) const = default;
};

SupportSet support(const VectorField& field);
double support_mass(const VectorField& field);

// Fiber dimensions and fiber transport of a field of finite-dimensional
// spaces over a finite relation. Transport is pi(x,y) = B_x B_y^{-1} from
// per-atom frames; with no frames it is the identity, which requires equal
// dimensions along each orbit.
struct FieldProfile {
  FinRel rel;
  std::vector<int> dims;
  std::vector<Eigen::MatrixXd> frames;  // empty, or one invertible dims[x]-square matrix per atom

  void validate() const;
  Eigen::MatrixXd transport(int x, int y) const;  // V_y -> V_x
  int total_dim() const;
  std::vector<int> offsets() const;  // start of each atom's block in the stacked vector
};

// Rank of the translated fibers {pi(x,y) w_y : y ~ x} at every atom equals
// dims[x]. Pivot threshold 1e-10 relative to the largest entry.
bool is_dynamically_generating(const std::vector<VectorField>& fields,
                               const FieldProfile& profile);

// Numerical rank by Gaussian elimination with full pivoting; entries below
// rel_tol * max|entry| are treated as zero.
int numerical_rank(Eigen::MatrixXd m, double rel_tol = 1e-10);

}  // namespace sofdim
