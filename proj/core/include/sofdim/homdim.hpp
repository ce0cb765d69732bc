// Almost-equivariant maps into sofic models and the dimension estimator.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sofdim/core.hpp"
#include "sofdim/covering.hpp"
#include "sofdim/exact.hpp"
#include "sofdim/lp.hpp"
#include "sofdim/sofic.hpp"

namespace sofdim {

// A representation of a finite relation given by fibers and transport, plus a
// generating sequence of fields. Elements of the representation are stacked
// vectors in profile.offsets() order.
struct GeneratingSpec {
  Model model;                   // relation plus generators used for words
  FieldProfile profile;          // profile.rel must equal model.rel
  std::vector<VectorField> fields;
  // Orthonormal (in the direct-integral l^2 norm) basis of a kernel the maps
  // must nearly annihilate; empty when unused.
  Eigen::MatrixXd kernel;
  // Set for the regular representation L^2(R) q with q the indicator of these
  // atoms: the fiber at x has one coordinate per y in orbit(x) ∩ points.
  std::optional<std::vector<int>> regular_points;

  void validate() const;  // also checks dynamical generation
  int total_dim() const { return profile.total_dim(); }
};

// L^2(R) q for q = indicator of `points` (all atoms: L^2(R)), generated by the
// compressed diagonal indicator.
GeneratingSpec regular_spec(const Model& model, const std::vector<int>& points);

// Fibers R^{dims[orbit]} with identity transport; generated by the fiber basis
// placed on the first atom of each orbit.
GeneratingSpec constant_fiber_spec(const Model& model, const std::vector<int>& orbit_dims);

// One field per fiber coordinate c, equal to B_o e_c on the first atom o of
// every orbit whose fiber has dimension > c.
std::vector<VectorField> fiber_basis_fields(const FieldProfile& profile);

// Subrepresentation spanned fiberwise by the columns of `bases[x]`
// (orthonormal, dims[x] rows). Fields are orthogonally projected. Throws
// ModelError if the subspaces are not carried into each other by transport.
GeneratingSpec subrepresentation_spec(const GeneratingSpec& spec,
                                      const std::vector<Eigen::MatrixXd>& bases);
// Quotient by that subrepresentation, realized on the fiberwise orthogonal
// complement.
GeneratingSpec quotient_spec(const GeneratingSpec& spec, const std::vector<Eigen::MatrixXd>& bases);
// Restriction to a set of atoms meeting the relation (weights renormalized),
// generated by fiber_basis_fields.
struct CompressedSpec {
  GeneratingSpec spec;
  double mass = 0;
};
CompressedSpec compress_spec(const GeneratingSpec& spec, const std::vector<int>& atoms);

// sum_x mu(x) dim(V_x) / |orbit(x)|, in floating point and exactly.
double orbit_dimension(const FieldProfile& profile);
Rational orbit_dimension_exact(const FieldProfile& profile);

// sum_j mu(support(v_j)).
double support_upper_bound(const GeneratingSpec& spec);

struct HomParams {
  std::vector<std::string> F;  // generator or atom labels; empty = every generator
  int m = 1;                   // word length
  double delta = 0.1;
  double eps = 0.1;
  double p = 2.0;

  void validate() const;
};

struct HomWitness {
  bool success = false;
  Eigen::MatrixXd T;             // d x total_dim, after normalization
  double original_norm = 0;      // operator norm before normalization
  bool normalized = false;
  std::vector<int> A;            // kept coordinates
  std::vector<double> defects;   // per (word, field), on A
  double max_defect = 0;
  double kernel_norm = 0;        // ||T|_kernel||, 0 without a kernel
  std::string binding;           // failing constraint, empty on success
};

// Operator norm V -> l^p(d) (exact for p = 2, an interpolation upper bound
// otherwise).
double hom_operator_norm(const Eigen::MatrixXd& T, const GeneratingSpec& spec, double p);

HomWitness check_hom(const Eigen::MatrixXd& T, const GeneratingSpec& spec, const SoficApprox& sigma,
                     const HomParams& params);

// Sampler-level interface. xi holds one l^2(d) vector per column.
enum class SamplerKind { Regular, Transversal, Periodic };

Eigen::MatrixXd sample_T_xi(const Eigen::MatrixXd& xi, const GeneratingSpec& spec,
                            const SoficApprox& sigma);
Eigen::MatrixXd sample_T_transversal(const Eigen::MatrixXd& xi, const GeneratingSpec& spec,
                                     const SoficApprox& sigma);
// Periodic sampler: `period_label` names a generator acting as an n-cycle on
// every orbit; the first atom of each orbit forms the base set, split into
// `blocks` contiguous groups that are averaged over.
Eigen::MatrixXd sample_T_xi_N(const Eigen::MatrixXd& xi, const GeneratingSpec& spec,
                              const SoficApprox& sigma, const std::string& period_label, int blocks);

// Number of xi components the sampler consumes.
int xi_components(const GeneratingSpec& spec, SamplerKind kind);

// Uniform sample from the unit ball of (l^2(d, normalized))^k.
Eigen::MatrixXd sample_ball(int d, int k, std::uint64_t seed, std::uint64_t index);

struct EstimateGrid {
  std::vector<double> eps{0.05, 0.1, 0.2};
  std::vector<std::vector<std::string>> F{{}};
  std::vector<int> m{1};
  std::vector<double> delta{0.1};
  double p = 2.0;
  double ratio = 2.0;  // product-norm weights ratio^{-j} on the field sequence

  void validate() const;
};

struct EstimateOptions {
  int samples = 200;
  std::uint64_t seed = 0;
  int threads = 0;  // 0 = hardware concurrency
  SamplerKind sampler = SamplerKind::Transversal;
  std::string period_label = "g0";  // Periodic only
  int period_blocks = 0;            // Periodic only; 0 = finest
  bool per_scale_covering = true;   // run d_eps_greedy per eps
};

struct ScaleRow {
  int d = 0;
  double eps = 0;
  int F_size = 0;
  int m = 0;
  double delta = 0;
  double deps_over_d = -1;  // -1 when not computed
  double alpha_hat = 0;     // success fraction
  double kappa_raw = 0;     // kappa(alpha, eps, p)
  double mass_factor = 0;   // rank / d
  double kappa_lower = 0;   // kappa_raw * mass_factor
  double rank_over_d = 0;
  int successes = 0;
  int samples = 0;
  double mean_norm = 0;     // mean original operator norm
};

struct DimEstimate {
  double upper = 0;
  double lower = 0;
  double support_bound = 0;
  double rank_bound = 0;
  bool lower_clamped = false;
  double alpha_hat = 0;   // at the row giving the lower bound
  double kappa_raw = 0;
  double mass_factor = 0;
  std::vector<ScaleRow> per_scale;
  std::string diagnostic;
};

DimEstimate estimate_dim(const GeneratingSpec& spec, const std::vector<SoficApprox>& sigmas,
                         const EstimateGrid& grid, const EstimateOptions& options);

}  // namespace sofdim
