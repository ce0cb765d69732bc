#include "sofdim/lp.hpp"

#include <algorithm>
#include <cmath>

namespace sofdim {

double lp_norm(const Eigen::VectorXd& v, double p, const std::optional<std::vector<double>>& weights,
               bool normalized) {
  if (!(p >= 1.0)) throw ParameterError("lp_norm: p must be >= 1");
  if (weights && static_cast<Eigen::Index>(weights->size()) != v.size())
    throw DimensionError("lp_norm: weight count differs from vector length");
  if (std::isinf(p)) {
    double m = 0;
    for (Eigen::Index i = 0; i < v.size(); ++i)
      if (!weights || (*weights)[i] > 0) m = std::max(m, std::abs(v[i]));
    return m;
  }
  const double uniform = (normalized && v.size() > 0) ? 1.0 / static_cast<double>(v.size()) : 1.0;
  double s = 0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double w = weights ? (*weights)[i] : uniform;
    s += w * std::pow(std::abs(v[i]), p);
  }
  return std::pow(s, 1.0 / p);
}

double ProductNorm::weight(int j) const { return std::pow(ratio, -static_cast<double>(j)); }

double ProductNorm::tail_weight(int prefix) const {
  return std::pow(ratio, -static_cast<double>(prefix)) / (ratio - 1.0);
}

void ProductNorm::validate() const {
  if (!(p >= 1.0)) throw ParameterError("product norm: p must be >= 1");
  if (!(ratio > 1.0)) throw ParameterError("product norm: ratio must exceed 1");
}

Interval product_norm_eval(const ProductNorm& rho, const std::vector<double>& prefix,
                           double tail_bound) {
  rho.validate();
  if (!std::isfinite(tail_bound) || tail_bound < 0)
    throw ParameterError("product_norm_eval: tail bound must be finite and nonnegative");
  double s = 0;
  for (std::size_t j = 0; j < prefix.size(); ++j)
    s += rho.weight(static_cast<int>(j) + 1) * std::pow(std::abs(prefix[j]), rho.p);
  const double tail = rho.tail_weight(static_cast<int>(prefix.size())) * std::pow(tail_bound, rho.p);
  return {std::pow(s, 1.0 / rho.p), std::pow(s + tail, 1.0 / rho.p)};
}

VectorField::VectorField(const AtomSpace& space, std::vector<Eigen::VectorXd> f)
    : weights(space.weights()), fibers(std::move(f)) {
  if (static_cast<int>(fibers.size()) != space.size())
    throw DimensionError("vector field: one fiber per atom required");
}

VectorField VectorField::zero(const AtomSpace& space, const std::vector<int>& dims) {
  std::vector<Eigen::VectorXd> f;
  for (int k : dims) f.push_back(Eigen::VectorXd::Zero(k));
  return VectorField(space, std::move(f));
}

double direct_integral_norm(const VectorField& field, double p) {
  if (!(p >= 1.0)) throw ParameterError("direct_integral_norm: p must be >= 1");
  double s = 0;
  for (int x = 0; x < field.atoms(); ++x)
    s += field.weights[x] * std::pow(field.fibers[x].norm(), p);
  return std::pow(s, 1.0 / p);
}

SupportSet support(const VectorField& field) {
  SupportSet s;
  for (int x = 0; x < field.atoms(); ++x) {
    const auto& f = field.fibers[x];
    if (f.size() > 0 && f.cwiseAbs().maxCoeff() > 1e-14) s.atoms.push_back(x);
  }
  return s;
}

double support_mass(const VectorField& field) {
  double m = 0;
  for (int x : support(field).atoms) m += field.weights[x];
  return m;
}

void FieldProfile::validate() const {
  const int n = rel.atoms();
  if (static_cast<int>(dims.size()) != n)
    throw DimensionError("field profile: one fiber dimension per atom required");
  for (int k : dims)
    if (k < 0) throw DimensionError("field profile: negative fiber dimension");
  if (frames.empty()) {
    for (int x = 0; x < n; ++x)
      for (int y : rel.orbit(x))
        if (dims[x] != dims[y])
          throw ModelError("field profile: identity transport needs equal fiber dimensions on an orbit");
    return;
  }
  if (static_cast<int>(frames.size()) != n)
    throw DimensionError("field profile: one frame per atom required");
  for (int x = 0; x < n; ++x) {
    if (frames[x].rows() != dims[x] || frames[x].cols() != dims[x])
      throw DimensionError("field profile: frame shape mismatch at atom " + std::to_string(x));
    if (dims[x] > 0 && numerical_rank(frames[x]) != dims[x])
      throw ModelError("field profile: singular frame at atom " + std::to_string(x));
  }
}

Eigen::MatrixXd FieldProfile::transport(int x, int y) const {
  if (dims[x] != dims[y]) throw ModelError("transport between fibers of different dimension");
  if (frames.empty()) return Eigen::MatrixXd::Identity(dims[x], dims[y]);
  return frames[x] * frames[y].inverse();
}

int FieldProfile::total_dim() const {
  int s = 0;
  for (int k : dims) s += k;
  return s;
}

std::vector<int> FieldProfile::offsets() const {
  std::vector<int> off(dims.size() + 1, 0);
  for (std::size_t i = 0; i < dims.size(); ++i) off[i + 1] = off[i] + dims[i];
  return off;
}

int numerical_rank(Eigen::MatrixXd m, double rel_tol) {
  const Eigen::Index rows = m.rows(), cols = m.cols();
  if (rows == 0 || cols == 0) return 0;
  const double scale = m.cwiseAbs().maxCoeff();
  if (scale == 0) return 0;
  const double thr = rel_tol * scale;
  int rank = 0;
  for (Eigen::Index step = 0; step < std::min(rows, cols); ++step) {
    Eigen::Index pr, pc;
    const double piv = m.bottomRightCorner(rows - step, cols - step).cwiseAbs().maxCoeff(&pr, &pc);
    if (piv <= thr) break;
    pr += step;
    pc += step;
    m.row(step).swap(m.row(pr));
    m.col(step).swap(m.col(pc));
    for (Eigen::Index r = step + 1; r < rows; ++r) {
      const double f = m(r, step) / m(step, step);
      if (f != 0) m.row(r).tail(cols - step) -= f * m.row(step).tail(cols - step);
    }
    ++rank;
  }
  return rank;
}

bool is_dynamically_generating(const std::vector<VectorField>& fields, const FieldProfile& profile) {
  profile.validate();
  const int n = profile.rel.atoms();
  for (std::size_t j = 0; j < fields.size(); ++j) {
    if (fields[j].atoms() != n) throw ModelError("field " + std::to_string(j) + ": atom count mismatch");
    for (int x = 0; x < n; ++x)
      if (fields[j].fibers[x].size() != profile.dims[x])
        throw ModelError("field " + std::to_string(j) + ": fiber dimension mismatch at atom " +
                         std::to_string(x));
  }
  for (int x = 0; x < n; ++x) {
    const int k = profile.dims[x];
    if (k == 0) continue;
    const auto& orb = profile.rel.orbit(x);
    Eigen::MatrixXd span(k, static_cast<Eigen::Index>(orb.size() * fields.size()));
    Eigen::Index c = 0;
    for (int y : orb) {
      const Eigen::MatrixXd pi = profile.transport(x, y);
      for (const auto& f : fields) span.col(c++) = pi * f.fibers[y];
    }
    if (numerical_rank(span) < k) return false;
  }
  return true;
}

}  // namespace sofdim
