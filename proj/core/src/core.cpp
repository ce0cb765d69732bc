#include "sofdim/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace sofdim {

AtomSpace::AtomSpace(std::vector<double> weights) : weights_(std::move(weights)) {
  if (weights_.empty()) throw ModelError("weights: atom space must be nonempty");
  double sum = 0;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    if (!(weights_[i] > 0) || !std::isfinite(weights_[i]))
      throw ModelError("weights[" + std::to_string(i) + "]: atom weight must be positive");
    sum += weights_[i];
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    std::ostringstream os;
    os.precision(17);
    os << "weights: sum is " << sum << ", expected 1 within 1e-12";
    throw ModelError(os.str());
  }
}

AtomSpace AtomSpace::exact(std::vector<Rational> weights) {
  if (weights.empty()) throw ModelError("weights: atom space must be nonempty");
  Rational sum = 0;
  std::vector<double> approx;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0) throw ModelError("weights[" + std::to_string(i) + "]: atom weight must be positive");
    sum += weights[i];
    approx.push_back(to_double(weights[i]));
  }
  if (sum != 1) throw ModelError("weights: exact sum is " + to_string(sum) + ", expected 1");
  AtomSpace out(std::move(approx));
  out.exact_ = std::move(weights);
  return out;
}

AtomSpace AtomSpace::uniform(int atoms) {
  if (atoms <= 0) throw ModelError("weights: atom count must be positive");
  return exact(std::vector<Rational>(atoms, Rational(1, atoms)));
}

Rational AtomSpace::exact_weight(int atom) const {
  return exact_.empty() ? to_rational(weights_.at(atom)) : exact_.at(atom);
}

Rational AtomSpace::exact_mass(const std::vector<int>& atoms) const {
  Rational m = 0;
  for (int a : atoms) m += exact_weight(a);
  return m;
}

double AtomSpace::mass(const std::vector<int>& atoms) const {
  double m = 0;
  for (int a : atoms) m += weights_.at(a);
  return m;
}

PartialMap::PartialMap(int size, std::vector<std::pair<int, int>> pairs)
    : size_(size), pairs_(std::move(pairs)), fwd_(size < 0 ? 0 : size, -1) {
  if (size < 0) throw DimensionError("partial map size must be nonnegative");
  std::sort(pairs_.begin(), pairs_.end());
  std::vector<char> hit(size, 0);
  for (std::size_t i = 0; i < pairs_.size(); ++i) {
    auto [s, t] = pairs_[i];
    if (s < 0 || s >= size || t < 0 || t >= size)
      throw DimensionError("partial map pair out of range");
    if (fwd_[s] != -1) throw ModelError("partial map is not a function: repeated source");
    if (hit[t]) throw ModelError("partial map is not injective: repeated target");
    fwd_[s] = t;
    hit[t] = 1;
  }
}

PartialMap PartialMap::identity(int size) {
  std::vector<std::pair<int, int>> p(size);
  for (int i = 0; i < size; ++i) p[i] = {i, i};
  return PartialMap(size, std::move(p));
}

PartialMap PartialMap::restriction_identity(int size, const std::vector<int>& points) {
  std::vector<std::pair<int, int>> p;
  p.reserve(points.size());
  for (int x : points) p.emplace_back(x, x);
  return PartialMap(size, std::move(p));
}

std::optional<int> PartialMap::apply(int x) const {
  if (x < 0 || x >= size_ || fwd_[x] < 0) return std::nullopt;
  return fwd_[x];
}

std::vector<int> PartialMap::domain() const {
  std::vector<int> d;
  d.reserve(pairs_.size());
  for (auto& pr : pairs_) d.push_back(pr.first);
  return d;
}

std::vector<int> PartialMap::range() const {
  std::vector<int> r;
  r.reserve(pairs_.size());
  for (auto& pr : pairs_) r.push_back(pr.second);
  std::sort(r.begin(), r.end());
  return r;
}

int PartialMap::fixed_points() const {
  int n = 0;
  for (auto& pr : pairs_) n += (pr.first == pr.second);
  return n;
}

PartialMap compose(const PartialMap& f, const PartialMap& g) {
  if (f.size() != g.size()) throw DimensionError("compose: size mismatch");
  std::vector<std::pair<int, int>> out;
  out.reserve(g.pairs().size());
  for (auto [s, t] : g.pairs()) {
    int u = f.raw(t);
    if (u >= 0) out.emplace_back(s, u);
  }
  return PartialMap(f.size(), std::move(out));
}

PartialMap inverse(const PartialMap& f) {
  std::vector<std::pair<int, int>> out;
  out.reserve(f.pairs().size());
  for (auto [s, t] : f.pairs()) out.emplace_back(t, s);
  return PartialMap(f.size(), std::move(out));
}

int pair_mismatch(const PartialMap& a, const PartialMap& b) {
  if (a.size() != b.size()) throw DimensionError("pair_mismatch: size mismatch");
  int common = 0;
  for (auto [s, t] : a.pairs()) common += (b.raw(s) == t);
  return static_cast<int>(a.pairs().size() + b.pairs().size()) - 2 * common;
}

std::complex<double> trace(const AlgebraElement& x) {
  if (x.rows() != x.cols()) throw DimensionError("trace: matrix must be square");
  if (x.rows() == 0) return 0.0;
  return x.trace() / static_cast<double>(x.rows());
}

double two_norm(const AlgebraElement& x) {
  if (x.rows() != x.cols()) throw DimensionError("two_norm: matrix must be square");
  if (x.rows() == 0) return 0.0;
  return std::sqrt(x.squaredNorm() / static_cast<double>(x.rows()));
}

AlgebraElement as_matrix(const PartialMap& f) {
  AlgebraElement m = AlgebraElement::Zero(f.size(), f.size());
  for (auto [s, t] : f.pairs()) m(t, s) = 1.0;
  return m;
}

double two_norm_distance(const PartialMap& a, const PartialMap& b) {
  if (a.size() == 0) return 0.0;
  return std::sqrt(static_cast<double>(pair_mismatch(a, b)) / a.size());
}

FinRel::FinRel(AtomSpace space, std::vector<std::vector<int>> blocks)
    : space_(std::move(space)), blocks_(std::move(blocks)) {
  const int n = space_.size();
  orbit_index_.assign(n, -1);
  for (auto& b : blocks_) {
    if (b.empty()) throw ModelError("blocks: empty orbit block");
    std::sort(b.begin(), b.end());
  }
  std::sort(blocks_.begin(), blocks_.end());
  for (std::size_t k = 0; k < blocks_.size(); ++k) {
    for (int a : blocks_[k]) {
      if (a < 0 || a >= n)
        throw ModelError("blocks[" + std::to_string(k) + "]: atom index " + std::to_string(a) +
                         " out of range");
      if (orbit_index_[a] != -1)
        throw ModelError("blocks: atom " + std::to_string(a) + " appears in two blocks");
      orbit_index_[a] = static_cast<int>(k);
    }
  }
  for (int a = 0; a < n; ++a)
    if (orbit_index_[a] == -1)
      throw ModelError("blocks: atom " + std::to_string(a) + " is not covered");
}

double FinRel::orbit_mass(int block) const { return space_.mass(blocks_.at(block)); }

void Model::validate() const {
  const int n = rel.atoms();
  for (std::size_t i = 0; i < generators.size(); ++i) {
    const auto& g = generators[i];
    const std::string tag = "generators[" + std::to_string(i) + "]";
    if (g.size() != n)
      throw ModelError(tag + ": size " + std::to_string(g.size()) + " differs from atom count " +
                       std::to_string(n));
    for (auto [s, t] : g.pairs()) {
      if (!rel.related(s, t))
        throw ModelError(tag + ": pair (" + std::to_string(s) + "," + std::to_string(t) +
                         ") leaves its orbit");
      if (std::abs(rel.space().weight(s) - rel.space().weight(t)) > 1e-12)
        throw ModelError(tag + ": pair (" + std::to_string(s) + "," + std::to_string(t) +
                         ") joins atoms of different mass");
    }
  }
}

std::string generator_label(int i) { return "g" + std::to_string(i); }
std::string atom_label(int i) { return "a" + std::to_string(i); }

Word parse_word(const std::string& text) {
  Word w;
  std::istringstream is(text);
  std::string tok;
  while (is >> tok) {
    Letter l;
    const std::string suffix = "^-1";
    if (tok.size() > suffix.size() && tok.compare(tok.size() - suffix.size(), suffix.size(), suffix) == 0) {
      l.inverse = true;
      tok.resize(tok.size() - suffix.size());
    }
    l.label = tok;
    w.push_back(l);
  }
  return w;
}

std::string format_word(const Word& w) {
  std::string s;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i) s += ' ';
    s += w[i].label;
    if (w[i].inverse) s += "^-1";
  }
  return s;
}

Word inverse_word(const Word& w) {
  Word r(w.rbegin(), w.rend());
  for (auto& l : r)
    if (l.label.empty() || l.label[0] != 'a') l.inverse = !l.inverse;
  return r;
}

namespace {
int label_index(const std::string& label, char prefix) {
  if (label.size() < 2 || label[0] != prefix) return -1;
  int v = 0;
  for (std::size_t i = 1; i < label.size(); ++i) {
    if (label[i] < '0' || label[i] > '9') return -1;
    v = v * 10 + (label[i] - '0');
  }
  return v;
}
}  // namespace

PartialMap atom_map(const Model& model, const Word& w) {
  const int n = model.rel.atoms();
  PartialMap acc = PartialMap::identity(n);
  for (auto it = w.rbegin(); it != w.rend(); ++it) {
    PartialMap letter;
    if (int g = label_index(it->label, 'g'); g >= 0) {
      if (g >= static_cast<int>(model.generators.size()))
        throw LookupError("unknown generator label " + it->label);
      letter = it->inverse ? inverse(model.generators[g]) : model.generators[g];
    } else if (int a = label_index(it->label, 'a'); a >= 0) {
      if (a >= n) throw LookupError("unknown atom label " + it->label);
      letter = PartialMap::restriction_identity(n, {a});
    } else {
      throw LookupError("unknown label " + it->label);
    }
    acc = compose(letter, acc);
  }
  return acc;
}

double atom_trace(const Model& model, const Word& w) {
  PartialMap m = atom_map(model, w);
  double t = 0;
  for (auto [s, d] : m.pairs())
    if (s == d) t += model.rel.space().weight(s);
  return t;
}

Compression compress_model(const Model& model, const std::vector<int>& atoms) {
  const int n = model.rel.atoms();
  std::vector<int> kept(atoms);
  std::sort(kept.begin(), kept.end());
  kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
  if (kept.empty()) throw ModelError("compression set is empty");
  std::vector<int> new_index(n, -1);
  for (std::size_t i = 0; i < kept.size(); ++i) {
    if (kept[i] < 0 || kept[i] >= n) throw ModelError("compression atom out of range");
    new_index[kept[i]] = static_cast<int>(i);
  }
  const double mass = model.rel.space().mass(kept);
  std::vector<double> w;
  for (int a : kept) w.push_back(model.rel.space().weight(a) / mass);
  // Renormalize exactly to absorb rounding in the division.
  double s = std::accumulate(w.begin(), w.end(), 0.0);
  for (auto& x : w) x /= s;

  std::vector<std::vector<int>> blocks;
  std::vector<std::pair<int, int>> cycle;
  for (const auto& b : model.rel.blocks()) {
    std::vector<int> nb;
    for (int a : b)
      if (new_index[a] >= 0) nb.push_back(new_index[a]);
    if (nb.empty()) continue;
    for (std::size_t i = 0; i < nb.size() && nb.size() > 1; ++i)
      cycle.emplace_back(nb[i], nb[(i + 1) % nb.size()]);
    blocks.push_back(std::move(nb));
  }
  const int m = static_cast<int>(kept.size());
  Compression out;
  out.kept = kept;
  out.mass = mass;
  AtomSpace space;
  if (model.rel.space().has_exact()) {
    const Rational exact_mass = model.rel.space().exact_mass(kept);
    std::vector<Rational> ew;
    for (int a : kept) ew.push_back(model.rel.space().exact_weight(a) / exact_mass);
    space = AtomSpace::exact(std::move(ew));
  } else {
    space = AtomSpace(std::move(w));
  }
  out.model.rel = FinRel(std::move(space), std::move(blocks));
  for (const auto& g : model.generators) {
    std::vector<std::pair<int, int>> p;
    for (auto [s, t] : g.pairs())
      if (new_index[s] >= 0 && new_index[t] >= 0) p.emplace_back(new_index[s], new_index[t]);
    out.model.generators.emplace_back(m, std::move(p));
  }
  out.model.generators.emplace_back(m, std::move(cycle));
  return out;
}

}  // namespace sofdim
