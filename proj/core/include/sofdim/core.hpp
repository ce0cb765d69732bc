// Finite measured equivalence relations and the partial-bijection algebra.
#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sofdim/exact.hpp"

namespace sofdim {

// Error taxonomy shared by every module. `kind()` is a short tag used in CLI
// diagnostics ("model", "dimension", ...).
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define SOFDIM_ERROR_CLASS(Name, tag)                                   \
  class Name : public Error {                                           \
   public:                                                              \
    explicit Name(const std::string& what) : Error(tag, what) {}       \
  };
SOFDIM_ERROR_CLASS(DimensionError, "dimension")
SOFDIM_ERROR_CLASS(ParameterError, "parameter")
SOFDIM_ERROR_CLASS(ModelError, "model")
SOFDIM_ERROR_CLASS(LookupError, "lookup")
SOFDIM_ERROR_CLASS(PathError, "path")
SOFDIM_ERROR_CLASS(SpectralError, "spectral")
SOFDIM_ERROR_CLASS(ScopeError, "scope")
SOFDIM_ERROR_CLASS(ConsistencyError, "consistency")
SOFDIM_ERROR_CLASS(FamilyError, "family")
#undef SOFDIM_ERROR_CLASS

// Finite probability space: positive atom masses summing to 1 (within 1e-12).
class AtomSpace {
 public:
  AtomSpace() = default;
  explicit AtomSpace(std::vector<double> weights);
  // Weights known exactly; they must sum to exactly 1.
  static AtomSpace exact(std::vector<Rational> weights);
  static AtomSpace uniform(int atoms);

  int size() const { return static_cast<int>(weights_.size()); }
  double weight(int atom) const { return weights_.at(atom); }
  const std::vector<double>& weights() const { return weights_; }
  double mass(const std::vector<int>& atoms) const;

  bool has_exact() const { return !exact_.empty(); }
  // The exact weight when known, else the dyadic value of the double.
  Rational exact_weight(int atom) const;
  Rational exact_mass(const std::vector<int>& atoms) const;

  bool operator==(const AtomSpace& o) const { return weights_ == o.weights_; }

 private:
  std::vector<double> weights_;
  std::vector<Rational> exact_;
};

// Injective partial map on {0..size-1}, stored as src-sorted pairs plus a
// forward index (-1 where undefined).
class PartialMap {
 public:
  PartialMap() = default;
  PartialMap(int size, std::vector<std::pair<int, int>> pairs);
  static PartialMap identity(int size);
  static PartialMap restriction_identity(int size, const std::vector<int>& points);
  static PartialMap empty(int size) { return PartialMap(size, {}); }

  int size() const { return size_; }
  const std::vector<std::pair<int, int>>& pairs() const { return pairs_; }
  std::optional<int> apply(int x) const;
  int raw(int x) const { return fwd_[x]; }  // -1 when undefined
  std::vector<int> domain() const;
  std::vector<int> range() const;
  int fixed_points() const;

  bool operator==(const PartialMap& o) const {
    return size_ == o.size_ && pairs_ == o.pairs_;
  }

 private:
  int size_ = 0;
  std::vector<std::pair<int, int>> pairs_;
  std::vector<int> fwd_;
};

// (f o g)(x) = f(g(x)); g is applied first.
PartialMap compose(const PartialMap& f, const PartialMap& g);
PartialMap inverse(const PartialMap& f);

// Number of points where the two maps disagree as 0/1 matrices
// (size of the symmetric difference of the pair sets).
int pair_mismatch(const PartialMap& a, const PartialMap& b);

using AlgebraElement = Eigen::MatrixXcd;

std::complex<double> trace(const AlgebraElement& x);   // (1/d) Tr
double two_norm(const AlgebraElement& x);              // tr(x* x)^{1/2}
AlgebraElement as_matrix(const PartialMap& f);         // entry (dst, src) = 1
// ||as_matrix(a) - as_matrix(b)||_2 computed without densifying.
double two_norm_distance(const PartialMap& a, const PartialMap& b);

// Relation on atoms given by an orbit partition; blocks are sorted
// internally and sorted by first element so equality is structural.
class FinRel {
 public:
  FinRel() = default;
  FinRel(AtomSpace space, std::vector<std::vector<int>> blocks);

  const AtomSpace& space() const { return space_; }
  const std::vector<std::vector<int>>& blocks() const { return blocks_; }
  int atoms() const { return space_.size(); }
  int orbit_of(int atom) const { return orbit_index_.at(atom); }
  const std::vector<int>& orbit(int atom) const { return blocks_[orbit_of(atom)]; }
  double orbit_mass(int block) const;
  bool related(int x, int y) const { return orbit_of(x) == orbit_of(y); }

  bool operator==(const FinRel& o) const {
    return space_ == o.space_ && blocks_ == o.blocks_;
  }

 private:
  AtomSpace space_;
  std::vector<std::vector<int>> blocks_;
  std::vector<int> orbit_index_;
};

// A finite relation together with generating partial isomorphisms of the
// atoms (the graphing elements used for sofic labels and words).
struct Model {
  FinRel rel;
  std::vector<PartialMap> generators;

  // Throws ModelError naming "generators[i]" when a generator leaves an
  // orbit, has the wrong size, or joins atoms of different mass.
  void validate() const;
};

// Word letters: generator labels "g<i>" (optionally inverted) and atom
// projection labels "a<i>".
struct Letter {
  std::string label;
  bool inverse = false;
  bool operator==(const Letter&) const = default;
};
using Word = std::vector<Letter>;

std::string generator_label(int i);
std::string atom_label(int i);
Word parse_word(const std::string& text);  // "g0 g1^-1 a2"
std::string format_word(const Word& w);
Word inverse_word(const Word& w);

// Atom-level partial map of a word: letters act right-to-left, so the
// word [x, y] is x o y.
PartialMap atom_map(const Model& model, const Word& w);
// Measure of the fixed-point set of the atom-level map.
double atom_trace(const Model& model, const Word& w);

// Restriction to a set of atoms meeting the relation: weights renormalized,
// orbits intersected, generators restricted and reindexed, plus one extra
// generator cycling through each restricted orbit so the result still
// generates the restricted relation.
struct Compression {
  Model model;
  std::vector<int> kept;  // new index -> old atom
  double mass = 0;        // mu(A)
};
Compression compress_model(const Model& model, const std::vector<int>& atoms);

}  // namespace sofdim
