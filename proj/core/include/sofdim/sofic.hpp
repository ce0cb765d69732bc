// Sofic approximations of finite relations at a fixed scale d.
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "sofdim/core.hpp"

namespace sofdim {

using DiagImage = std::vector<std::uint8_t>;          // 0/1 diagonal
using SoficImage = std::variant<PartialMap, DiagImage>;

struct SoficApprox {
  int d = 0;
  std::map<std::string, SoficImage> images;

  const SoficImage& at(const std::string& label) const;
  bool is_projection(const std::string& label) const;
  void validate() const;
  bool operator==(const SoficApprox&) const = default;
};

struct ExactModel {
  SoficApprox sigma;
  std::vector<int> atom_of_point;      // point -> atom
  std::vector<int> copies;             // multiplicity per atom
  double weight_discrepancy = 0;       // max_x |m_x/d - w_x|
  double tolerance = 0;                // 1/(2 N #atoms)
};

// N copies of the relation's points; generators act copywise, atom labels
// map to the diagonal of their copies.
ExactModel exact_model(const Model& model, int copies);

// Left-to-right product sigma(l1) sigma(l2) ... ; the empty word is the identity.
PartialMap extend_to_word(const SoficApprox& sigma, const Word& word);

struct QualityReport {
  double mult_defect = 0;
  double adj_defect = 0;
  double trace_defect = 0;
  double op_norm_bound = 0;
  std::size_t words_checked = 0;
  bool sampled = false;
};

// Defects over every word of length <= word_length in the labels of sigma
// that the model knows (generators, their inverses, atom projections). When
// the word count exceeds `sample_cutoff`, a seeded random sample is used.
// Multiplicative defect: ||sigma(w) - sigma(w0)||_2 where w0 is the first
// enumerated word with the same atom-level map. Adjoint defect: the same
// comparison for sigma(w)^* against the representative of the inverse word.
QualityReport quality_report(const SoficApprox& sigma, const Model& model, int word_length,
                             std::size_t sample_cutoff = 20000, std::uint64_t seed = 0);

// Conjugate every image by the union of the given projection images and
// restrict to those coordinates. Projection labels outside the set, or whose
// restriction vanishes, are dropped.
SoficApprox compress(const SoficApprox& sigma, const std::vector<std::string>& projection_labels);
SoficApprox compress(const SoficApprox& sigma, const std::string& projection_label);

// Rewire ceil(rate * d) domain points of every partial-map image by a cyclic
// shift of their targets (injectivity and domain preserved). Deterministic in seed.
SoficApprox perturb(const SoficApprox& sigma, double rate, std::uint64_t seed);

// Enumerate words of length <= max_len over the letters, shortest first.
std::vector<Word> enumerate_words(const std::vector<Letter>& letters, int max_len);
// Letters for a model: g_i, g_i^-1, then a_j.
std::vector<Letter> model_letters(const Model& model, bool with_projections = true);

}  // namespace sofdim
