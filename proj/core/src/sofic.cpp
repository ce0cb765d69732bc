#include "sofdim/sofic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sofdim/rng.hpp"

namespace sofdim {

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

PartialMap image_as_map(const SoficImage& img, int d, bool inverse_letter) {
  if (const auto* pm = std::get_if<PartialMap>(&img)) return inverse_letter ? inverse(*pm) : *pm;
  const auto& diag = std::get<DiagImage>(img);
  std::vector<int> pts;
  for (int i = 0; i < d; ++i)
    if (diag[i]) pts.push_back(i);
  return PartialMap::restriction_identity(d, pts);
}

}  // namespace

const SoficImage& SoficApprox::at(const std::string& label) const {
  auto it = images.find(label);
  if (it == images.end()) throw LookupError("sofic approximation has no label '" + label + "'");
  return it->second;
}

bool SoficApprox::is_projection(const std::string& label) const {
  return std::holds_alternative<DiagImage>(at(label));
}

void SoficApprox::validate() const {
  if (d <= 0) throw ModelError("d: must be positive");
  for (const auto& [label, img] : images) {
    if (const auto* pm = std::get_if<PartialMap>(&img)) {
      if (pm->size() != d) throw ModelError("images." + label + ": size differs from d");
    } else {
      const auto& diag = std::get<DiagImage>(img);
      if (static_cast<int>(diag.size()) != d) throw ModelError("images." + label + ": diag length differs from d");
      for (auto v : diag)
        if (v > 1) throw ModelError("images." + label + ": diag entries must be 0 or 1");
    }
  }
}

ExactModel exact_model(const Model& model, int copies) {
  if (copies < 1) throw ParameterError("exact_model: copies must be >= 1");
  model.validate();
  const auto& space = model.rel.space();
  const int k = space.size();
  ExactModel out;
  out.copies.resize(k);
  int d = 0;
  for (int x = 0; x < k; ++x) {
    out.copies[x] = static_cast<int>(std::llround(space.weight(x) * copies * k));
    d += out.copies[x];
  }
  out.tolerance = 1.0 / (2.0 * copies * k);
  for (int x = 0; x < k; ++x)
    out.weight_discrepancy =
        std::max(out.weight_discrepancy, std::abs(static_cast<double>(out.copies[x]) / d - space.weight(x)));
  if (out.weight_discrepancy > out.tolerance + 1e-15)
    throw ModelError("exact_model: weight rounding discrepancy " + std::to_string(out.weight_discrepancy) +
                     " exceeds tolerance " + std::to_string(out.tolerance));
  for (int x = 0; x < k; ++x)
    if (out.copies[x] == 0) throw ModelError("exact_model: atom " + std::to_string(x) + " received no points");

  std::vector<int> offset(k + 1, 0);
  for (int x = 0; x < k; ++x) offset[x + 1] = offset[x] + out.copies[x];
  out.atom_of_point.resize(d);
  for (int x = 0; x < k; ++x)
    for (int c = 0; c < out.copies[x]; ++c) out.atom_of_point[offset[x] + c] = x;

  out.sigma.d = d;
  for (std::size_t g = 0; g < model.generators.size(); ++g) {
    std::vector<std::pair<int, int>> pairs;
    for (auto [s, t] : model.generators[g].pairs())
      for (int c = 0; c < out.copies[s]; ++c) pairs.emplace_back(offset[s] + c, offset[t] + c);
    out.sigma.images.emplace(generator_label(static_cast<int>(g)), PartialMap(d, std::move(pairs)));
  }
  for (int x = 0; x < k; ++x) {
    DiagImage diag(d, 0);
    for (int c = 0; c < out.copies[x]; ++c) diag[offset[x] + c] = 1;
    out.sigma.images.emplace(atom_label(x), std::move(diag));
  }
  return out;
}

PartialMap extend_to_word(const SoficApprox& sigma, const Word& word) {
  PartialMap acc = PartialMap::identity(sigma.d);
  for (auto it = word.rbegin(); it != word.rend(); ++it)
    acc = compose(image_as_map(sigma.at(it->label), sigma.d, it->inverse), acc);
  return acc;
}

std::vector<Letter> model_letters(const Model& model, bool with_projections) {
  std::vector<Letter> ls;
  for (std::size_t g = 0; g < model.generators.size(); ++g) {
    ls.push_back({generator_label(static_cast<int>(g)), false});
    ls.push_back({generator_label(static_cast<int>(g)), true});
  }
  if (with_projections)
    for (int a = 0; a < model.rel.atoms(); ++a) ls.push_back({atom_label(a), false});
  return ls;
}

std::vector<Word> enumerate_words(const std::vector<Letter>& letters, int max_len) {
  std::vector<Word> out{Word{}};
  std::size_t begin = 0;
  for (int len = 1; len <= max_len; ++len) {
    const std::size_t end = out.size();
    for (std::size_t i = begin; i < end; ++i)
      for (const auto& l : letters) {
        Word w = out[i];
        w.push_back(l);
        out.push_back(std::move(w));
      }
    begin = end;
  }
  return out;
}

QualityReport quality_report(const SoficApprox& sigma, const Model& model, int word_length,
                             std::size_t sample_cutoff, std::uint64_t seed) {
  if (word_length < 1) throw ParameterError("quality_report: word_length must be >= 1");
  std::vector<Letter> letters;
  for (const auto& l : model_letters(model))
    if (sigma.images.count(l.label)) letters.push_back(l);

  // Count words to decide between exhaustive and sampled enumeration.
  double total = 0, layer = 1;
  for (int len = 0; len <= word_length; ++len) {
    total += layer;
    layer *= static_cast<double>(letters.size());
  }
  std::vector<Word> words;
  QualityReport rep;
  if (total <= static_cast<double>(sample_cutoff)) {
    words = enumerate_words(letters, word_length);
  } else {
    rep.sampled = true;
    auto eng = make_engine(seed, 0x51u);
    std::uniform_int_distribution<std::size_t> pick(0, letters.size() - 1);
    std::uniform_int_distribution<int> len_pick(1, word_length);
    words.push_back(Word{});
    for (const auto& l : letters) words.push_back(Word{l});
    while (words.size() < sample_cutoff) {
      Word w(len_pick(eng));
      for (auto& l : w) l = letters[pick(eng)];
      words.push_back(std::move(w));
    }
    std::stable_sort(words.begin(), words.end(),
                     [](const Word& a, const Word& b) { return a.size() < b.size(); });
  }

  std::map<std::vector<std::pair<int, int>>, PartialMap> representative;
  auto rep_image = [&](const PartialMap& amap, const PartialMap& image) -> const PartialMap& {
    auto [it, inserted] = representative.emplace(amap.pairs(), image);
    return it->second;
  };
  for (const auto& w : words) {
    const PartialMap img = extend_to_word(sigma, w);
    const PartialMap amap = atom_map(model, w);
    rep.mult_defect = std::max(rep.mult_defect, two_norm_distance(img, rep_image(amap, img)));
    const double tau = atom_trace(model, w);
    rep.trace_defect =
        std::max(rep.trace_defect, std::abs(static_cast<double>(img.fixed_points()) / sigma.d - tau));
    rep.op_norm_bound = std::max(rep.op_norm_bound, img.pairs().empty() ? 0.0 : 1.0);
    ++rep.words_checked;
  }
  for (const auto& w : words) {
    const Word wi = inverse_word(w);
    const PartialMap amap = atom_map(model, wi);
    auto it = representative.find(amap.pairs());
    if (it == representative.end()) continue;
    rep.adj_defect = std::max(rep.adj_defect, two_norm_distance(inverse(extend_to_word(sigma, w)), it->second));
  }
  return rep;
}

SoficApprox compress(const SoficApprox& sigma, const std::vector<std::string>& projection_labels) {
  DiagImage keep(sigma.d, 0);
  for (const auto& l : projection_labels) {
    const auto& img = sigma.at(l);
    const auto* diag = std::get_if<DiagImage>(&img);
    if (!diag) throw LookupError("compress: label '" + l + "' is not a projection");
    for (int i = 0; i < sigma.d; ++i) keep[i] = keep[i] | (*diag)[i];
  }
  std::vector<int> new_index(sigma.d, -1);
  int m = 0;
  for (int i = 0; i < sigma.d; ++i)
    if (keep[i]) new_index[i] = m++;
  if (m == 0) throw ModelError("compress: projection is zero");

  SoficApprox out;
  out.d = m;
  for (const auto& [label, img] : sigma.images) {
    if (const auto* pm = std::get_if<PartialMap>(&img)) {
      std::vector<std::pair<int, int>> pairs;
      for (auto [s, t] : pm->pairs())
        if (new_index[s] >= 0 && new_index[t] >= 0) pairs.emplace_back(new_index[s], new_index[t]);
      out.images.emplace(label, PartialMap(m, std::move(pairs)));
    } else if (std::find(projection_labels.begin(), projection_labels.end(), label) != projection_labels.end()) {
      const auto& diag = std::get<DiagImage>(img);
      DiagImage nd(m, 0);
      bool any = false;
      for (int i = 0; i < sigma.d; ++i)
        if (new_index[i] >= 0) {
          nd[new_index[i]] = diag[i];
          any = any || diag[i];
        }
      if (any) out.images.emplace(label, std::move(nd));
    }
  }
  return out;
}

SoficApprox compress(const SoficApprox& sigma, const std::string& projection_label) {
  return compress(sigma, std::vector<std::string>{projection_label});
}

SoficApprox perturb(const SoficApprox& sigma, double rate, std::uint64_t seed) {
  if (!(rate >= 0.0 && rate <= 1.0)) throw ParameterError("perturb: rate must lie in [0,1]");
  SoficApprox out = sigma;
  const int budget = static_cast<int>(std::ceil(rate * sigma.d - 1e-12));
  for (auto& [label, img] : out.images) {
    auto* pm = std::get_if<PartialMap>(&img);
    if (!pm || budget <= 1) continue;
    std::vector<std::pair<int, int>> pairs = pm->pairs();
    const int r = std::min<int>(budget, static_cast<int>(pairs.size()));
    if (r <= 1) continue;
    auto eng = make_engine(seed, fnv1a(label));
    std::vector<int> idx(pairs.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), eng);
    idx.resize(r);
    const int first_target = pairs[idx[0]].second;
    for (int i = 0; i + 1 < r; ++i) pairs[idx[i]].second = pairs[idx[i + 1]].second;
    pairs[idx[r - 1]].second = first_target;
    img = PartialMap(sigma.d, std::move(pairs));
  }
  return out;
}

}  // namespace sofdim
