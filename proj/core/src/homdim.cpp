#include "sofdim/homdim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <deque>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "sofdim/rng.hpp"

namespace sofdim {

namespace {

// ---------------------------------------------------------------- words ---

std::vector<Letter> generator_letters(const Model& model) {
  return model_letters(model, /*with_projections=*/false);
}

// For every atom x, a word carrying the first atom of its orbit to x, found by
// breadth-first search over generator letters in label order.
std::vector<Word> transversal_words(const Model& model) {
  const FinRel& rel = model.rel;
  const int n = rel.atoms();
  std::vector<Word> words(n);
  std::vector<char> seen(n, 0);
  const auto letters = generator_letters(model);
  std::vector<PartialMap> maps;
  for (const auto& l : letters) maps.push_back(atom_map(model, Word{l}));
  for (const auto& block : rel.blocks()) {
    std::deque<int> queue{block.front()};
    seen[block.front()] = 1;
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      for (std::size_t k = 0; k < letters.size(); ++k) {
        const int v = maps[k].raw(u);
        if (v < 0 || seen[v]) continue;
        seen[v] = 1;
        words[v] = Word{letters[k]};
        words[v].insert(words[v].end(), words[u].begin(), words[u].end());
        queue.push_back(v);
      }
    }
    for (int x : block)
      if (!seen[x])
        throw ModelError("generators do not connect orbit containing atom " + std::to_string(block.front()));
  }
  return words;
}

Word concat(Word a, const Word& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

// Partial identity on the points carrying any of the given atom labels.
PartialMap atom_restriction(const SoficApprox& sigma, const std::vector<int>& atoms) {
  std::vector<char> keep(sigma.d, 0);
  for (int a : atoms) {
    const auto& img = sigma.at(atom_label(a));
    const auto* diag = std::get_if<DiagImage>(&img);
    if (!diag) throw ModelError("label " + atom_label(a) + " is not a projection");
    for (int i = 0; i < sigma.d; ++i) keep[i] |= (*diag)[i];
  }
  std::vector<int> pts;
  for (int i = 0; i < sigma.d; ++i)
    if (keep[i]) pts.push_back(i);
  return PartialMap::restriction_identity(sigma.d, pts);
}

void apply_add(const PartialMap& m, const Eigen::VectorXd& src, double coef, Eigen::Ref<Eigen::VectorXd> dst) {
  for (auto [s, t] : m.pairs()) dst[t] += coef * src[s];
}

Eigen::VectorXd apply(const PartialMap& m, const Eigen::VectorXd& src) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(src.size());
  for (auto [s, t] : m.pairs()) out[t] = src[s];
  return out;
}

// -------------------------------------------------------------- samplers ---

struct Term {
  int map;
  int comp;
  double coef;
};

struct SamplerPlan {
  int d = 0;
  int components = 0;
  std::vector<PartialMap> maps;
  std::vector<std::vector<Term>> columns;

  Eigen::MatrixXd build(const Eigen::MatrixXd& xi) const {
    if (xi.rows() != d || xi.cols() < components)
      throw DimensionError("xi must be d x " + std::to_string(components) + " (got " +
                           std::to_string(xi.rows()) + " x " + std::to_string(xi.cols()) + ")");
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(d, static_cast<Eigen::Index>(columns.size()));
    for (std::size_t c = 0; c < columns.size(); ++c)
      for (const auto& t : columns[c]) apply_add(maps[t.map], xi.col(t.comp), t.coef, T.col(c));
    return T;
  }
};

Eigen::MatrixXd inverse_frame(const FieldProfile& profile, int x) {
  if (profile.frames.empty()) return Eigen::MatrixXd::Identity(profile.dims[x], profile.dims[x]);
  return profile.frames[x].inverse();
}

SamplerPlan regular_plan(const GeneratingSpec& spec, const SoficApprox& sigma) {
  if (!spec.regular_points) throw ScopeError("regular sampler needs a regular representation");
  const FinRel& rel = spec.model.rel;
  const auto words = transversal_words(spec.model);
  const auto off = spec.profile.offsets();
  std::vector<char> in_b(rel.atoms(), 0);
  for (int y : *spec.regular_points) in_b[y] = 1;
  SamplerPlan plan;
  plan.d = sigma.d;
  plan.components = 1;
  plan.columns.resize(spec.total_dim());
  for (int a = 0; a < rel.atoms(); ++a) {
    const PartialMap ra = atom_restriction(sigma, {a});
    int i = 0;
    for (int y : rel.orbit(a)) {
      if (!in_b[y]) continue;
      const Word w = y == a ? Word{} : concat(words[a], inverse_word(words[y]));
      plan.maps.push_back(compose(ra, extend_to_word(sigma, w)));
      plan.columns[off[a] + i].push_back({static_cast<int>(plan.maps.size()) - 1, 0, 1.0});
      ++i;
    }
  }
  return plan;
}

SamplerPlan transversal_plan(const GeneratingSpec& spec, const SoficApprox& sigma) {
  const FinRel& rel = spec.model.rel;
  const auto words = transversal_words(spec.model);
  const auto off = spec.profile.offsets();
  SamplerPlan plan;
  plan.d = sigma.d;
  plan.components = *std::max_element(spec.profile.dims.begin(), spec.profile.dims.end());
  plan.columns.resize(spec.total_dim());
  for (int x = 0; x < rel.atoms(); ++x) {
    const int k = spec.profile.dims[x];
    if (k == 0) continue;
    const int o = rel.orbit(x).front();
    plan.maps.push_back(compose(extend_to_word(sigma, words[x]), atom_restriction(sigma, {o})));
    const int mi = static_cast<int>(plan.maps.size()) - 1;
    const Eigen::MatrixXd binv = inverse_frame(spec.profile, x);
    for (int i = 0; i < k; ++i)
      for (int c = 0; c < k; ++c)
        if (binv(c, i) != 0) plan.columns[off[x] + i].push_back({mi, c, binv(c, i)});
  }
  return plan;
}

SamplerPlan periodic_plan(const GeneratingSpec& spec, const SoficApprox& sigma, const std::string& label,
                          int blocks) {
  const FinRel& rel = spec.model.rel;
  const Word alpha = parse_word(label);
  if (alpha.size() != 1) throw ParameterError("period label must be a single generator");
  const PartialMap amap = atom_map(spec.model, alpha);
  const int n = static_cast<int>(rel.blocks().front().size());
  for (const auto& b : rel.blocks())
    if (static_cast<int>(b.size()) != n) throw ScopeError("periodic sampler needs constant orbit size");
  // Position of each atom along the period cycle of its orbit.
  std::vector<int> step(rel.atoms(), -1);
  std::vector<int> base;
  for (const auto& b : rel.blocks()) {
    int x = b.front();
    base.push_back(x);
    for (int j = 0; j < n; ++j) {
      if (x < 0 || step[x] != -1) throw ScopeError("period map is not an n-cycle on every orbit");
      step[x] = j;
      x = amap.raw(x);
    }
    if (x != b.front()) throw ScopeError("period map is not an n-cycle on every orbit");
  }
  const int nb = static_cast<int>(base.size());
  if (blocks <= 0 || blocks > nb) blocks = nb;
  std::vector<int> block_of_orbit(nb);
  std::vector<std::vector<int>> block_atoms(blocks);
  for (int i = 0; i < nb; ++i) {
    block_of_orbit[i] = static_cast<int>(static_cast<long long>(i) * blocks / nb);
    block_atoms[block_of_orbit[i]].push_back(base[i]);
  }
  for (const auto& b : block_atoms)
    if (b.empty()) throw ModelError("periodic sampler: empty block");

  SamplerPlan plan;
  plan.d = sigma.d;
  plan.components = *std::max_element(spec.profile.dims.begin(), spec.profile.dims.end());
  plan.columns.resize(spec.total_dim());
  // maps indexed by (block, j)
  std::vector<PartialMap> power(n);
  power[0] = PartialMap::identity(sigma.d);
  const PartialMap sa = extend_to_word(sigma, alpha);
  for (int j = 1; j < n; ++j) power[j] = compose(sa, power[j - 1]);
  for (int k = 0; k < blocks; ++k) {
    const PartialMap rb = atom_restriction(sigma, block_atoms[k]);
    for (int j = 0; j < n; ++j) plan.maps.push_back(compose(power[j], rb));
  }
  const auto off = spec.profile.offsets();
  for (int z = 0; z < rel.atoms(); ++z) {
    const int kz = spec.profile.dims[z];
    if (kz == 0) continue;
    const int orbit = rel.orbit_of(z);
    const int x = base[orbit];
    const int k = block_of_orbit[orbit];
    const double coef = rel.space().weight(x) / rel.space().mass(block_atoms[k]);
    const int mi = k * n + step[z];
    const Eigen::MatrixXd binv = inverse_frame(spec.profile, z);
    for (int i = 0; i < kz; ++i)
      for (int c = 0; c < kz; ++c)
        if (binv(c, i) != 0) plan.columns[off[z] + i].push_back({mi, c, coef * binv(c, i)});
  }
  return plan;
}

SamplerPlan make_plan(const GeneratingSpec& spec, const SoficApprox& sigma, const EstimateOptions& opt) {
  switch (opt.sampler) {
    case SamplerKind::Regular: return regular_plan(spec, sigma);
    case SamplerKind::Periodic: return periodic_plan(spec, sigma, opt.period_label, opt.period_blocks);
    case SamplerKind::Transversal: break;
  }
  return transversal_plan(spec, sigma);
}

// ------------------------------------------------------------- checking ---

Eigen::VectorXd stacked(const VectorField& f, const FieldProfile& profile) {
  const auto off = profile.offsets();
  Eigen::VectorXd v(off.back());
  for (int x = 0; x < f.atoms(); ++x) v.segment(off[x], profile.dims[x]) = f.fibers[x];
  return v;
}

// (phi v)_x = pi(x, phi^{-1} x) v_{phi^{-1} x} on the range of phi.
Eigen::VectorXd act(const PartialMap& phi, const Eigen::VectorXd& v, const FieldProfile& profile,
                    const std::vector<int>& off) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(v.size());
  for (auto [s, t] : phi.pairs()) {
    const int k = profile.dims[t];
    if (k == 0) continue;
    out.segment(off[t], k) = profile.transport(t, s) * v.segment(off[s], k);
  }
  return out;
}

struct HomContext {
  int d = 0;
  double p = 2;
  double delta = 0;
  std::vector<Word> words;
  std::vector<PartialMap> sigma_w;
  std::vector<Eigen::VectorXd> fields;               // stacked v_j
  std::vector<std::vector<Eigen::VectorXd>> moved;   // [word][field] = P_w v_j
  Eigen::VectorXd mass_diag;                         // mu(x) per stacked coordinate
  std::vector<int> fiber_size;                       // dims per stacked coordinate
};

std::vector<Letter> letters_for(const HomParams& params, const Model& model, const SoficApprox& sigma) {
  std::vector<Letter> out;
  if (params.F.empty()) {
    out = generator_letters(model);
  } else {
    for (const auto& label : params.F) {
      if (label.empty()) throw LookupError("empty label in F");
      if (label[0] == 'g') {
        out.push_back({label, false});
        out.push_back({label, true});
      } else {
        out.push_back({label, false});
      }
    }
  }
  for (const auto& l : out) (void)sigma.at(l.label);
  return out;
}

HomContext make_context(const GeneratingSpec& spec, const SoficApprox& sigma, const HomParams& params) {
  HomContext ctx;
  ctx.d = sigma.d;
  ctx.p = params.p;
  ctx.delta = params.delta;
  const auto letters = letters_for(params, spec.model, sigma);
  for (auto& w : enumerate_words(letters, params.m))
    if (!w.empty()) ctx.words.push_back(std::move(w));
  const auto off = spec.profile.offsets();
  for (const auto& f : spec.fields) ctx.fields.push_back(stacked(f, spec.profile));
  for (const auto& w : ctx.words) {
    ctx.sigma_w.push_back(extend_to_word(sigma, w));
    const PartialMap phi = atom_map(spec.model, w);
    std::vector<Eigen::VectorXd> mv;
    for (const auto& v : ctx.fields) mv.push_back(act(phi, v, spec.profile, off));
    ctx.moved.push_back(std::move(mv));
  }
  ctx.mass_diag.resize(off.back());
  ctx.fiber_size.resize(off.back());
  for (int x = 0; x < spec.profile.rel.atoms(); ++x)
    for (int i = off[x]; i < off[x + 1]; ++i) {
      ctx.mass_diag[i] = spec.profile.rel.space().weight(x);
      ctx.fiber_size[i] = spec.profile.dims[x];
    }
  return ctx;
}

double operator_norm(const Eigen::MatrixXd& T, const HomContext& ctx) {
  if (T.cols() == 0 || T.rows() == 0) return 0.0;
  const double d = static_cast<double>(T.rows());
  const Eigen::VectorXd inv_sqrt_mass = ctx.mass_diag.cwiseSqrt().cwiseInverse();
  if (ctx.p == 2.0) {
    const Eigen::MatrixXd S = T * inv_sqrt_mass.asDiagonal() / std::sqrt(d);
    const Eigen::MatrixXd G = S.transpose() * S;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
  }
  // Riesz-Thorin between the weighted l^1 and l^infinity norms on coordinates,
  // then Euclidean-vs-l^p equivalence on each fiber.
  double n1 = 0, ninf = 0;
  const Eigen::MatrixXd A = T.cwiseAbs();
  for (Eigen::Index c = 0; c < A.cols(); ++c) n1 = std::max(n1, A.col(c).sum() / d / ctx.mass_diag[c]);
  for (Eigen::Index r = 0; r < A.rows(); ++r) ninf = std::max(ninf, A.row(r).sum());
  const double p = ctx.p;
  double bound = std::pow(n1, 1.0 / p) * std::pow(ninf, 1.0 - 1.0 / p);
  if (p < 2.0) {
    const int kmax = *std::max_element(ctx.fiber_size.begin(), ctx.fiber_size.end());
    bound *= std::pow(static_cast<double>(kmax), 1.0 / p - 0.5);
  }
  return bound;
}

double kernel_norm(const Eigen::MatrixXd& T, const Eigen::MatrixXd& K, double p) {
  if (K.cols() == 0) return 0.0;
  const Eigen::MatrixXd TK = T * K;
  const double d = static_cast<double>(T.rows());
  if (p == 2.0) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(TK);
    return svd.singularValues()(0) / std::sqrt(d);
  }
  // Frobenius bound: valid for every p via the l^2 -> l^p comparison on the
  // finite coordinate set.
  return TK.norm() / std::pow(d, 1.0 / std::max(p, 2.0));
}

HomWitness check_with_context(Eigen::MatrixXd T, const GeneratingSpec& spec, const HomContext& ctx) {
  HomWitness w;
  if (T.rows() != ctx.d || T.cols() != spec.total_dim())
    throw DimensionError("check_hom: T must be " + std::to_string(ctx.d) + " x " +
                         std::to_string(spec.total_dim()));
  w.original_norm = operator_norm(T, ctx);
  if (w.original_norm > 1.0) {
    T /= w.original_norm;
    w.normalized = true;
  }
  const int d = ctx.d;
  const double p = ctx.p;
  const std::size_t J = ctx.fields.size();
  const std::size_t C = ctx.words.size() * J;

  std::vector<Eigen::VectorXd> tv(J);
  for (std::size_t j = 0; j < J; ++j) tv[j] = T * ctx.fields[j];
  // cost[c][t] = |r_c(t)|^p / d
  std::vector<Eigen::VectorXd> cost(C);
  std::vector<double> sum(C, 0.0);
  for (std::size_t wi = 0; wi < ctx.words.size(); ++wi)
    for (std::size_t j = 0; j < J; ++j) {
      const Eigen::VectorXd r = T * ctx.moved[wi][j] - apply(ctx.sigma_w[wi], tv[j]);
      Eigen::VectorXd c = r.cwiseAbs();
      c = (p == 2.0 ? c.cwiseAbs2() : Eigen::VectorXd(c.array().pow(p))) / d;
      sum[wi * J + j] = c.sum();
      cost[wi * J + j] = std::move(c);
    }
  const double budget = std::pow(ctx.delta, p);
  const int deletions = d - static_cast<int>(std::ceil((1.0 - ctx.delta) * d - 1e-12));
  std::vector<char> kept(d, 1);
  int used = 0;
  std::string binding;
  while (true) {
    std::size_t worst = 0;
    for (std::size_t c = 1; c < C; ++c)
      if (sum[c] > sum[worst]) worst = c;
    if (C == 0 || sum[worst] < budget) break;
    const auto describe = [&](std::size_t c) {
      return "word '" + format_word(ctx.words[c / J]) + "', field " + std::to_string(c % J);
    };
    if (used >= deletions) {
      binding = describe(worst) + ": defect exceeds delta after " + std::to_string(used) + " deletions";
      break;
    }
    int t_best = -1;
    double v_best = 0;
    for (int t = 0; t < d; ++t)
      if (kept[t] && cost[worst][t] > v_best) {
        v_best = cost[worst][t];
        t_best = t;
      }
    if (t_best < 0) {
      binding = describe(worst) + ": no coordinate left to delete";
      break;
    }
    kept[t_best] = 0;
    ++used;
    for (std::size_t c = 0; c < C; ++c) sum[c] -= cost[c][t_best];
  }
  for (int t = 0; t < d; ++t)
    if (kept[t]) w.A.push_back(t);
  w.defects.resize(C);
  for (std::size_t c = 0; c < C; ++c) {
    double s = 0;
    for (int t : w.A) s += cost[c][t];
    w.defects[c] = std::pow(s, 1.0 / p);
    w.max_defect = std::max(w.max_defect, w.defects[c]);
  }
  if (binding.empty() && !(w.max_defect < ctx.delta)) binding = "defect at the tolerance boundary";
  w.kernel_norm = kernel_norm(T, spec.kernel, p);
  if (binding.empty() && w.kernel_norm > ctx.delta)
    binding = "kernel norm " + std::to_string(w.kernel_norm) + " exceeds delta";
  w.success = binding.empty();
  w.binding = std::move(binding);
  w.T = std::move(T);
  return w;
}

// ------------------------------------------------------- spec builders ---

std::vector<int> first_atoms(const FinRel& rel) {
  std::vector<int> out;
  for (const auto& b : rel.blocks()) out.push_back(b.front());
  return out;
}

GeneratingSpec restrict_spec(const GeneratingSpec& spec, const std::vector<Eigen::MatrixXd>& bases) {
  spec.validate();
  if (spec.kernel.cols() > 0) throw ScopeError("restricting a representation with a kernel is not supported");
  const FieldProfile& pf = spec.profile;
  const int n = pf.rel.atoms();
  if (static_cast<int>(bases.size()) != n) throw DimensionError("one subspace basis per atom required");
  for (int x = 0; x < n; ++x) {
    if (bases[x].rows() != pf.dims[x])
      throw DimensionError("subspace basis at atom " + std::to_string(x) + " has wrong row count");
    if (bases[x].cols() > 0) {
      const Eigen::MatrixXd g = bases[x].transpose() * bases[x];
      if ((g - Eigen::MatrixXd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff() > 1e-9)
        throw ModelError("subspace basis at atom " + std::to_string(x) + " is not orthonormal");
    }
  }
  for (const auto& b : pf.rel.blocks()) {
    for (int x : b) {
      if (bases[x].cols() != bases[b.front()].cols())
        throw ModelError("subspace dimension varies along the orbit of atom " + std::to_string(b.front()));
      for (int y : b) {
        if (bases[x].cols() == 0) continue;
        const Eigen::MatrixXd moved = pf.transport(x, y) * bases[y];
        const Eigen::MatrixXd resid = moved - bases[x] * (bases[x].transpose() * moved);
        if (resid.cwiseAbs().maxCoeff() > 1e-9 * std::max(1.0, moved.cwiseAbs().maxCoeff()))
          throw ModelError("subspace is not invariant under transport between atoms " + std::to_string(x) +
                           " and " + std::to_string(y));
      }
    }
  }
  GeneratingSpec out;
  out.model = spec.model;
  out.profile.rel = pf.rel;
  for (int x = 0; x < n; ++x) out.profile.dims.push_back(static_cast<int>(bases[x].cols()));
  out.profile.frames.resize(n);
  for (int x = 0; x < n; ++x) {
    const int o = pf.rel.orbit(x).front();
    out.profile.frames[x] = bases[x].transpose() * pf.transport(x, o) * bases[o];
  }
  for (const auto& f : spec.fields) {
    std::vector<Eigen::VectorXd> fib;
    for (int x = 0; x < n; ++x) fib.push_back(bases[x].transpose() * f.fibers[x]);
    out.fields.emplace_back(pf.rel.space(), std::move(fib));
  }
  return out;
}

}  // namespace

// ------------------------------------------------------------ public API ---

void GeneratingSpec::validate() const {
  model.validate();
  if (!(profile.rel == model.rel)) throw ModelError("profile: relation differs from the model's");
  profile.validate();
  if (fields.empty()) throw ModelError("fields: generating sequence is empty");
  if (!is_dynamically_generating(fields, profile)) throw ModelError("fields: not dynamically generating");
  if (kernel.cols() > 0 && kernel.rows() != total_dim())
    throw DimensionError("kernel: row count differs from the representation dimension");
  if (regular_points) {
    for (int y : *regular_points)
      if (y < 0 || y >= model.rel.atoms()) throw ModelError("regular_points: atom out of range");
  }
}

GeneratingSpec regular_spec(const Model& model, const std::vector<int>& points) {
  model.validate();
  const FinRel& rel = model.rel;
  std::vector<int> pts(points);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.empty()) throw ModelError("regular representation: projection set is empty");
  std::vector<char> in_b(rel.atoms(), 0);
  for (int y : pts) {
    if (y < 0 || y >= rel.atoms()) throw ModelError("regular representation: atom out of range");
    in_b[y] = 1;
  }
  GeneratingSpec spec;
  spec.model = model;
  spec.profile.rel = rel;
  std::vector<Eigen::VectorXd> diag(rel.atoms());
  for (int x = 0; x < rel.atoms(); ++x) {
    int k = 0, pos = -1;
    for (int y : rel.orbit(x)) {
      if (!in_b[y]) continue;
      if (y == x) pos = k;
      ++k;
    }
    spec.profile.dims.push_back(k);
    diag[x] = Eigen::VectorXd::Zero(k);
    if (pos >= 0) diag[x][pos] = 1.0;
  }
  spec.fields.emplace_back(rel.space(), std::move(diag));
  spec.regular_points = pts;
  return spec;
}

std::vector<VectorField> fiber_basis_fields(const FieldProfile& profile) {
  const int n = profile.rel.atoms();
  const int kmax = n ? *std::max_element(profile.dims.begin(), profile.dims.end()) : 0;
  const auto bases = first_atoms(profile.rel);
  std::vector<VectorField> out;
  for (int c = 0; c < kmax; ++c) {
    std::vector<Eigen::VectorXd> fib;
    for (int x = 0; x < n; ++x) fib.push_back(Eigen::VectorXd::Zero(profile.dims[x]));
    for (int o : bases) {
      if (profile.dims[o] <= c) continue;
      Eigen::VectorXd e = Eigen::VectorXd::Unit(profile.dims[o], c);
      fib[o] = profile.frames.empty() ? e : Eigen::VectorXd(profile.frames[o] * e);
    }
    out.emplace_back(profile.rel.space(), std::move(fib));
  }
  return out;
}

GeneratingSpec constant_fiber_spec(const Model& model, const std::vector<int>& orbit_dims) {
  model.validate();
  const FinRel& rel = model.rel;
  if (orbit_dims.size() != rel.blocks().size())
    throw DimensionError("one fiber dimension per orbit required");
  GeneratingSpec spec;
  spec.model = model;
  spec.profile.rel = rel;
  for (int x = 0; x < rel.atoms(); ++x) spec.profile.dims.push_back(orbit_dims[rel.orbit_of(x)]);
  spec.fields = fiber_basis_fields(spec.profile);
  return spec;
}

GeneratingSpec subrepresentation_spec(const GeneratingSpec& spec, const std::vector<Eigen::MatrixXd>& bases) {
  return restrict_spec(spec, bases);
}

GeneratingSpec quotient_spec(const GeneratingSpec& spec, const std::vector<Eigen::MatrixXd>& bases) {
  std::vector<Eigen::MatrixXd> comp;
  for (std::size_t x = 0; x < bases.size(); ++x) {
    const Eigen::Index k = bases[x].rows(), w = bases[x].cols();
    if (w == 0) {
      comp.push_back(Eigen::MatrixXd::Identity(k, k));
      continue;
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(bases[x]);
    const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(k, k);
    comp.push_back(Q.rightCols(k - w));
  }
  return restrict_spec(spec, comp);
}

CompressedSpec compress_spec(const GeneratingSpec& spec, const std::vector<int>& atoms) {
  spec.validate();
  if (spec.kernel.cols() > 0) throw ScopeError("compressing a representation with a kernel is not supported");
  const Compression cm = compress_model(spec.model, atoms);
  CompressedSpec out;
  out.mass = cm.mass;
  out.spec.model = cm.model;
  out.spec.profile.rel = cm.model.rel;
  for (int x : cm.kept) {
    out.spec.profile.dims.push_back(spec.profile.dims[x]);
    if (!spec.profile.frames.empty()) out.spec.profile.frames.push_back(spec.profile.frames[x]);
  }
  out.spec.fields = fiber_basis_fields(out.spec.profile);
  return out;
}

double orbit_dimension(const FieldProfile& profile) {
  double s = 0;
  for (int x = 0; x < profile.rel.atoms(); ++x)
    s += profile.rel.space().weight(x) * profile.dims[x] / static_cast<double>(profile.rel.orbit(x).size());
  return s;
}

Rational orbit_dimension_exact(const FieldProfile& profile) {
  Rational s = 0;
  for (int x = 0; x < profile.rel.atoms(); ++x)
    s += profile.rel.space().exact_weight(x) * profile.dims[x] /
         static_cast<long long>(profile.rel.orbit(x).size());
  return s;
}

double support_upper_bound(const GeneratingSpec& spec) {
  double s = 0;
  for (const auto& f : spec.fields) s += support_mass(f);
  return s;
}

void HomParams::validate() const {
  if (!(delta > 0 && delta < 1)) throw ParameterError("hom params: delta must lie in (0,1)");
  if (!(eps > 0 && eps < 1)) throw ParameterError("hom params: eps must lie in (0,1)");
  if (m < 1) throw ParameterError("hom params: word length m must be >= 1");
  if (!(p >= 1)) throw ParameterError("hom params: p must be >= 1");
}

double hom_operator_norm(const Eigen::MatrixXd& T, const GeneratingSpec& spec, double p) {
  HomContext ctx;
  ctx.p = p;
  const auto off = spec.profile.offsets();
  ctx.mass_diag.resize(off.back());
  ctx.fiber_size.resize(off.back());
  for (int x = 0; x < spec.profile.rel.atoms(); ++x)
    for (int i = off[x]; i < off[x + 1]; ++i) {
      ctx.mass_diag[i] = spec.profile.rel.space().weight(x);
      ctx.fiber_size[i] = spec.profile.dims[x];
    }
  if (T.cols() != off.back()) throw DimensionError("operator norm: column count differs from the representation");
  return operator_norm(T, ctx);
}

HomWitness check_hom(const Eigen::MatrixXd& T, const GeneratingSpec& spec, const SoficApprox& sigma,
                     const HomParams& params) {
  params.validate();
  spec.validate();
  sigma.validate();
  return check_with_context(T, spec, make_context(spec, sigma, params));
}

Eigen::MatrixXd sample_T_xi(const Eigen::MatrixXd& xi, const GeneratingSpec& spec, const SoficApprox& sigma) {
  return regular_plan(spec, sigma).build(xi);
}

Eigen::MatrixXd sample_T_transversal(const Eigen::MatrixXd& xi, const GeneratingSpec& spec,
                                     const SoficApprox& sigma) {
  return transversal_plan(spec, sigma).build(xi);
}

Eigen::MatrixXd sample_T_xi_N(const Eigen::MatrixXd& xi, const GeneratingSpec& spec, const SoficApprox& sigma,
                              const std::string& period_label, int blocks) {
  return periodic_plan(spec, sigma, period_label, blocks).build(xi);
}

int xi_components(const GeneratingSpec& spec, SamplerKind kind) {
  if (kind == SamplerKind::Regular) return 1;
  return *std::max_element(spec.profile.dims.begin(), spec.profile.dims.end());
}

Eigen::MatrixXd sample_ball(int d, int k, std::uint64_t seed, std::uint64_t index) {
  if (d < 1 || k < 1) throw DimensionError("sample_ball: sizes must be positive");
  auto eng = make_engine(seed, 0xB411u, index);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Eigen::MatrixXd xi(d, k);
  for (Eigen::Index c = 0; c < k; ++c)
    for (Eigen::Index t = 0; t < d; ++t) xi(t, c) = normal(eng);
  const double radius = std::pow(unif(eng), 1.0 / (static_cast<double>(d) * k));
  const double nrm = xi.norm() / std::sqrt(static_cast<double>(d));
  if (nrm > 0) xi *= radius / nrm;
  return xi;
}

void EstimateGrid::validate() const {
  if (eps.empty() || F.empty() || m.empty() || delta.empty()) throw ParameterError("grid: every axis must be nonempty");
  for (double e : eps)
    if (!(e > 0 && e < 0.5)) throw ParameterError("grid: eps values must lie in (0,1/2)");
  for (int mm : m)
    if (mm < 1) throw ParameterError("grid: word lengths must be >= 1");
  for (double dl : delta)
    if (!(dl > 0 && dl < 1)) throw ParameterError("grid: delta values must lie in (0,1)");
  if (!(p >= 1)) throw ParameterError("grid: p must be >= 1");
  if (!(ratio > 1)) throw ParameterError("grid: ratio must exceed 1");
}

namespace {

struct SampleOutcome {
  bool success = false;
  double norm = 0;
  Eigen::VectorXd image;  // stacked T v_j
};

template <class Fn>
void parallel_for(int n, int threads, Fn fn) {
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, std::max(1, n));
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next = n;
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
}

int cloud_rank(const std::vector<Eigen::VectorXd>& pts) {
  if (pts.empty()) return 0;
  Eigen::MatrixXd Y(pts.front().size(), static_cast<Eigen::Index>(pts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i) Y.col(static_cast<Eigen::Index>(i)) = pts[i];
  Eigen::BDCSVD<Eigen::MatrixXd> svd(Y);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv[0] == 0) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > 1e-10 * sv[0]) ++r;
  return r;
}

}  // namespace

DimEstimate estimate_dim(const GeneratingSpec& spec, const std::vector<SoficApprox>& sigmas,
                         const EstimateGrid& grid, const EstimateOptions& options) {
  spec.validate();
  grid.validate();
  if (options.samples < 1) throw ParameterError("estimate_dim: samples must be >= 1");
  if (sigmas.empty()) throw ParameterError("estimate_dim: at least one sofic approximation required");

  DimEstimate est;
  est.support_bound = support_upper_bound(spec);
  est.rank_bound = std::numeric_limits<double>::infinity();
  const int J = static_cast<int>(spec.fields.size());
  const int K = xi_components(spec, options.sampler);
  bool any_success = false, saturated = false;
  double best_lower = -1;

  for (std::size_t si = 0; si < sigmas.size(); ++si) {
    const SoficApprox& sigma = sigmas[si];
    sigma.validate();
    const int d = sigma.d;
    const SamplerPlan plan = make_plan(spec, sigma, options);
    for (const auto& F : grid.F)
      for (int m : grid.m)
        for (double delta : grid.delta) {
          HomParams hp;
          hp.F = F;
          hp.m = m;
          hp.delta = delta;
          hp.p = grid.p;
          const HomContext ctx = make_context(spec, sigma, hp);
          std::vector<SampleOutcome> out(options.samples);
          parallel_for(options.samples, options.threads, [&](int s) {
            const Eigen::MatrixXd xi = sample_ball(d, K, derive_seed(options.seed, si), static_cast<std::uint64_t>(s));
            HomWitness w = check_with_context(plan.build(xi), spec, ctx);
            out[s].success = w.success;
            out[s].norm = w.original_norm;
            if (w.success) {
              out[s].image.resize(static_cast<Eigen::Index>(J) * d);
              for (int j = 0; j < J; ++j) out[s].image.segment(static_cast<Eigen::Index>(j) * d, d) = w.T * ctx.fields[j];
            }
          });
          std::vector<Eigen::VectorXd> cloud_pts;
          double norm_sum = 0;
          for (auto& o : out) {
            norm_sum += o.norm;
            if (o.success) cloud_pts.push_back(std::move(o.image));
          }
          const int succ = static_cast<int>(cloud_pts.size());
          const double frac = static_cast<double>(succ) / options.samples;
          const int r = cloud_rank(cloud_pts);
          const bool row_saturated = succ > 0 && r >= succ;
          if (succ > 0 && !row_saturated) est.rank_bound = std::min(est.rank_bound, static_cast<double>(r) / d);
          saturated = saturated || row_saturated;
          any_success = any_success || succ > 0;

          PointCloud cloud;
          cloud.d = d;
          cloud.points = std::move(cloud_pts);
          const NormSelector rho = J > 1 ? NormSelector::product(grid.p, J, grid.ratio) : NormSelector::lp(grid.p);
          for (double eps : grid.eps) {
            ScaleRow row;
            row.d = d;
            row.eps = eps;
            row.F_size = static_cast<int>(letters_for(hp, spec.model, sigma).size());
            row.m = m;
            row.delta = delta;
            row.alpha_hat = frac;
            row.successes = succ;
            row.samples = options.samples;
            row.mean_norm = norm_sum / options.samples;
            row.rank_over_d = static_cast<double>(r) / d;
            row.mass_factor = row.rank_over_d;
            if (succ > 0 && r > 0) {
              const double alpha = std::pow(frac, 1.0 / r);
              row.kappa_raw = kappa(alpha, eps, grid.p).value;
              row.kappa_lower = row.kappa_raw * row.mass_factor;
            }
            if (options.per_scale_covering && succ > 0)
              row.deps_over_d = static_cast<double>(d_eps_greedy(cloud, eps, rho)) / d;
            if (row.kappa_lower > best_lower) {
              best_lower = row.kappa_lower;
              est.alpha_hat = row.alpha_hat;
              est.kappa_raw = row.kappa_raw;
              est.mass_factor = row.mass_factor;
            }
            est.per_scale.push_back(row);
          }
        }
  }
  est.upper = std::min(est.support_bound, est.rank_bound);
  est.lower = std::max(0.0, best_lower);
  if (!any_success) {
    est.lower = 0;
    est.diagnostic = "no sampled map passed check_hom; lower bound set to 0";
  }
  if (saturated) {
    if (!est.diagnostic.empty()) est.diagnostic += "; ";
    est.diagnostic += "image rank equals the number of successes on some rows; those rows were excluded from the rank bound";
  }
  if (est.lower > est.upper) {
    est.lower = est.upper;
    est.lower_clamped = true;
  }
  return est;
}

}  // namespace sofdim
