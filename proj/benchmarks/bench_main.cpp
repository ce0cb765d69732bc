#include <random>

#include <benchmark/benchmark.h>

#include "sofdim/covering.hpp"
#include "sofdim/graphcoh.hpp"
#include "sofdim/homdim.hpp"
#include "sofdim/sofic.hpp"

using namespace sofdim;

namespace {

Model four_periodic(int orbits) {
  std::vector<std::vector<int>> blocks;
  std::vector<std::pair<int, int>> cycle;
  for (int o = 0; o < orbits; ++o) {
    std::vector<int> b;
    for (int k = 0; k < 4; ++k) {
      b.push_back(4 * o + k);
      cycle.emplace_back(4 * o + k, 4 * o + (k + 1) % 4);
    }
    blocks.push_back(b);
  }
  Model m;
  m.rel = FinRel(AtomSpace::uniform(4 * orbits), blocks);
  m.generators.push_back(PartialMap(4 * orbits, cycle));
  return m;
}

Graph grid_graph(int side) {
  std::vector<std::pair<int, int>> e;
  for (int r = 0; r < side; ++r)
    for (int c = 0; c < side; ++c) {
      const int v = r * side + c;
      if (c + 1 < side) e.emplace_back(v, v + 1);
      if (r + 1 < side) e.emplace_back(v, v + side);
    }
  return Graph(side * side, e);
}

void BM_SampleAndCheck(benchmark::State& state) {
  const Model m = four_periodic(2);
  const GeneratingSpec spec = constant_fiber_spec(m, {2, 2});
  const SoficApprox sigma = exact_model(m, static_cast<int>(state.range(0))).sigma;
  HomParams params;
  std::uint64_t i = 0;
  for (auto _ : state) {
    const Eigen::MatrixXd xi = sample_ball(sigma.d, 2, 1, i++);
    benchmark::DoNotOptimize(check_hom(sample_T_transversal(xi, spec, sigma), spec, sigma, params));
  }
  state.SetLabel("d=" + std::to_string(sigma.d));
}
BENCHMARK(BM_SampleAndCheck)->Arg(15)->Arg(30)->Arg(60);

void BM_GreedyCovering(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  PointCloud cloud;
  cloud.d = d;
  for (int k = 0; k < 64; ++k) {
    Eigen::VectorXd v(d);
    for (int t = 0; t < d; ++t) v[t] = n(rng);
    cloud.points.push_back(v);
  }
  for (auto _ : state) benchmark::DoNotOptimize(d_eps_greedy(cloud, 0.1, NormSelector::lp(2)));
}
BENCHMARK(BM_GreedyCovering)->Arg(64)->Arg(256);

void BM_Kappa(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(kappa(0.7, 0.05, 2).value);
}
BENCHMARK(BM_Kappa);

void BM_NeumannInverse(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const Graph g = grid_graph(side);
  const Eigen::VectorXd b = Eigen::VectorXd::Ones(g.vertices());
  for (auto _ : state) benchmark::DoNotOptimize(neumann_inverse(g, {0, side * side - 1}, b));
}
BENCHMARK(BM_NeumannInverse)->Arg(8)->Arg(16);

void BM_CutProjector(benchmark::State& state) {
  const Graph g = grid_graph(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(cut_projector(g));
}
BENCHMARK(BM_CutProjector)->Arg(8)->Arg(14);

}  // namespace

BENCHMARK_MAIN();
