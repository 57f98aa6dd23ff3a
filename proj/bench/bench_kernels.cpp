// Serial reference vs OpenMP kernels. Thread count follows OMP_NUM_THREADS.
#include <benchmark/benchmark.h>

#include <random>

#include "rst/baseline.hpp"
#include "rst/eval.hpp"

namespace {

using namespace rst;
using namespace rst::baseline;

Vector random_vector(std::mt19937_64& rng, Eigen::Index d) {
  std::uniform_real_distribution<double> dist(-1, 1);
  Vector v(d);
  for (Eigen::Index i = 0; i < d; ++i) v(i) = dist(rng);
  return v;
}

std::vector<SplitCandidate> candidates(int n, Eigen::Index d) {
  std::mt19937_64 rng(1);
  std::vector<SplitCandidate> out;
  for (int i = 0; i < n; ++i) out.push_back({random_vector(rng, d), random_vector(rng, d)});
  return out;
}

template <int (*Kernel)(std::span<const SplitCandidate>, const BiaffineParams&)>
void BM_best_split(benchmark::State& state) {
  const auto n = static_cast<int>(state.range(0));
  const auto params = BiaffineParams::random(768, 256, {"x"}, 2);
  const auto cands = candidates(n, 768);
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(cands, params));
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_best_split<best_split_serial>)->Arg(16)->Arg(64)->Arg(256);
BENCHMARK(BM_best_split<best_split>)->Arg(16)->Arg(64)->Arg(256);

template <std::string (*Kernel)(const Vector&, const Vector&, const BiaffineParams&,
                                std::span<const std::string>)>
void BM_best_label(benchmark::State& state) {
  const auto h = state.range(0);
  const auto params = BiaffineParams::random(8, h, label_set(LabelInventory::instrdt()), 3);
  std::mt19937_64 rng(4);
  const Vector l = random_vector(rng, h), r = random_vector(rng, h);
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(l, r, params, {}));
}
BENCHMARK(BM_best_label<best_label_serial>)->Arg(128)->Arg(512);
BENCHMARK(BM_best_label<best_label>)->Arg(128)->Arg(512);

RstTree random_tree(std::mt19937_64& rng, const std::vector<Edu>& edus, std::size_t lo,
                    std::size_t hi) {
  if (lo == hi) return RstTree::leaf(edus[lo]);
  const std::size_t k = std::uniform_int_distribution<std::size_t>(lo, hi - 1)(rng);
  const auto& rels = LabelInventory::rstdt().relations();
  return RstTree::node(random_tree(rng, edus, lo, k), random_tree(rng, edus, k + 1, hi),
                       kAllNuclearities[k % 3], rels[k % rels.size()]);
}

std::vector<eval::TreePair> corpus(int docs) {
  std::mt19937_64 rng(5);
  std::vector<eval::TreePair> out;
  for (int i = 0; i < docs; ++i) {
    std::vector<Edu> edus;
    const int n = std::uniform_int_distribution<int>(2, 120)(rng);
    for (int e = 1; e <= n; ++e) edus.push_back(Edu::make(e, "unit"));
    out.push_back({random_tree(rng, edus, 0, edus.size() - 1),
                   random_tree(rng, edus, 0, edus.size() - 1)});
  }
  return out;
}

template <eval::ParsevalCounts (*Kernel)(std::span<const eval::TreePair>,
                                         const eval::EvalOptions&)>
void BM_score_corpus(benchmark::State& state) {
  const auto pairs = corpus(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(pairs, {}));
}
BENCHMARK(BM_score_corpus<eval::score_corpus_serial>)->Arg(38)->Arg(400);
BENCHMARK(BM_score_corpus<eval::score_corpus>)->Arg(38)->Arg(400);

}  // namespace

BENCHMARK_MAIN();
