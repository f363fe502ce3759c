// Serial vs OpenMP scoring kernels. Thread count follows OMP_NUM_THREADS.

#include <random>

#include <benchmark/benchmark.h>

#include "mlcslm/tcp.hpp"

namespace {

using namespace mlcslm;

std::vector<Segment> session(std::mt19937& rng, const std::string& id, const char* prefix,
                             int speakers, int segments) {
  static const char* vocab[] = {"the", "a", "we", "go", "now", "then", "yes", "no"};
  std::uniform_real_distribution<double> t(0.0, 600.0), d(1.0, 12.0);
  std::vector<Segment> out;
  for (int i = 0; i < segments; ++i) {
    std::string text;
    const int words = 3 + int(rng() % 20);
    for (int k = 0; k < words; ++k) text += std::string(k ? " " : "") + vocab[rng() % 8];
    const double a = t(rng);
    out.push_back(make_segment(id, prefix + std::to_string(rng() % unsigned(speakers)), a,
                               a + d(rng), text));
  }
  return out;
}

struct PairInput {
  std::vector<SpeakerStream> ref, hyp;
};

PairInput pair_input(int speakers) {
  std::mt19937 rng(7);
  return {speaker_streams(session(rng, "s", "r", speakers, 40 * speakers)),
          speaker_streams(session(rng, "s", "h", speakers, 40 * speakers))};
}

std::vector<SessionInput> batch(int sessions) {
  std::mt19937 rng(11);
  std::vector<SessionInput> out;
  for (int k = 0; k < sessions; ++k) {
    const std::string id = "s" + std::to_string(k);
    out.push_back({id, LanguageId("French"), session(rng, id, "r", 3, 60),
                   session(rng, id, "h", 3, 60)});
  }
  return out;
}

void BM_PairCostSerial(benchmark::State& state) {
  const auto in = pair_input(int(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(serial::pair_cost_matrix(in.ref, in.hyp, 5.0));
}

void BM_PairCostParallel(benchmark::State& state) {
  const auto in = pair_input(int(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(pair_cost_matrix(in.ref, in.hyp, 5.0));
}

void BM_ScoreSessionsSerial(benchmark::State& state) {
  const auto in = batch(int(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(serial::score_sessions(in));
}

void BM_ScoreSessionsParallel(benchmark::State& state) {
  const auto in = batch(int(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(score_sessions(in));
}

}  // namespace

BENCHMARK(BM_PairCostSerial)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PairCostParallel)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ScoreSessionsSerial)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ScoreSessionsParallel)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
