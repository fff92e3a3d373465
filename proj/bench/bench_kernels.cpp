// Serial reference kernels against their OpenMP counterparts.
//
//   ./build/bench/bench_kernels --benchmark_filter=required
//   OMP_NUM_THREADS=8 ./build/bench/bench_kernels

#include <benchmark/benchmark.h>

#include <random>

#include "credforest/kernels.hpp"
#include "credforest/simlab.hpp"

using namespace credforest;

namespace {

// Random recursive tree: each account picks a uniformly random earlier
// sponsor, so depth grows like log n and levels are wide.
LedgerState random_forest(std::size_t n) {
  std::mt19937_64 rng(n);
  auto pick = [&](Amount lo, Amount hi) {
    return std::uniform_int_distribution<Amount>(lo, hi)(rng);
  };
  LedgerState s;
  for (std::size_t i = 0; i < n; ++i) {
    Account a;
    a.id = "n" + std::to_string(i);
    a.earned = pick(0, 50);
    a.principal = pick(0, 3) == 0 ? pick(1, 100) : 0;
    if (i < 4) {
      a.kind = AccountKind::kSeed;
      a.base_budget = 1'000'000'000;
    } else {
      a.kind = AccountKind::kNonSeed;
      a.sponsor = static_cast<AccountIndex>(pick(0, static_cast<Amount>(i) - 1));
      a.incoming = pick(100, 10'000);
    }
    const AccountIndex idx = s.push_account(std::move(a));
    if (idx >= 4) {
      const AccountIndex sp = *s.account(idx).sponsor;
      s.account(sp).out.push_back({idx, s.account(idx).incoming});
    }
  }
  return s;
}

template <typename Fn>
void run_kernel(benchmark::State& st, Fn&& fn) {
  const LedgerState s = random_forest(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(fn(s));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_RequiredSerial(benchmark::State& st) {
  run_kernel(st, [](const LedgerState& s) { return kernels::serial::required_delegations(s); });
}
void BM_RequiredParallel(benchmark::State& st) {
  run_kernel(st, [](const LedgerState& s) { return kernels::parallel::required_delegations(s); });
}
void BM_TotalsSerial(benchmark::State& st) {
  run_kernel(st, [](const LedgerState& s) { return kernels::serial::credit_totals(s); });
}
void BM_TotalsParallel(benchmark::State& st) {
  run_kernel(st, [](const LedgerState& s) { return kernels::parallel::credit_totals(s); });
}

void BM_BreakEven(benchmark::State& st, Exec exec) {
  simlab::BreakEvenParams p;
  p.trials = static_cast<std::uint64_t>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(simlab::mc_breakeven(p, exec).summary.total);
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

}  // namespace

BENCHMARK(BM_RequiredSerial)->RangeMultiplier(8)->Range(1 << 10, 1 << 19);
BENCHMARK(BM_RequiredParallel)->RangeMultiplier(8)->Range(1 << 10, 1 << 19);
BENCHMARK(BM_TotalsSerial)->RangeMultiplier(8)->Range(1 << 10, 1 << 19);
BENCHMARK(BM_TotalsParallel)->RangeMultiplier(8)->Range(1 << 10, 1 << 19);
BENCHMARK_CAPTURE(BM_BreakEven, serial, Exec::kSerial)->Arg(20'000)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_BreakEven, parallel, Exec::kParallel)->Arg(20'000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
