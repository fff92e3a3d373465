#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "credforest/ledger.hpp"
#include "credforest/rng.hpp"
#include "credforest/simlab.hpp"

using namespace credforest;
using namespace credforest::simlab;

TEST_CASE("summary statistics are exact", "[simlab]") {
  const auto s = summarize("x", {2, 4, 4, 4, 5, 5, 7, 9});
  CHECK(s.trials == 8);
  CHECK(s.total == 40);
  CHECK(s.mean == 5.0);
  // sample variance 32 / 7
  CHECK(s.stddev == Catch::Approx(std::sqrt(32.0 / 7.0)));
  CHECK(s.standard_error == Catch::Approx(std::sqrt(32.0 / 7.0) / std::sqrt(8.0)));
  CHECK(s.min == 2);
  CHECK(s.max == 9);
  CHECK_FALSE(s.accepted);

  const auto one = summarize("y", {3});
  CHECK(one.stddev == 0.0);
  CHECK(summarize("z", {}).trials == 0);
}

TEST_CASE("trial streams differ by index and repeat by seed", "[simlab]") {
  std::set<std::uint64_t> first;
  for (std::uint64_t i = 0; i < 1000; ++i) first.insert(trial_stream(5, i)());
  CHECK(first.size() == 1000);
  CHECK(trial_stream(5, 17)() == trial_stream(5, 17)());
  CHECK(trial_stream(5, 17)() != trial_stream(6, 17)());
}

TEST_CASE("forced outcomes give the closed-form P&L", "[simlab]") {
  BreakEvenParams p;
  p.principal = 1'000'000;
  p.default_prob = Ppm{100'000};
  p.trials = 50;
  // I^R = round(111111 * 1e6 / 1e6)
  p.forced_outcome = Outcome::kRepaid;
  auto run = mc_breakeven(p);
  for (const auto& r : run.results) CHECK(r.protocol_pnl == 111'111);
  p.forced_outcome = Outcome::kDefaulted;
  run = mc_breakeven(p);
  for (const auto& r : run.results) CHECK(r.protocol_pnl == -1'000'000);
}

TEST_CASE("coin-flip default is break-even at rate one", "[simlab]") {
  BreakEvenParams p;
  p.principal = 1'000'000;
  p.default_prob = Ppm{500'000};
  p.trials = 20'000;
  p.seed = 3;
  const auto run = mc_breakeven(p);
  CHECK(run.summary.parameters["protocol_premium"] == 1'000'000);
  for (const auto& r : run.results)
    REQUIRE(std::llabs(r.protocol_pnl) == 1'000'000);
  CHECK(run.summary.accepted);
}

TEST_CASE("under-priced loans lose money", "[simlab]") {
  BreakEvenParams p;
  p.default_prob = Ppm{200'000};
  p.trials = 20'000;
  p.protocol_rate = Ppm{break_even_rate(p.default_prob, 1).value * 9 / 10};
  p.expect = Expectation::kLoss;
  const auto run = mc_breakeven(p);
  CHECK(run.summary.accepted);
  CHECK(run.summary.mean < -3 * run.summary.standard_error);
}

TEST_CASE("serial and parallel Monte Carlo agree", "[simlab]") {
  BreakEvenParams p;
  p.trials = 5'000;
  p.seed = 11;
  const auto a = mc_breakeven(p, Exec::kSerial);
  const auto b = mc_breakeven(p, Exec::kParallel);
  CHECK(a.results == b.results);
  CHECK(a.summary.total == b.summary.total);
  const auto again = summarize_breakeven(p, a.results);
  CHECK(again.total == a.summary.total);
  CHECK(again.mean == a.summary.mean);
  CHECK(summary_to_json(again) == summary_to_json(a.summary));
}

TEST_CASE("sybil split leaves the aggregate alone", "[simlab]") {
  LedgerState s;
  add_seed(s, "seed", 1'000'000);
  onboard(s, "seed", "u", 500'000);
  SybilParams p;
  p.account = "u";
  p.pseudonyms = 10;
  p.total = 100'000;
  p.runs = 200;
  const auto r = sybil_split(s, p);
  CHECK(r.summary.accepted);
  for (const auto& run : r.runs) {
    Amount sum = 0;
    for (Amount part : run.parts) {
      REQUIRE(part >= 1);
      sum += part;
    }
    REQUIRE(sum == 100'000);
    REQUIRE(run.parts.size() == 10);
    REQUIRE(run.total_after == run.total_before);
    REQUIRE(run.limit_drop == 100'000);
  }

  p.pseudonyms = 0;
  CHECK(sybil_split(s, p).summary.accepted);
  p.pseudonyms = 3;
  p.total = 2;
  CHECK_THROWS_AS(sybil_split(s, p), LedgerError);
  p.total = 500'001;
  CHECK_THROWS_AS(sybil_split(s, p), LedgerError);
}

TEST_CASE("ladder on a lone seed", "[simlab]") {
  const LoanTerms terms{1, Ppm{100'000}};
  const Amount base = 1'000'000;
  const Amount premium = protocol_premium(base, 1, break_even_rate(terms.default_prob, 1));

  SECTION("award equal to the premium nets to zero") {
    LedgerState s;
    add_seed(s, "a", base);
    const auto t = run_ladder(s, "a", {0}, terms, {});
    CHECK(t.baseline_notional == base);
    CHECK(t.defaulted_principal == base + premium);
    CHECK(t.attacker_pnl == 0);
    CHECK(verify::check_repay_then_default_bound(t).ok());
  }
  SECTION("no award loses every premium paid") {
    PricingConfig cfg;
    cfg.award_factor = Ppm{0};
    for (int rungs = 0; rungs <= 4; ++rungs) {
      LedgerState s;
      add_seed(s, "a", base);
      const auto t = run_ladder(s, "a", std::vector<Amount>(rungs, 0), terms, cfg);
      CHECK(t.attacker_pnl == -rungs * premium);
    }
  }
}

TEST_CASE("ladder sweep stays unprofitable", "[simlab]") {
  LadderParams p;
  p.configurations = 500;
  p.seed = 4;
  const auto r = repay_default_ladder(p);
  CHECK(r.summary.accepted);
  CHECK(r.summary.max <= 0);
  for (const auto& c : r.cases) REQUIRE(c.report.ok());

  const auto serial = repay_default_ladder(p, Exec::kSerial);
  CHECK(summary_to_json(serial.summary) == summary_to_json(r.summary));
}
