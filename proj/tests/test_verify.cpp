#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <stdexcept>

#include "credforest/ledger.hpp"
#include "credforest/verify.hpp"
#include "support/forest_fixtures.hpp"

using namespace credforest;
using credforest::testing::build_forest;
namespace v = credforest::verify;

TEST_CASE("conservation telescopes along a chain", "[verify]") {
  LedgerState s;
  add_seed(s, "s", 1000);
  Amount edge = 900;
  AccountId prev = "s";
  for (int i = 1; i <= 5; ++i) {
    const AccountId id = "a" + std::to_string(i);
    onboard(s, prev, id, edge);
    prev = id;
    edge -= 150;
  }
  // limits 100, 150, 150, 150, 150, 300 add back to the seed base
  Amount sum = 0;
  for (const Account& a : s.accounts()) sum += a.budget() - a.out_total();
  CHECK(sum == 1000);
  CHECK(v::check_conservation(s).ok());
}

TEST_CASE("conservation reports a one-sided edge posting", "[verify]") {
  LedgerState s;
  add_seed(s, "s", 100);
  onboard(s, "s", "a", 40);
  onboard(s, "a", "b", 10);
  REQUIRE(v::check_all(s).ok());

  LedgerState broken = s;
  broken.account(2).incoming += 1;
  const auto r = v::check_conservation(broken);
  REQUIRE(r.violations.size() == 2);
  CHECK(r.violations[0].locus == "edge a -> b");
  CHECK(r.violations[0].expected == 10);
  CHECK(r.violations[0].actual == 11);
  CHECK(r.violations[1].locus == "total");
  CHECK(r.violations[1].expected == 100);
  CHECK(r.violations[1].actual == 101);

  // Moving both postings together is a transfer, not a violation.
  LedgerState both = s;
  both.account(2).incoming += 1;
  both.account(1).out[0].amount += 1;
  CHECK(v::check_conservation(both).ok());
}

TEST_CASE("solvency reports an edge below its requirement", "[verify]") {
  LedgerState s = build_forest({{"s", {}, 100}, {"a", "s", 10, 0, 10}});
  CHECK(v::check_solvency(s).ok());
  s.account(1).principal = 11;
  const auto r = v::check_solvency(s);
  REQUIRE(r.violations.size() == 1);
  CHECK(r.violations[0].locus == "edge s -> a");
  CHECK(r.violations[0].expected == 11);
  CHECK(r.violations[0].actual == 10);

  LedgerState neg = build_forest({{"s", {}, 100}});
  neg.account(0).base_budget = -1;
  CHECK_FALSE(v::check_solvency(neg).ok());
}

TEST_CASE("cash balance", "[verify]") {
  LedgerState s = build_forest({{"s", {}, 100}});
  s.account(0).cash = 5;
  CHECK_FALSE(v::check_cash_balance(s).ok());
  s.protocol_cash = -5;
  CHECK(v::check_cash_balance(s).ok());
}

TEST_CASE("oracle required delegation", "[verify]") {
  LedgerState s = build_forest(
      {{"s", {}, 1000}, {"v", "s", 100, 3, 10}, {"w", "v", 10, 0, 4}, {"x", "v", 10, 9, 2}});
  CHECK(v::oracle_required_delegation(s, 3) == 0);
  CHECK(v::oracle_required_delegation(s, 2) == 4);
  CHECK(v::oracle_required_delegation(s, 1) == 11);
  CHECK(v::oracle_required_all(s) == std::vector<Amount>{0, 11, 4, 0});
  CHECK_THROWS_AS(v::oracle_required_delegation(s, 0), std::invalid_argument);
}

TEST_CASE("default transition checks", "[verify]") {
  const LedgerState pre = build_forest({{"s", {}, 100},
                                        {"u1", "s", 40, 5},
                                        {"u2", "u1", 20, 3, 10},
                                        {"side", "s", 10, 1}});
  LedgerState post = pre;
  default_loan(post, "loan-u2");
  const auto ok = v::check_default_transition(pre, post, "loan-u2");
  CHECK(ok.ok());
  CHECK(ok.checked.size() == 5);

  SECTION("off-path change") {
    LedgerState bad = post;
    bad.account(3).earned += 1;
    const auto r = v::check_default_transition(pre, bad, "loan-u2");
    REQUIRE_FALSE(r.ok());
    CHECK(r.violations[0].invariant == "off_path_unchanged");
  }
  SECTION("intermediate limit moved") {
    LedgerState bad = post;
    bad.account(1).earned += 1;
    bool seen = false;
    for (const auto& viol : v::check_default_transition(pre, bad, "loan-u2").violations)
      seen |= viol.invariant == "path_limits_kept";
    CHECK(seen);
  }
  SECTION("not a default") {
    CHECK_THROWS_AS(v::check_default_transition(pre, pre, "loan-u2"), std::invalid_argument);
    CHECK_THROWS_AS(v::check_default_transition(pre, post, "nope"), std::invalid_argument);
  }
}

TEST_CASE("repay-then-default bound", "[verify]") {
  v::StrategyTrace t;
  t.baseline_notional = 100;
  t.repaid = {{100, 10, 2, 10}, {100, 10, 0, 6}};
  t.defaulted_principal = 104;  // awards added 16; only part of it is taken
  t.attacker_pnl = 104 - 100 - 22;
  auto r = v::check_repay_then_default_bound(t);
  CHECK(r.ok());

  t.attacker_pnl += 1;
  r = v::check_repay_then_default_bound(t);
  REQUIRE(r.violations.size() == 1);
  CHECK(r.violations[0].invariant == "cash_accounting");

  v::StrategyTrace capped;
  capped.baseline_notional = 100;
  capped.repaid = {{100, 10, 0, 11}};
  capped.defaulted_principal = 111;
  capped.attacker_pnl = 1;
  r = v::check_repay_then_default_bound(capped);
  bool award = false;
  bool weak = false;
  for (const auto& viol : r.violations) {
    award |= viol.invariant == "award_cap";
    weak |= viol.invariant == "weakly_unprofitable";
  }
  CHECK(award);
  CHECK(weak);
}
