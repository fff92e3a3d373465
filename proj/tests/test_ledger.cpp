#include <catch2/catch_amalgamated.hpp>

#include <functional>
#include <random>

#include "credforest/ledger.hpp"
#include "credforest/verify.hpp"
#include "support/forest_fixtures.hpp"

using namespace credforest;
using credforest::testing::build_forest;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const LedgerError& e) {
    return e.code();
  }
  FAIL("expected LedgerError");
  return ErrorCode::kInvalidAmount;
}

}  // namespace

TEST_CASE("add_seed", "[ledger]") {
  LedgerState s;
  add_seed(s, "s", 100);
  CHECK(credit_limit(s, "s") == 100);

  add_seed(s, "t", 50);
  CHECK(total_credit(s) == 150);

  CHECK(code_of([&] { add_seed(s, "z", 0); }) == ErrorCode::kInvalidAmount);
  CHECK(code_of([&] { add_seed(s, "s", 10); }) == ErrorCode::kDuplicateId);
  CHECK(s.size() == 2);
}

TEST_CASE("onboard moves capacity without creating any", "[ledger]") {
  LedgerState s;
  add_seed(s, "s", 100);
  onboard(s, "s", "u", 30);
  CHECK(credit_limit(s, "s") == 70);
  CHECK(credit_limit(s, "u") == 30);
  CHECK(total_credit(s) == 100);

  SECTION("chain") {
    LedgerState c;
    add_seed(c, "s", 100);
    onboard(c, "s", "u1", 40);
    onboard(c, "u1", "u2", 20);
    // C_s = 100 - 40, C_u1 = 40 - 20, C_u2 = 20
    CHECK(credit_limit(c, "s") == 60);
    CHECK(credit_limit(c, "u1") == 20);
    CHECK(credit_limit(c, "u2") == 20);
    CHECK(total_credit(c) == 100);
  }

  SECTION("errors leave state untouched") {
    LedgerState t;
    add_seed(t, "s", 10);
    const LedgerState before = t;
    CHECK(code_of([&] { onboard(t, "s", "u", 11); }) == ErrorCode::kInsufficientCapacity);
    CHECK(code_of([&] { onboard(t, "nobody", "u", 1); }) == ErrorCode::kUnknownAccount);
    CHECK(code_of([&] { onboard(t, "s", "s", 1); }) == ErrorCode::kDuplicateId);
    CHECK(code_of([&] { onboard(t, "s", "u", 0); }) == ErrorCode::kInvalidAmount);
    CHECK(t == before);
  }

  SECTION("free capacity excludes own principal") {
    LedgerState t = build_forest({{"s", {}, 100, 0, 60}});
    CHECK(code_of([&] { onboard(t, "s", "u", 41); }) == ErrorCode::kInsufficientCapacity);
    onboard(t, "s", "u", 40);
    CHECK(credit_limit(t, "s") == 60);
  }
}

TEST_CASE("adjust_delegation", "[ledger]") {
  LedgerState s;
  add_seed(s, "s", 100);
  onboard(s, "s", "u", 30);
  adjust_delegation(s, "s", "u", 70);
  CHECK(s.account(s.require("u")).incoming == 100);
  CHECK(total_credit(s) == 100);

  LedgerState t;
  add_seed(t, "s", 100);
  onboard(t, "s", "u", 30);
  CHECK(code_of([&] { adjust_delegation(t, "s", "u", 71); }) ==
        ErrorCode::kInsufficientCapacity);
  CHECK(code_of([&] { adjust_delegation(t, "u", "s", 1); }) == ErrorCode::kNoSuchEdge);
}

TEST_CASE("revoke admits exactly new_amount >= R", "[ledger]") {
  SECTION("leaf with P=5, G=2") {
    LedgerState s = build_forest({{"s", {}, 100}, {"v", "s", 20, 2, 5}});
    LedgerState t = s;
    CHECK(code_of([&] { revoke(t, "s", "v", 2); }) == ErrorCode::kInadmissibleRevocation);
    revoke(s, "s", "v", 3);
    CHECK(s.account(s.require("v")).incoming == 3);
    CHECK(credit_limit(s, "s") == 97);
    CHECK(verify::check_all(s).ok());
  }
  SECTION("idle leaf revokes to zero and the edge persists") {
    LedgerState s;
    add_seed(s, "s", 100);
    onboard(s, "s", "v", 20);
    revoke(s, "s", "v", 0);
    CHECK(s.account(0).out.size() == 1);
    CHECK(s.account(0).out[0].amount == 0);
    CHECK(credit_limit(s, "s") == 100);
  }
  SECTION("floor includes grandchild requirement") {
    // v: P=10, G=3; w under v: P=4, G=0 -> R_w = 4, R_v = 10 + 4 - 3 = 11.
    LedgerState s = build_forest({{"s", {}, 1000}, {"v", "s", 100, 3, 10}, {"w", "v", 10, 0, 4}});
    LedgerState t = s;
    CHECK(code_of([&] { revoke(t, "s", "v", 10); }) == ErrorCode::kInadmissibleRevocation);
    revoke(s, "s", "v", 11);
    CHECK(verify::check_solvency(s).ok());
  }
  SECTION("raise attempt is the wrong operation") {
    LedgerState s;
    add_seed(s, "s", 100);
    onboard(s, "s", "v", 20);
    CHECK(code_of([&] { revoke(s, "s", "v", 21); }) == ErrorCode::kRaiseNotRevoke);
  }
}

TEST_CASE("borrow", "[ledger]") {
  SECTION("fresh chain locks the full principal") {
    LedgerState s;
    add_seed(s, "s", 100);
    onboard(s, "s", "v", 50);
    const LoanId id = borrow(s, {"v", 50, 1, Ppm{100'000}, {}});
    const Loan* loan = s.find_loan(id);
    REQUIRE(loan != nullptr);
    REQUIRE(loan->quote.locked.size() == 1);
    CHECK(loan->quote.locked[0].locked == 50);
    CHECK(s.account(1).principal == 50);
    // origination moves no capacity
    CHECK(s.account(1).incoming == 50);
    CHECK(total_credit(s) == 100);
  }
  SECTION("buffers reduce the locked amounts") {
    // s -> u1 (G=4) -> v (G=0): b_u1 = 4, b_v = 0, so m = (6, 10).
    LedgerState s = build_forest({{"s", {}, 100}, {"u1", "s", 40, 4}, {"v", "u1", 20}});
    const LoanId id = borrow(s, {"v", 10, 1, Ppm{100'000}, {}});
    const auto& locked = s.find_loan(id)->quote.locked;
    REQUIRE(locked.size() == 2);
    CHECK(locked[0].sponsor == "s");
    CHECK(locked[0].locked == 6);
    CHECK(locked[1].sponsor == "u1");
    CHECK(locked[1].locked == 10);
  }
  SECTION("rejections") {
    LedgerState s;
    add_seed(s, "s", 100);
    onboard(s, "s", "v", 50);
    const LedgerState before = s;
    CHECK(code_of([&] { borrow(s, {"v", 51, 1, Ppm{100'000}, {}}); }) ==
          ErrorCode::kExceedsCreditLimit);
    CHECK(code_of([&] { borrow(s, {"v", 0, 1, Ppm{100'000}, {}}); }) ==
          ErrorCode::kInvalidAmount);
    CHECK(code_of([&] { borrow(s, {"v", 5, 0, Ppm{100'000}, {}}); }) == ErrorCode::kInvalidTerm);
    CHECK(code_of([&] { borrow(s, {"v", 5, 1, Ppm{0}, {}}); }) ==
          ErrorCode::kInvalidProbability);
    CHECK(code_of([&] { borrow(s, {"v", 5, 1, Ppm{1'000'000}, {}}); }) ==
          ErrorCode::kInvalidProbability);
    CHECK(s == before);
    borrow(s, {"v", 5, 1, Ppm{100'000}, {}});
    CHECK(code_of([&] { borrow(s, {"v", 5, 1, Ppm{100'000}, {}}); }) ==
          ErrorCode::kActiveLoanExists);
  }
  SECTION("slack form rejects a loan the gross edge would admit") {
    // u was revoked down to R_u = 4 after delegating 10 to v and 4 to w, so
    // edge s->u has slack 10 - 4 = 6 while v still has a credit limit of 10.
    LedgerState s = build_forest(
        {{"s", {}, 100}, {"u", "s", 10}, {"w", "u", 4, 0, 4}, {"v", "u", 10}});
    const LedgerState before = s;
    CHECK(code_of([&] { borrow(s, {"v", 7, 1, Ppm{100'000}, {}}); }) ==
          ErrorCode::kPathInfeasible);
    CHECK(s == before);
    CHECK_NOTHROW(borrow(s, {"v", 6, 1, Ppm{100'000}, {}}));
  }
  SECTION("earned credit at the sponsor shrinks the lock") {
    LedgerState s = build_forest(
        {{"s", {}, 100}, {"u", "s", 10, 20}, {"w", "u", 4, 0, 4}, {"v", "u", 0}});
    // R_u = max(0, 4 - 20) = 0 and b_u = 16: borrowing 20 at u locks 4.
    const LoanId id = borrow(s, {"u", 20, 1, Ppm{100'000}, {}});
    REQUIRE(s.find_loan(id)->quote.locked.size() == 1);
    CHECK(s.find_loan(id)->quote.locked[0].locked == 20 - (20 - 4));
  }
}

TEST_CASE("repay awards capped earned credit and settles cash", "[ledger]") {
  LedgerState s;
  add_seed(s, "s", 1'000'000);
  onboard(s, "s", "u", 500'000);
  onboard(s, "u", "v", 100'000);
  const Amount before = total_credit(s);
  const LoanId id = borrow(s, {"v", 100'000, 2, Ppm{50'000}, {}});
  const PricingQuote q = s.find_loan(id)->quote;
  REQUIRE(q.protocol_premium > 0);
  CHECK(q.earned_award == q.protocol_premium);
  Amount payouts = 0;
  for (const auto& e : q.locked) payouts += e.payout;
  CHECK(q.delegation_premium == payouts);

  repay(s, id);
  CHECK(total_credit(s) == before + q.earned_award);
  CHECK(s.account(2).earned == q.earned_award);
  CHECK(s.account(2).principal == 0);
  CHECK(s.account(2).cash == -(q.protocol_premium + q.delegation_premium));
  CHECK(s.protocol_cash == q.protocol_premium);
  CHECK(s.account(0).cash == q.locked[0].payout);
  CHECK(s.account(1).cash == q.locked[1].payout);
  CHECK(s.find_loan(id)->status == LoanStatus::kRepaid);
  CHECK(verify::check_all(s).ok());

  CHECK_THROWS_AS(repay(s, id), LedgerError);

  SECTION("zero award factor") {
    LedgerState t;
    add_seed(t, "s", 1000);
    PricingConfig cfg;
    cfg.award_factor = Ppm{0};
    const LoanId l = borrow(t, {"s", 100, 1, Ppm{100'000}, {}}, cfg);
    const Amount total = total_credit(t);
    repay(t, l);
    CHECK(total_credit(t) == total);
  }
}

TEST_CASE("default walks the sponsor path", "[ledger]") {
  SECTION("borrower earned credit absorbs everything") {
    LedgerState s = build_forest({{"s", {}, 100}, {"u", "s", 50, 12, 10}});
    const LedgerState pre = s;
    const DefaultTrace t = default_loan(s, "loan-u");
    CHECK(t.borrower_absorbed == 10);
    CHECK(t.steps.empty());
    CHECK(s.account(1).earned == 2);
    CHECK(s.account(1).incoming == 50);
    CHECK(verify::check_default_transition(pre, s, "loan-u").ok());
  }

  SECTION("worked three-node chain") {
    LedgerState s = build_forest(
        {{"s", {}, 100}, {"u1", "s", 40, 5}, {"u2", "u1", 20, 3, 10}});
    CHECK(total_credit(s) == 108);

    // Straight-line evaluation of the loss walk:
    // A_u2 = min(3, 10) = 3, G_u2 = 0, l = 7
    // edge u1->u2 = 20 - 7 = 13, A_u1 = min(5, 7) = 5, G_u1 = 0, l = 2
    // edge s->u1 = 40 - 2 = 38, A_s = min(0, 2) = 0, l = 2, base_s = 98
    const Amount edge_u1_u2 = 20 - (10 - 3);
    const Amount edge_s_u1 = 40 - (10 - 3 - 5);
    const Amount base_s = 100 - (10 - 3 - 5);

    const LedgerState pre = s;
    const DefaultTrace t = default_loan(s, "loan-u2");
    CHECK(s.account(2).incoming == edge_u1_u2);
    CHECK(s.account(1).out[0].amount == edge_u1_u2);
    CHECK(s.account(1).earned == 0);
    CHECK(s.account(1).incoming == edge_s_u1);
    CHECK(s.account(0).base_budget == base_s);
    CHECK(total_credit(s) == 98);
    CHECK(credit_limit(s, "s") == 60);
    CHECK(credit_limit(s, "u1") == 25);
    CHECK(t.seed_charge == 2);
    REQUIRE(t.steps.size() == 2);
    CHECK(t.steps[0].loss == 7);
    CHECK(t.steps[1].loss == 2);
    CHECK(verify::check_default_transition(pre, s, "loan-u2").ok());
    CHECK(verify::check_all(s).ok());
  }

  SECTION("same chain, borrower without earned credit") {
    LedgerState s = build_forest(
        {{"s", {}, 100}, {"u1", "s", 40, 5}, {"u2", "u1", 20, 0, 10}});
    default_loan(s, "loan-u2");
    CHECK(s.account(2).incoming == 10);
    CHECK(s.account(1).earned == 0);
    CHECK(s.account(1).incoming == 35);
    CHECK(s.account(0).base_budget == 95);
  }

  SECTION("seed borrower charges its own base") {
    LedgerState s = build_forest({{"s", {}, 100, 4, 30}});
    default_loan(s, "loan-s");
    CHECK(s.account(0).earned == 0);
    CHECK(s.account(0).base_budget == 74);
    CHECK(s.protocol_cash == -30);
    CHECK(s.account(0).cash == 30);
  }

  SECTION("only active loans default") {
    LedgerState s = build_forest({{"s", {}, 100, 0, 30}});
    default_loan(s, "loan-s");
    CHECK_THROWS_AS(default_loan(s, "loan-s"), LedgerError);
    CHECK_THROWS_AS(default_loan(s, "nope"), LedgerError);
  }
}

TEST_CASE("credit_limit formula", "[ledger]") {
  LedgerState s = build_forest({{"s", {}, 100}, {"a", "s", 30}});
  CHECK(credit_limit(s, "s") == 70);

  LedgerState t = build_forest({{"s", {}, 100}, {"v", "s", 20, 3}});
  CHECK(credit_limit(t, "v") == 23);

  LedgerState w = build_forest({{"s", {}, 100}, {"v", "s", 50, 10}, {"c", "v", 50}});
  CHECK(credit_limit(w, "v") == 10);

  CHECK_THROWS_AS(credit_limit(w, "nobody"), LedgerError);
}

TEST_CASE("revocation can leave an over-delegated account that cannot act", "[ledger]") {
  // v delegated 40 of its 50 to c; revoking s->v down to R_v = 0 leaves
  // C_v = 0 + 0 - 40 < 0.
  LedgerState s;
  add_seed(s, "s", 100);
  onboard(s, "s", "v", 50);
  onboard(s, "v", "c", 40);
  revoke(s, "s", "v", 0);
  const Account& v = s.account(s.require("v"));
  CHECK(over_delegated(v));
  CHECK(v.credit_limit() == -40);
  CHECK(verify::check_all(s).ok());
  CHECK(code_of([&] { borrow(s, {"v", 1, 1, Ppm{100'000}, {}}); }) ==
        ErrorCode::kExceedsCreditLimit);
  CHECK(code_of([&] { onboard(s, "v", "d", 1); }) == ErrorCode::kInsufficientCapacity);
  CHECK(total_credit(s) == 100);
}

TEST_CASE("splitting a delegation across pseudonyms never adds capacity", "[ledger][property]") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 500; ++trial) {
    credforest::testing::RandomLedger driver(rng(), 30);
    for (int i = 0; i < 40; ++i) driver.step();
    LedgerState& base = driver.state();
    // pick an account with free capacity
    std::optional<AccountIndex> u;
    for (AccountIndex i = 0; i < base.size(); ++i)
      if (base.account(i).free_capacity() >= 16) u = i;
    if (!u) continue;
    const Amount total = base.account(*u).free_capacity() / 2;
    const AccountId id = base.account(*u).id;

    LedgerState one = base;
    onboard(one, id, "single", total);

    LedgerState many = base;
    const auto k = static_cast<Amount>(std::uniform_int_distribution<int>(2, 8)(rng));
    Amount left = total;
    for (Amount j = 0; j < k; ++j) {
      const Amount part = j + 1 == k ? left : std::max<Amount>(1, left / (k - j));
      onboard(many, id, "p" + std::to_string(j), part);
      left -= part;
    }
    REQUIRE(total_credit(one) == total_credit(base));
    REQUIRE(total_credit(many) == total_credit(base));
    REQUIRE(credit_limit(many, id) == credit_limit(one, id));
  }
}

TEST_CASE("default touches only the sponsor path", "[ledger][property]") {
  std::mt19937_64 rng(11);
  int defaults = 0;
  for (int trial = 0; trial < 300; ++trial) {
    credforest::testing::RandomLedger driver(rng(), 60);
    for (int i = 0; i < 80; ++i) driver.step();
    const auto loans = driver.active_loans();
    if (loans.empty()) continue;
    LedgerState post = driver.state();
    const LoanId& id = loans[rng() % loans.size()];
    const LedgerState pre = post;
    const DefaultTrace trace = default_loan(post, id);
    const auto report = verify::check_default_transition(pre, post, id);
    INFO(trial);
    REQUIRE(report.ok());
    // residual loss never grows along the path
    Amount prev = trace.principal - trace.borrower_absorbed;
    for (const auto& step : trace.steps) {
      REQUIRE(step.loss <= prev);
      prev = step.loss - step.absorbed;
    }
    ++defaults;
  }
  CHECK(defaults > 100);
}
