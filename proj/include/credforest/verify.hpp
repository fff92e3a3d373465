#pragma once

// Independent checkers and oracles. Nothing here calls the kernels or the
// solvency module: quantities are re-derived by a separate route so that a
// bug in the engine cannot hide behind the same bug in its checker.

#include <string>
#include <vector>

#include "credforest/state.hpp"

namespace credforest::verify {

struct Violation {
  std::string invariant;
  std::string locus;  // "total", "edge a -> b", "account a", ...
  Amount expected = 0;
  Amount actual = 0;

  bool operator==(const Violation&) const = default;
};

struct InvariantReport {
  std::vector<std::string> checked;
  std::vector<Violation> violations;

  bool ok() const noexcept { return violations.empty(); }
  void merge(const InvariantReport& other);

  bool operator==(const InvariantReport&) const = default;
};

/// Sum of credit limits equals seed base budgets plus earned credit, and the
/// two postings of every edge agree.
InvariantReport check_conservation(const LedgerState& state);

/// Every edge carries at least the required delegation of its child, and no
/// edge, base budget, earned credit or principal is negative.
InvariantReport check_solvency(const LedgerState& state);

/// Account cash plus protocol cash sums to zero.
InvariantReport check_cash_balance(const LedgerState& state);

/// Conservation, solvency and cash balance together.
InvariantReport check_all(const LedgerState& state);

/// `post` must be `pre` after exactly one default of `loan`. Throws
/// std::invalid_argument when the pair does not fit that shape.
InvariantReport check_default_transition(const LedgerState& pre,
                                         const LedgerState& post,
                                         const LoanId& loan);

/// Plain recursive evaluation of the required delegation of non-seed `v`.
Amount oracle_required_delegation(const LedgerState& state, AccountIndex v);

/// Same recursion for every account (0 at seeds).
std::vector<Amount> oracle_required_all(const LedgerState& state);

/// Locked delegation per path edge as the rise in the child's required
/// delegation when `principal` is added to the borrower.
std::vector<Amount> oracle_locked_delegation(const LedgerState& state,
                                             AccountIndex borrower,
                                             Amount principal);

struct LadderRung {
  Amount principal = 0;
  Amount protocol_premium = 0;
  Amount delegation_premium = 0;
  Amount earned_award = 0;
};

/// One repay-then-default execution: some loans repaid, then one default.
struct StrategyTrace {
  Amount baseline_notional = 0;  // largest loan defaultable at the start
  std::vector<LadderRung> repaid;
  Amount defaulted_principal = 0;
  Amount attacker_pnl = 0;  // cash gain relative to defaulting at the start
};

InvariantReport check_repay_then_default_bound(const StrategyTrace& trace);

}  // namespace credforest::verify
