#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "credforest/pricing.hpp"
#include "credforest/state.hpp"

namespace credforest {

// Every operation validates all preconditions before touching the state, so
// a thrown LedgerError leaves the state unchanged. InvariantFault signals an
// engine defect and may leave the state partially updated.

void add_seed(LedgerState& state, const AccountId& id, Amount base);

void onboard(LedgerState& state, const AccountId& sponsor, const AccountId& id,
             Amount amount);

/// Tops up an existing edge by `delta`.
void adjust_delegation(LedgerState& state, const AccountId& from,
                       const AccountId& to, Amount delta);

/// Lowers the edge from->to to `new_amount`. Admissible iff
/// new_amount >= R(to).
void revoke(LedgerState& state, const AccountId& from, const AccountId& to,
            Amount new_amount);

struct BorrowRequest {
  AccountId borrower;
  Amount principal = 0;
  std::int64_t term = 0;
  Ppm default_prob;
  std::optional<LoanId> loan_id;  // generated as "L<n>" when absent
};

/// Originates a loan. The quote is computed from the state before any
/// mutation and frozen on the loan.
LoanId borrow(LedgerState& state, const BorrowRequest& request,
              const PricingConfig& config = {});

void repay(LedgerState& state, const LoanId& loan_id);

/// One iteration of the loss walk: the residual `loss` arriving at `child`
/// is charged to the edge sponsor->child.
struct LossStep {
  AccountIndex child = 0;
  AccountIndex sponsor = 0;
  Amount loss = 0;      // residual on entering the step
  Amount absorbed = 0;  // sponsor earned credit burned
};

struct DefaultTrace {
  AccountIndex borrower = 0;
  Amount principal = 0;
  Amount borrower_absorbed = 0;
  std::vector<LossStep> steps;
  AccountIndex seed = 0;
  Amount seed_charge = 0;  // taken from the seed's base budget
};

DefaultTrace default_loan(LedgerState& state, const LoanId& loan_id);

Amount credit_limit(const LedgerState& state, const AccountId& id);

/// Sum of all credit limits.
Amount total_credit(const LedgerState& state);

/// Credit limit below zero: budget no longer covers outgoing delegations.
bool over_delegated(const Account& account);

}  // namespace credforest
