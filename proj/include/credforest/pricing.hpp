#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "credforest/solvency.hpp"
#include "credforest/state.hpp"

namespace credforest {

/// Engine pricing configuration.
struct PricingConfig {
  /// Delegation premium rate at zero seed utilization.
  Ppm max_delegation_rate{80'000};
  /// Earned-credit award factor per period. Absent: the award equals the
  /// protocol premium.
  std::optional<Ppm> award_factor;
  /// Protocol premium rate. Absent: the break-even rate for the loan.
  std::optional<Ppm> protocol_rate;
};

/// Exact rational rate num/den (a fraction of one, per period).
struct RationalRate {
  std::int64_t num = 0;
  std::int64_t den = 1;
};

/// D / ((1 - D) T) as an exact fraction.
RationalRate break_even_rate_exact(Ppm default_prob, std::int64_t term);

/// D / ((1 - D) T) rounded half-to-even to ppm. Throws LedgerError on
/// D outside (0, 1) or term < 1.
Ppm break_even_rate(Ppm default_prob, std::int64_t term);

/// round-half-even(rate * principal * term / 1e6)
Amount protocol_premium(Amount principal, std::int64_t term, Ppm rate);

/// Seed delegations over seed budgets. Throws LedgerError(kZeroSeedBudget)
/// when the seeds hold no budget.
Ppm seed_utilization(const LedgerState& state);

/// max_rate * (1 - utilization).
Ppm delegation_rate(Ppm utilization, Ppm max_rate);

struct SponsorPayout {
  AccountIndex sponsor = 0;
  Amount payout = 0;
};

/// Per-edge payouts for the locked amounts along `path`.
std::vector<SponsorPayout> sponsor_payouts(const PathView& path,
                                           const std::vector<Amount>& locked,
                                           Ppm rate, std::int64_t term);

/// min(round(factor * principal * term / 1e6), protocol_premium).
Amount earned_credit_award(Amount principal, std::int64_t term,
                           Amount protocol_premium,
                           const std::optional<Ppm>& factor);

/// Full quote for a proposed loan against a snapshot. Does not check
/// feasibility; the caller does.
PricingQuote quote_loan(const LedgerState& state, AccountIndex borrower,
                        Amount principal, std::int64_t term, Ppm default_prob,
                        const PricingConfig& config = {});

}  // namespace credforest
