#include "credforest/pricing.hpp"

#include <algorithm>
#include <string>

#include "credforest/kernels.hpp"
#include "credforest/rounding.hpp"

namespace credforest {

namespace {

void validate_terms(Ppm default_prob, std::int64_t term) {
  if (default_prob.value <= 0 || default_prob.value >= kPpmScale)
    throw LedgerError(ErrorCode::kInvalidProbability,
                      "default probability must lie strictly between 0 and "
                      "1000000 ppm, got " +
                          std::to_string(default_prob.value));
  if (term < 1)
    throw LedgerError(ErrorCode::kInvalidTerm,
                      "term must be at least one period, got " +
                          std::to_string(term));
}

}  // namespace

RationalRate break_even_rate_exact(Ppm default_prob, std::int64_t term) {
  validate_terms(default_prob, term);
  return {default_prob.value, (kPpmScale - default_prob.value) * term};
}

Ppm break_even_rate(Ppm default_prob, std::int64_t term) {
  const RationalRate r = break_even_rate_exact(default_prob, term);
  return Ppm{static_cast<std::int64_t>(
      div_round_half_even(static_cast<Wide>(r.num) * kPpmScale, r.den))};
}

Amount protocol_premium(Amount principal, std::int64_t term, Ppm rate) {
  return scale_by_ppm(rate, principal, term);
}

Ppm seed_utilization(const LedgerState& state) {
  Amount delegated = 0;
  Amount budgets = 0;
  for (const Account& a : state.accounts()) {
    if (!a.is_seed()) continue;
    delegated += a.out_total();
    budgets += a.budget();
  }
  if (budgets <= 0)
    throw LedgerError(ErrorCode::kZeroSeedBudget, "seeds hold no budget");
  const auto u = static_cast<std::int64_t>(
      div_round_half_even(static_cast<Wide>(delegated) * kPpmScale, budgets));
  if (u < 0 || u > kPpmScale)
    throw InvariantFault("seed utilization out of range: " + std::to_string(u));
  return Ppm{u};
}

Ppm delegation_rate(Ppm utilization, Ppm max_rate) {
  return Ppm{static_cast<std::int64_t>(div_round_half_even(
      static_cast<Wide>(max_rate.value) * (kPpmScale - utilization.value),
      kPpmScale))};
}

std::vector<SponsorPayout> sponsor_payouts(const PathView& path,
                                           const std::vector<Amount>& locked,
                                           Ppm rate, std::int64_t term) {
  std::vector<SponsorPayout> payouts;
  payouts.reserve(locked.size());
  for (std::size_t k = 0; k < locked.size(); ++k)
    payouts.push_back({path.nodes[k], scale_by_ppm(rate, locked[k], term)});
  return payouts;
}

Amount earned_credit_award(Amount principal, std::int64_t term,
                           Amount protocol_premium,
                           const std::optional<Ppm>& factor) {
  if (!factor) return protocol_premium;
  return std::min(scale_by_ppm(*factor, principal, term), protocol_premium);
}

PricingQuote quote_loan(const LedgerState& state, AccountIndex borrower,
                        Amount principal, std::int64_t term, Ppm default_prob,
                        const PricingConfig& config) {
  validate_terms(default_prob, term);

  PricingQuote q;
  q.protocol_rate = config.protocol_rate.value_or(
      break_even_rate(default_prob, term));
  q.protocol_premium = protocol_premium(principal, term, q.protocol_rate);
  q.utilization = seed_utilization(state);
  q.delegation_rate = delegation_rate(q.utilization, config.max_delegation_rate);

  const auto required = kernels::required_delegations(state);
  const PathView path = path_to_seed(state, borrower);
  const auto locked =
      locked_delegations(downstream_buffers(state, required, path), principal);
  const auto payouts = sponsor_payouts(path, locked, q.delegation_rate, term);
  for (std::size_t k = 0; k < payouts.size(); ++k) {
    q.locked.push_back(
        {state.account(payouts[k].sponsor).id, locked[k], payouts[k].payout});
    q.delegation_premium += payouts[k].payout;
  }
  q.earned_award = earned_credit_award(principal, term, q.protocol_premium,
                                       config.award_factor);
  return q;
}

}  // namespace credforest
