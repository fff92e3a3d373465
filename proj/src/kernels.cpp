#include "credforest/kernels.hpp"

#include <algorithm>

namespace credforest::kernels {

namespace serial {

// Sponsors precede their children in the account vector, so a reverse sweep
// visits every child before its sponsor.
std::vector<Amount> required_delegations(const LedgerState& state) {
  const auto& accounts = state.accounts();
  const std::size_t n = accounts.size();
  std::vector<Amount> required(n, 0);
  std::vector<Amount> child_sum(n, 0);
  for (std::size_t i = n; i-- > 0;) {
    const Account& a = accounts[i];
    if (a.is_seed()) continue;
    required[i] = std::max<Amount>(0, a.principal + child_sum[i] - a.earned);
    child_sum[*a.sponsor] += required[i];
  }
  return required;
}

CreditTotals credit_totals(const LedgerState& state) {
  CreditTotals totals;
  for (const Account& a : state.accounts()) {
    totals.credit_limits += a.credit_limit();
    if (a.is_seed()) totals.base_budgets += a.base_budget;
    totals.earned += a.earned;
  }
  return totals;
}

}  // namespace serial

namespace parallel {

// Level-synchronous: bucket accounts by depth, then resolve the deepest
// level first. Within a level every node only reads its children's values.
std::vector<Amount> required_delegations(const LedgerState& state) {
  const auto& accounts = state.accounts();
  const std::size_t n = accounts.size();
  std::vector<std::size_t> depth(n, 0);
  std::size_t max_depth = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!accounts[i].is_seed()) depth[i] = depth[*accounts[i].sponsor] + 1;
    max_depth = std::max(max_depth, depth[i]);
  }
  std::vector<std::vector<AccountIndex>> levels(max_depth + 1);
  for (std::size_t i = 0; i < n; ++i) levels[depth[i]].push_back(i);

  std::vector<Amount> required(n, 0);
  for (std::size_t d = max_depth; d >= 1; --d) {
    const auto& level = levels[d];
    const auto count = static_cast<std::ptrdiff_t>(level.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t j = 0; j < count; ++j) {
      const AccountIndex i = level[static_cast<std::size_t>(j)];
      const Account& a = accounts[i];
      Amount child_sum = 0;
      for (const Delegation& e : a.out) child_sum += required[e.child];
      required[i] = std::max<Amount>(0, a.principal + child_sum - a.earned);
    }
  }
  return required;
}

CreditTotals credit_totals(const LedgerState& state) {
  const auto& accounts = state.accounts();
  const auto n = static_cast<std::ptrdiff_t>(accounts.size());
  Amount limits = 0;
  Amount base = 0;
  Amount earned = 0;
#pragma omp parallel for schedule(static) reduction(+ : limits, base, earned)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const Account& a = accounts[static_cast<std::size_t>(i)];
    limits += a.credit_limit();
    if (a.is_seed()) base += a.base_budget;
    earned += a.earned;
  }
  return {limits, base, earned};
}

}  // namespace parallel

std::vector<Amount> required_delegations(const LedgerState& state, Exec exec) {
  if (exec == Exec::kParallel && state.size() >= kParallelMinAccounts)
    return parallel::required_delegations(state);
  return serial::required_delegations(state);
}

CreditTotals credit_totals(const LedgerState& state, Exec exec) {
  if (exec == Exec::kParallel && state.size() >= kParallelMinAccounts)
    return parallel::credit_totals(state);
  return serial::credit_totals(state);
}

}  // namespace credforest::kernels
