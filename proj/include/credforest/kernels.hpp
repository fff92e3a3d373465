#pragma once

// Whole-forest kernels. Each has a serial reference implementation and an
// OpenMP implementation; both produce identical integers for any thread
// count. The dispatching entry points pick one by policy and forest size.

#include <vector>

#include "credforest/state.hpp"

namespace credforest {

enum class Exec { kSerial, kParallel };

struct CreditTotals {
  Amount credit_limits = 0;  // sum of C_u
  Amount base_budgets = 0;   // sum of seed base budgets
  Amount earned = 0;         // sum of G_u

  bool operator==(const CreditTotals&) const = default;
};

namespace kernels {

namespace serial {
/// R for every account, indexed like LedgerState::accounts; 0 for seeds.
std::vector<Amount> required_delegations(const LedgerState& state);
CreditTotals credit_totals(const LedgerState& state);
}  // namespace serial

namespace parallel {
std::vector<Amount> required_delegations(const LedgerState& state);
CreditTotals credit_totals(const LedgerState& state);
}  // namespace parallel

/// Forests smaller than this run the serial kernel under Exec::kParallel.
inline constexpr std::size_t kParallelMinAccounts = 4096;

std::vector<Amount> required_delegations(const LedgerState& state,
                                         Exec exec = Exec::kParallel);
CreditTotals credit_totals(const LedgerState& state,
                           Exec exec = Exec::kParallel);

}  // namespace kernels
}  // namespace credforest
