#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace credforest {

/// Monetary quantity in minor currency units. Every capacity, principal,
/// premium and payout in ledger state is a whole number of minor units.
/// Stored signed so that credit limits and cash balances share the type;
/// state quantities other than credit limits and cash are never negative.
using Amount = std::int64_t;

using AccountId = std::string;
using LoanId = std::string;

/// Position of an account in LedgerState::accounts. A sponsor always has a
/// smaller index than every account it sponsors.
using AccountIndex = std::size_t;

inline constexpr std::int64_t kPpmScale = 1'000'000;

/// Parts-per-million quantity: per-period rates, utilization fractions and
/// default probabilities.
struct Ppm {
  std::int64_t value = 0;

  constexpr auto operator<=>(const Ppm&) const = default;
};

enum class ErrorCode {
  kDuplicateId,
  kUnknownAccount,
  kUnknownLoan,
  kInvalidAmount,
  kInsufficientCapacity,
  kNoSuchEdge,
  kRaiseNotRevoke,
  kInadmissibleRevocation,
  kActiveLoanExists,
  kExceedsCreditLimit,
  kPathInfeasible,
  kLoanNotActive,
  kInvalidTerm,
  kInvalidProbability,
  kSeedHasNoRequirement,
  kZeroSeedBudget,
};

const char* to_string(ErrorCode code);

/// Rejected request: a precondition of a ledger operation did not hold.
/// The state is left untouched.
class LedgerError : public std::runtime_error {
 public:
  LedgerError(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Engine defect: an internal invariant failed (negative edge, overdrawn
/// base budget, corrupted forest). Never raised for well-formed input.
class InvariantFault : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace credforest
