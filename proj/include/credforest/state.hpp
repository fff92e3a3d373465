#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "credforest/types.hpp"

namespace credforest {

enum class AccountKind { kSeed, kNonSeed };

/// One outgoing delegation edge as posted on the sponsor's side.
struct Delegation {
  AccountIndex child = 0;
  Amount amount = 0;

  bool operator==(const Delegation&) const = default;
};

/// A user of the credit network.
///
/// Every delegation edge is posted twice: once in the sponsor's `out` list
/// and once as the child's `incoming`. Ledger operations always move both
/// postings together; the conservation check in verify reports an edge whose
/// two postings disagree.
struct Account {
  AccountId id;
  AccountKind kind = AccountKind::kNonSeed;
  std::optional<AccountIndex> sponsor;  // absent iff seed
  Amount base_budget = 0;               // seeds only
  Amount incoming = 0;                  // non-seeds only
  Amount earned = 0;
  Amount principal = 0;
  std::vector<Delegation> out;  // onboarding order; revoked-to-zero edges stay
  Amount cash = 0;              // premium and loss bookkeeping, not capacity
  std::optional<LoanId> active_loan;

  bool is_seed() const noexcept { return kind == AccountKind::kSeed; }

  Amount out_total() const noexcept {
    Amount total = 0;
    for (const auto& d : out) total += d.amount;
    return total;
  }

  /// Base budget plus earned credit for seeds, incoming delegation plus
  /// earned credit otherwise.
  Amount budget() const noexcept {
    return (is_seed() ? base_budget : incoming) + earned;
  }

  /// Budget not delegated away. Negative only after an external contraction
  /// (the account is then "over-delegated").
  Amount credit_limit() const noexcept { return budget() - out_total(); }

  /// Capacity available for new delegation: credit limit less own principal.
  Amount free_capacity() const noexcept { return credit_limit() - principal; }

  const Delegation* find_out(AccountIndex child) const noexcept {
    for (const auto& d : out)
      if (d.child == child) return &d;
    return nullptr;
  }
  Delegation* find_out(AccountIndex child) noexcept {
    for (auto& d : out)
      if (d.child == child) return &d;
    return nullptr;
  }

  bool operator==(const Account&) const = default;
};

struct LockedEdge {
  AccountId sponsor;
  Amount locked = 0;  // m_k
  Amount payout = 0;  // pi_k

  bool operator==(const LockedEdge&) const = default;
};

/// Premium breakdown for a proposed loan, computed from the state as it was
/// immediately before origination and frozen on the loan.
struct PricingQuote {
  Ppm protocol_rate;
  Amount protocol_premium = 0;
  Ppm utilization;
  Ppm delegation_rate;
  std::vector<LockedEdge> locked;  // seed-side edge first
  Amount delegation_premium = 0;   // == sum of payouts
  Amount earned_award = 0;         // <= protocol_premium

  Amount total_interest() const noexcept {
    return protocol_premium + delegation_premium;
  }

  bool operator==(const PricingQuote&) const = default;
};

enum class LoanStatus { kActive, kRepaid, kDefaulted };

struct Loan {
  LoanId id;
  AccountId borrower;
  Amount principal = 0;
  std::int64_t term = 0;
  Ppm default_prob;
  PricingQuote quote;
  LoanStatus status = LoanStatus::kActive;

  bool operator==(const Loan&) const = default;
};

/// The whole sponsor forest with its loans and cash ledgers. A plain value:
/// copies are independent snapshots.
class LedgerState {
 public:
  const std::vector<Account>& accounts() const noexcept { return accounts_; }
  const std::vector<Loan>& loans() const noexcept { return loans_; }

  std::size_t size() const noexcept { return accounts_.size(); }

  const Account& account(AccountIndex i) const { return accounts_.at(i); }
  Account& account(AccountIndex i) { return accounts_.at(i); }

  std::optional<AccountIndex> find(std::string_view id) const;
  /// Throws LedgerError(kUnknownAccount).
  AccountIndex require(std::string_view id) const;

  const Loan* find_loan(std::string_view id) const;
  Loan* find_loan(std::string_view id);

  /// Appends an account. The caller guarantees that the id is unused and
  /// that any sponsor index refers to an existing account.
  AccountIndex push_account(Account account);
  void push_loan(Loan loan);

  std::uint64_t event_counter = 0;
  Amount protocol_cash = 0;

  bool operator==(const LedgerState& other) const {
    return accounts_ == other.accounts_ && loans_ == other.loans_ &&
           event_counter == other.event_counter &&
           protocol_cash == other.protocol_cash;
  }

 private:
  std::vector<Account> accounts_;
  std::vector<Loan> loans_;
  std::unordered_map<std::string, AccountIndex> account_index_;
  std::unordered_map<std::string, std::size_t> loan_index_;
};

const char* to_string(AccountKind kind);
const char* to_string(LoanStatus status);

}  // namespace credforest
