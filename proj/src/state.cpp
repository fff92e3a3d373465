#include "credforest/state.hpp"

#include <string>

namespace credforest {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDuplicateId: return "duplicate_id";
    case ErrorCode::kUnknownAccount: return "unknown_account";
    case ErrorCode::kUnknownLoan: return "unknown_loan";
    case ErrorCode::kInvalidAmount: return "invalid_amount";
    case ErrorCode::kInsufficientCapacity: return "insufficient_capacity";
    case ErrorCode::kNoSuchEdge: return "no_such_edge";
    case ErrorCode::kRaiseNotRevoke: return "raise_not_revoke";
    case ErrorCode::kInadmissibleRevocation: return "inadmissible_revocation";
    case ErrorCode::kActiveLoanExists: return "active_loan_exists";
    case ErrorCode::kExceedsCreditLimit: return "exceeds_credit_limit";
    case ErrorCode::kPathInfeasible: return "path_infeasible";
    case ErrorCode::kLoanNotActive: return "loan_not_active";
    case ErrorCode::kInvalidTerm: return "invalid_term";
    case ErrorCode::kInvalidProbability: return "invalid_probability";
    case ErrorCode::kSeedHasNoRequirement: return "seed_has_no_requirement";
    case ErrorCode::kZeroSeedBudget: return "zero_seed_budget";
  }
  return "unknown";
}

const char* to_string(AccountKind kind) {
  return kind == AccountKind::kSeed ? "seed" : "non-seed";
}

const char* to_string(LoanStatus status) {
  switch (status) {
    case LoanStatus::kActive: return "active";
    case LoanStatus::kRepaid: return "repaid";
    case LoanStatus::kDefaulted: return "defaulted";
  }
  return "unknown";
}

std::optional<AccountIndex> LedgerState::find(std::string_view id) const {
  auto it = account_index_.find(std::string(id));
  if (it == account_index_.end()) return std::nullopt;
  return it->second;
}

AccountIndex LedgerState::require(std::string_view id) const {
  if (auto i = find(id)) return *i;
  throw LedgerError(ErrorCode::kUnknownAccount,
                    "unknown account '" + std::string(id) + "'");
}

const Loan* LedgerState::find_loan(std::string_view id) const {
  auto it = loan_index_.find(std::string(id));
  return it == loan_index_.end() ? nullptr : &loans_[it->second];
}

Loan* LedgerState::find_loan(std::string_view id) {
  auto it = loan_index_.find(std::string(id));
  return it == loan_index_.end() ? nullptr : &loans_[it->second];
}

AccountIndex LedgerState::push_account(Account account) {
  const AccountIndex index = accounts_.size();
  account_index_.emplace(account.id, index);
  accounts_.push_back(std::move(account));
  return index;
}

void LedgerState::push_loan(Loan loan) {
  loan_index_.emplace(loan.id, loans_.size());
  loans_.push_back(std::move(loan));
}

}  // namespace credforest
