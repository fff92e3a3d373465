#include "credforest/ledger.hpp"

#include <algorithm>
#include <string>

#include "credforest/kernels.hpp"
#include "credforest/solvency.hpp"

namespace credforest {

namespace {

std::string amount_str(Amount a) { return std::to_string(a); }

void require_positive(Amount amount, const char* what) {
  if (amount <= 0)
    throw LedgerError(ErrorCode::kInvalidAmount,
                      std::string(what) + " must be positive, got " +
                          amount_str(amount));
}

void require_unused(const LedgerState& state, const AccountId& id) {
  if (state.find(id))
    throw LedgerError(ErrorCode::kDuplicateId,
                      "account '" + id + "' already exists");
}

struct Edge {
  AccountIndex from;
  AccountIndex to;
};

Edge require_edge(const LedgerState& state, const AccountId& from,
                  const AccountId& to) {
  const AccountIndex f = state.require(from);
  const AccountIndex t = state.require(to);
  const Account& child = state.account(t);
  if (child.sponsor != f || state.account(f).find_out(t) == nullptr)
    throw LedgerError(ErrorCode::kNoSuchEdge,
                      "no delegation edge " + from + " -> " + to);
  return {f, t};
}

void require_free_capacity(const Account& sponsor, Amount amount) {
  const Amount free = sponsor.free_capacity();
  if (amount > free)
    throw LedgerError(ErrorCode::kInsufficientCapacity,
                      "'" + sponsor.id + "' has free capacity " +
                          amount_str(free) + ", cannot delegate " +
                          amount_str(amount));
}

// Posts a change to both sides of an edge.
void post_edge(LedgerState& state, Edge edge, Amount new_amount) {
  if (new_amount < 0)
    throw InvariantFault("edge " + state.account(edge.from).id + " -> " +
                         state.account(edge.to).id + " would go negative (" +
                         amount_str(new_amount) + ")");
  state.account(edge.from).find_out(edge.to)->amount = new_amount;
  state.account(edge.to).incoming = new_amount;
}

Loan& require_active_loan(LedgerState& state, const LoanId& id) {
  Loan* loan = state.find_loan(id);
  if (loan == nullptr)
    throw LedgerError(ErrorCode::kUnknownLoan, "unknown loan '" + id + "'");
  if (loan->status != LoanStatus::kActive)
    throw LedgerError(ErrorCode::kLoanNotActive,
                      "loan '" + id + "' is " + to_string(loan->status));
  return *loan;
}

}  // namespace

void add_seed(LedgerState& state, const AccountId& id, Amount base) {
  require_unused(state, id);
  require_positive(base, "seed base budget");
  Account seed;
  seed.id = id;
  seed.kind = AccountKind::kSeed;
  seed.base_budget = base;
  state.push_account(std::move(seed));
  ++state.event_counter;
}

void onboard(LedgerState& state, const AccountId& sponsor, const AccountId& id,
             Amount amount) {
  const AccountIndex s = state.require(sponsor);
  require_unused(state, id);
  require_positive(amount, "delegation");
  require_free_capacity(state.account(s), amount);

  Account child;
  child.id = id;
  child.kind = AccountKind::kNonSeed;
  child.sponsor = s;
  child.incoming = amount;
  const AccountIndex c = state.push_account(std::move(child));
  state.account(s).out.push_back({c, amount});
  ++state.event_counter;
}

void adjust_delegation(LedgerState& state, const AccountId& from,
                       const AccountId& to, Amount delta) {
  const Edge edge = require_edge(state, from, to);
  require_positive(delta, "delegation top-up");
  require_free_capacity(state.account(edge.from), delta);
  post_edge(state, edge, state.account(edge.to).incoming + delta);
  ++state.event_counter;
}

void revoke(LedgerState& state, const AccountId& from, const AccountId& to,
            Amount new_amount) {
  const Edge edge = require_edge(state, from, to);
  const Amount current = state.account(edge.to).incoming;
  if (new_amount > current)
    throw LedgerError(ErrorCode::kRaiseNotRevoke,
                      "revocation cannot raise " + from + " -> " + to +
                          " from " + amount_str(current) + " to " +
                          amount_str(new_amount) + "; use a top-up");
  const Amount floor = required_delegation(state, edge.to);
  if (new_amount < floor)
    throw LedgerError(ErrorCode::kInadmissibleRevocation,
                      "edge " + from + " -> " + to + " must keep at least " +
                          amount_str(floor) + ", requested " +
                          amount_str(new_amount));
  post_edge(state, edge, new_amount);
  ++state.event_counter;
}

LoanId borrow(LedgerState& state, const BorrowRequest& request,
              const PricingConfig& config) {
  const AccountIndex b = state.require(request.borrower);
  const Account& borrower = state.account(b);
  if (borrower.principal != 0 || borrower.active_loan)
    throw LedgerError(ErrorCode::kActiveLoanExists,
                      "'" + borrower.id + "' already has an active loan");
  require_positive(request.principal, "principal");

  const LoanId id = request.loan_id.value_or(
      "L" + std::to_string(state.loans().size() + 1));
  if (state.find_loan(id) != nullptr)
    throw LedgerError(ErrorCode::kDuplicateId,
                      "loan '" + id + "' already exists");

  // Validates term and default probability before any feasibility work.
  PricingQuote quote = quote_loan(state, b, request.principal, request.term,
                                  request.default_prob, config);

  const FeasibilityReport report = check_feasibility(state, b, request.principal);
  if (!report.within_credit_limit)
    throw LedgerError(ErrorCode::kExceedsCreditLimit,
                      "principal " + amount_str(request.principal) +
                          " exceeds credit limit " +
                          amount_str(report.credit_limit) + " of '" +
                          borrower.id + "'");
  if (report.first_violation) {
    const auto k = *report.first_violation;
    const auto& e = report.per_edge[k];
    throw LedgerError(ErrorCode::kPathInfeasible,
                      "path edge " + std::to_string(k) + " locks " +
                          amount_str(e.locked) + " but has slack " +
                          amount_str(e.slack));
  }

  Account& acct = state.account(b);
  acct.principal = request.principal;
  acct.active_loan = id;

  Loan loan;
  loan.id = id;
  loan.borrower = acct.id;
  loan.principal = request.principal;
  loan.term = request.term;
  loan.default_prob = request.default_prob;
  loan.quote = std::move(quote);
  state.push_loan(std::move(loan));
  ++state.event_counter;
  return id;
}

void repay(LedgerState& state, const LoanId& loan_id) {
  Loan& loan = require_active_loan(state, loan_id);
  const AccountIndex b = state.require(loan.borrower);
  if (state.account(b).principal != loan.principal)
    throw InvariantFault("borrower principal does not match loan '" + loan.id +
                         "'");
  const PricingQuote& q = loan.quote;
  if (q.earned_award > q.protocol_premium)
    throw InvariantFault("earned award exceeds protocol premium on loan '" +
                         loan.id + "'");

  Account& borrower = state.account(b);
  borrower.principal = 0;
  borrower.active_loan.reset();
  borrower.earned += q.earned_award;
  borrower.cash -= q.total_interest();
  state.protocol_cash += q.protocol_premium;
  for (const LockedEdge& e : q.locked)
    state.account(state.require(e.sponsor)).cash += e.payout;
  loan.status = LoanStatus::kRepaid;
  ++state.event_counter;
}

DefaultTrace default_loan(LedgerState& state, const LoanId& loan_id) {
  Loan& loan = require_active_loan(state, loan_id);
  const AccountIndex u = state.require(loan.borrower);
  Account& borrower = state.account(u);
  if (borrower.principal != loan.principal)
    throw InvariantFault("borrower principal does not match loan '" + loan.id +
                         "'");

  DefaultTrace trace;
  trace.borrower = u;
  trace.principal = borrower.principal;
  trace.borrower_absorbed = std::min(borrower.earned, borrower.principal);
  borrower.earned -= trace.borrower_absorbed;
  Amount loss = borrower.principal - trace.borrower_absorbed;

  AccountIndex j = u;
  while (loss > 0 && !state.account(j).is_seed()) {
    const AccountIndex v = *state.account(j).sponsor;
    post_edge(state, {v, j}, state.account(j).incoming - loss);
    Account& sponsor = state.account(v);
    const Amount absorbed = std::min(sponsor.earned, loss);
    trace.steps.push_back({j, v, loss, absorbed});
    sponsor.earned -= absorbed;
    loss -= absorbed;
    j = v;
  }
  while (!state.account(j).is_seed()) j = *state.account(j).sponsor;
  trace.seed = j;
  if (loss > 0) {
    Account& seed = state.account(j);
    if (seed.base_budget < loss)
      throw InvariantFault("default would overdraw base budget of seed '" +
                           seed.id + "'");
    seed.base_budget -= loss;
    trace.seed_charge = loss;
  }

  Account& b = state.account(u);
  b.principal = 0;
  b.active_loan.reset();
  b.cash += loan.principal;
  state.protocol_cash -= loan.principal;
  loan.status = LoanStatus::kDefaulted;
  ++state.event_counter;
  return trace;
}

Amount credit_limit(const LedgerState& state, const AccountId& id) {
  return state.account(state.require(id)).credit_limit();
}

Amount total_credit(const LedgerState& state) {
  return kernels::credit_totals(state).credit_limits;
}

bool over_delegated(const Account& account) {
  return account.credit_limit() < 0;
}

}  // namespace credforest
