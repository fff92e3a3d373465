#include "credforest/verify.hpp"

#include <algorithm>
#include <stdexcept>

namespace credforest::verify {

namespace {

std::string edge_locus(const LedgerState& s, AccountIndex from,
                       AccountIndex to) {
  return "edge " + s.account(from).id + " -> " + s.account(to).id;
}

Amount limit_of(const Account& a) {
  Amount out = 0;
  for (const Delegation& d : a.out) out += d.amount;
  const Amount in = a.kind == AccountKind::kSeed ? a.base_budget : a.incoming;
  return in + a.earned - out;
}

Amount sum_limits(const LedgerState& s) {
  Amount total = 0;
  for (const Account& a : s.accounts()) total += limit_of(a);
  return total;
}

Amount required_rec(const LedgerState& s, AccountIndex v,
                    std::vector<Amount>* memo) {
  const Account& a = s.account(v);
  Amount children = 0;
  for (const Delegation& d : a.out) children += required_rec(s, d.child, memo);
  const Amount r = a.kind == AccountKind::kSeed
                       ? 0
                       : std::max<Amount>(0, a.principal + children - a.earned);
  if (memo != nullptr) (*memo)[v] = r;
  return r;
}

// Seed-to-v walk by sponsor links with a step bound.
std::vector<AccountIndex> walk_to_seed(const LedgerState& s, AccountIndex v) {
  std::vector<AccountIndex> nodes{v};
  while (s.account(nodes.back()).kind != AccountKind::kSeed) {
    if (nodes.size() > s.size())
      throw std::invalid_argument("sponsor cycle");
    nodes.push_back(*s.account(nodes.back()).sponsor);
  }
  std::reverse(nodes.begin(), nodes.end());
  return nodes;
}

}  // namespace

void InvariantReport::merge(const InvariantReport& other) {
  checked.insert(checked.end(), other.checked.begin(), other.checked.end());
  violations.insert(violations.end(), other.violations.begin(),
                    other.violations.end());
}

InvariantReport check_conservation(const LedgerState& state) {
  InvariantReport report;
  report.checked.push_back("conservation");
  const auto& accounts = state.accounts();

  Amount base = 0;
  Amount earned = 0;
  for (AccountIndex i = 0; i < accounts.size(); ++i) {
    const Account& a = accounts[i];
    if (a.kind == AccountKind::kSeed) base += a.base_budget;
    earned += a.earned;
    if (a.kind != AccountKind::kSeed) {
      const Account& p = state.account(*a.sponsor);
      Amount posted = -1;
      for (const Delegation& d : p.out)
        if (d.child == i) posted = d.amount;
      if (posted != a.incoming)
        report.violations.push_back({"conservation",
                                     edge_locus(state, *a.sponsor, i), posted,
                                     a.incoming});
    }
    for (const Delegation& d : a.out) {
      if (d.child >= accounts.size() || accounts[d.child].sponsor != i)
        report.violations.push_back(
            {"conservation", "account " + a.id + " delegates to a non-child",
             0, d.amount});
    }
  }
  const Amount limits = sum_limits(state);
  if (limits != base + earned)
    report.violations.push_back({"conservation", "total", base + earned, limits});
  return report;
}

InvariantReport check_solvency(const LedgerState& state) {
  InvariantReport report;
  report.checked.push_back("solvency");
  const auto required = oracle_required_all(state);
  for (AccountIndex i = 0; i < state.size(); ++i) {
    const Account& a = state.account(i);
    if (a.kind == AccountKind::kSeed) {
      if (a.base_budget < 0)
        report.violations.push_back(
            {"solvency", "base budget " + a.id, 0, a.base_budget});
    } else {
      if (a.incoming < required[i])
        report.violations.push_back({"solvency",
                                     edge_locus(state, *a.sponsor, i),
                                     required[i], a.incoming});
    }
    for (const Delegation& d : a.out)
      if (d.amount < 0)
        report.violations.push_back(
            {"solvency", edge_locus(state, i, d.child), 0, d.amount});
    if (a.earned < 0)
      report.violations.push_back(
          {"solvency", "earned credit " + a.id, 0, a.earned});
    if (a.principal < 0)
      report.violations.push_back(
          {"solvency", "principal " + a.id, 0, a.principal});
  }
  return report;
}

InvariantReport check_cash_balance(const LedgerState& state) {
  InvariantReport report;
  report.checked.push_back("cash_balance");
  Amount total = state.protocol_cash;
  for (const Account& a : state.accounts()) total += a.cash;
  if (total != 0) report.violations.push_back({"cash_balance", "total", 0, total});
  return report;
}

InvariantReport check_all(const LedgerState& state) {
  InvariantReport report = check_conservation(state);
  report.merge(check_solvency(state));
  report.merge(check_cash_balance(state));
  return report;
}

InvariantReport check_default_transition(const LedgerState& pre,
                                         const LedgerState& post,
                                         const LoanId& loan_id) {
  const Loan* before = pre.find_loan(loan_id);
  const Loan* after = post.find_loan(loan_id);
  if (before == nullptr || after == nullptr ||
      before->status != LoanStatus::kActive ||
      after->status != LoanStatus::kDefaulted || pre.size() != post.size())
    throw std::invalid_argument("states are not related by a default of '" +
                                loan_id + "'");

  InvariantReport report;
  report.checked = {"off_path_unchanged", "path_limits_kept",
                    "borrower_limit_drop", "total_drop", "nonnegative"};
  const AccountIndex u = *pre.find(before->borrower);
  const Amount principal = pre.account(u).principal;
  const auto path = walk_to_seed(pre, u);
  std::vector<bool> on_path(pre.size(), false);
  for (AccountIndex i : path) on_path[i] = true;

  for (AccountIndex i = 0; i < pre.size(); ++i) {
    const Account& a = pre.account(i);
    const Account& b = post.account(i);
    if (a.id != b.id)
      throw std::invalid_argument("account order differs at " + a.id);
    if (!on_path[i]) {
      if (!(a == b))
        report.violations.push_back(
            {"off_path_unchanged", "account " + a.id, 0, 1});
    } else if (i != u) {
      if (limit_of(a) != limit_of(b))
        report.violations.push_back(
            {"path_limits_kept", "account " + a.id, limit_of(a), limit_of(b)});
    } else if (limit_of(b) != limit_of(a) - principal) {
      report.violations.push_back({"borrower_limit_drop", "account " + a.id,
                                   limit_of(a) - principal, limit_of(b)});
    }
    if (b.kind == AccountKind::kSeed && b.base_budget < 0)
      report.violations.push_back(
          {"nonnegative", "base budget " + b.id, 0, b.base_budget});
    for (const Delegation& d : b.out)
      if (d.amount < 0)
        report.violations.push_back(
            {"nonnegative", edge_locus(post, i, d.child), 0, d.amount});
  }
  const Amount drop = sum_limits(pre) - sum_limits(post);
  if (drop != principal)
    report.violations.push_back({"total_drop", "total", principal, drop});
  return report;
}

Amount oracle_required_delegation(const LedgerState& state, AccountIndex v) {
  if (state.account(v).kind == AccountKind::kSeed)
    throw std::invalid_argument("required delegation of a seed");
  return required_rec(state, v, nullptr);
}

std::vector<Amount> oracle_required_all(const LedgerState& state) {
  std::vector<Amount> required(state.size(), 0);
  for (AccountIndex i = 0; i < state.size(); ++i)
    if (state.account(i).kind == AccountKind::kSeed)
      required_rec(state, i, &required);
  return required;
}

std::vector<Amount> oracle_locked_delegation(const LedgerState& state,
                                             AccountIndex borrower,
                                             Amount principal) {
  LedgerState after = state;
  after.account(borrower).principal += principal;
  const auto path = walk_to_seed(state, borrower);
  std::vector<Amount> locked;
  for (std::size_t k = 1; k < path.size(); ++k)
    locked.push_back(required_rec(after, path[k], nullptr) -
                     required_rec(state, path[k], nullptr));
  return locked;
}

InvariantReport check_repay_then_default_bound(const StrategyTrace& trace) {
  InvariantReport report;
  report.checked = {"award_cap", "cash_accounting", "profit_bound",
                    "weakly_unprofitable"};
  Amount award_minus_premium = 0;
  Amount paid = 0;
  for (std::size_t i = 0; i < trace.repaid.size(); ++i) {
    const LadderRung& r = trace.repaid[i];
    if (r.earned_award > r.protocol_premium)
      report.violations.push_back({"award_cap", "rung " + std::to_string(i),
                                   r.protocol_premium, r.earned_award});
    award_minus_premium += r.earned_award - r.protocol_premium;
    paid += r.protocol_premium + r.delegation_premium;
  }
  const Amount cash_pnl =
      trace.defaulted_principal - trace.baseline_notional - paid;
  if (cash_pnl != trace.attacker_pnl)
    report.violations.push_back(
        {"cash_accounting", "trace", cash_pnl, trace.attacker_pnl});
  if (trace.attacker_pnl > award_minus_premium)
    report.violations.push_back(
        {"profit_bound", "trace", award_minus_premium, trace.attacker_pnl});
  if (award_minus_premium > 0)
    report.violations.push_back(
        {"weakly_unprofitable", "trace", 0, award_minus_premium});
  return report;
}

}  // namespace credforest::verify
