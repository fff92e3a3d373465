#include "credforest/solvency.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace credforest {

namespace {

Amount positive_part(Amount x) { return std::max<Amount>(0, x); }

Amount children_requirement(const Account& a,
                            const std::vector<Amount>& required) {
  Amount sum = 0;
  for (const Delegation& e : a.out) sum += required[e.child];
  return sum;
}

}  // namespace

Amount required_delegation(const LedgerState& state, AccountIndex v) {
  const Account& a = state.account(v);
  if (a.is_seed())
    throw LedgerError(ErrorCode::kSeedHasNoRequirement,
                      "required delegation is undefined for seed '" + a.id +
                          "'");
  return kernels::required_delegations(state)[v];
}

Amount required_delegation(const LedgerState& state, const AccountId& v) {
  return required_delegation(state, state.require(v));
}

Amount local_buffer(const LedgerState& state,
                    const std::vector<Amount>& required, AccountIndex u) {
  const Account& a = state.account(u);
  return positive_part(a.earned - a.principal - children_requirement(a, required));
}

Amount local_buffer(const LedgerState& state, AccountIndex u) {
  return local_buffer(state, kernels::required_delegations(state), u);
}

PathView path_to_seed(const LedgerState& state, AccountIndex v) {
  PathView path;
  AccountIndex j = v;
  for (std::size_t steps = 0;; ++steps) {
    if (steps > state.size())
      throw InvariantFault("sponsor cycle through '" + state.account(v).id +
                           "'");
    const Account& a = state.account(j);
    path.nodes.push_back(j);
    if (a.is_seed()) break;
    if (!a.sponsor || *a.sponsor >= state.size())
      throw InvariantFault("account '" + a.id + "' has no valid sponsor");
    path.edges.push_back(a.incoming);
    j = *a.sponsor;
  }
  std::reverse(path.nodes.begin(), path.nodes.end());
  std::reverse(path.edges.begin(), path.edges.end());
  return path;
}

std::vector<Amount> downstream_buffers(const LedgerState& state,
                                       const std::vector<Amount>& required,
                                       const PathView& path) {
  const std::size_t d = path.depth();
  std::vector<Amount> buffers(d, 0);
  Amount suffix = 0;
  for (std::size_t k = d; k-- > 0;) {
    suffix += local_buffer(state, required, path.nodes[k + 1]);
    buffers[k] = suffix;
    if (k + 1 < d && buffers[k] < buffers[k + 1])
      throw InvariantFault("downstream buffers not monotone");
  }
  return buffers;
}

std::vector<Amount> downstream_buffers(const LedgerState& state,
                                       const PathView& path) {
  return downstream_buffers(state, kernels::required_delegations(state), path);
}

std::vector<Amount> locked_delegations(const std::vector<Amount>& buffers,
                                       Amount principal) {
  std::vector<Amount> locked;
  locked.reserve(buffers.size());
  for (Amount b : buffers) locked.push_back(positive_part(principal - b));
  return locked;
}

FeasibilityReport check_feasibility(const LedgerState& state,
                                    AccountIndex borrower, Amount principal) {
  FeasibilityReport report;
  report.credit_limit = state.account(borrower).credit_limit();
  report.within_credit_limit = principal <= report.credit_limit;

  const auto required = kernels::required_delegations(state);
  const PathView path = path_to_seed(state, borrower);
  const auto buffers = downstream_buffers(state, required, path);
  const auto locked = locked_delegations(buffers, principal);
  for (std::size_t k = 0; k < path.depth(); ++k) {
    EdgeFeasibility edge;
    edge.edge = k;
    edge.buffer = buffers[k];
    edge.locked = locked[k];
    edge.slack = path.edges[k] - required[path.nodes[k + 1]];
    if (edge.locked > edge.slack && !report.first_violation)
      report.first_violation = k;
    report.per_edge.push_back(edge);
  }
  report.feasible = report.within_credit_limit && !report.first_violation;
  return report;
}

Amount max_feasible_principal(const LedgerState& state, AccountIndex borrower) {
  const auto required = kernels::required_delegations(state);
  const PathView path = path_to_seed(state, borrower);
  const auto buffers = downstream_buffers(state, required, path);
  Amount bound = state.account(borrower).credit_limit();
  for (std::size_t k = 0; k < path.depth(); ++k) {
    const Amount slack = path.edges[k] - required[path.nodes[k + 1]];
    if (slack < 0) return 0;
    bound = std::min(bound, slack + buffers[k]);
  }
  return positive_part(bound);
}

}  // namespace credforest
