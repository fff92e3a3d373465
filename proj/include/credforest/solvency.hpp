#pragma once

#include <optional>
#include <vector>

#include "credforest/kernels.hpp"
#include "credforest/state.hpp"

namespace credforest {

/// Unique seed-to-account path. nodes.front() is a seed; edges[k] is the
/// delegation on nodes[k] -> nodes[k+1].
struct PathView {
  std::vector<AccountIndex> nodes;
  std::vector<Amount> edges;

  std::size_t depth() const noexcept { return edges.size(); }
};

struct EdgeFeasibility {
  std::size_t edge = 0;  // k
  Amount buffer = 0;     // B_k
  Amount locked = 0;     // m_k
  Amount slack = 0;      // delta_k - R(child)
};

struct FeasibilityReport {
  bool feasible = false;
  bool within_credit_limit = false;
  Amount credit_limit = 0;
  std::vector<EdgeFeasibility> per_edge;
  std::optional<std::size_t> first_violation;  // first edge with m_k > slack
};

/// Minimum delegation that must stay on the edge into `v`. Throws
/// LedgerError(kSeedHasNoRequirement) for a seed.
Amount required_delegation(const LedgerState& state, AccountIndex v);
Amount required_delegation(const LedgerState& state, const AccountId& v);

/// Earned credit at `u` not already committed to its own principal or its
/// children's requirements.
Amount local_buffer(const LedgerState& state, AccountIndex u);
Amount local_buffer(const LedgerState& state,
                    const std::vector<Amount>& required, AccountIndex u);

/// Throws InvariantFault when the sponsor chain is corrupted.
PathView path_to_seed(const LedgerState& state, AccountIndex v);

/// Suffix sums of local buffers below each path edge.
std::vector<Amount> downstream_buffers(const LedgerState& state,
                                       const PathView& path);
std::vector<Amount> downstream_buffers(const LedgerState& state,
                                       const std::vector<Amount>& required,
                                       const PathView& path);

/// m_k = max(0, principal - B_k).
std::vector<Amount> locked_delegations(const std::vector<Amount>& buffers,
                                       Amount principal);

FeasibilityReport check_feasibility(const LedgerState& state,
                                    AccountIndex borrower, Amount principal);

/// Largest principal check_feasibility would accept (0 when none).
Amount max_feasible_principal(const LedgerState& state, AccountIndex borrower);

}  // namespace credforest
