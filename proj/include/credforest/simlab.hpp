#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "credforest/kernels.hpp"
#include "credforest/pricing.hpp"
#include "credforest/state.hpp"
#include "credforest/verify.hpp"

namespace credforest::simlab {

enum class Outcome { kRepaid, kDefaulted };

struct TrialResult {
  std::uint64_t trial = 0;
  Outcome outcome = Outcome::kRepaid;
  Amount protocol_pnl = 0;
  Amount attacker_pnl = 0;

  bool operator==(const TrialResult&) const = default;
};

struct ExperimentSummary {
  std::string name;
  std::uint64_t trials = 0;
  Amount total = 0;  // exact sum of the per-trial metric
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation
  double standard_error = 0.0;
  Amount min = 0;
  Amount max = 0;
  bool accepted = false;
  nlohmann::json parameters;
  nlohmann::json details;
};

/// Exact statistics of a per-trial metric; `accepted` is left false.
ExperimentSummary summarize(const std::string& name,
                            const std::vector<Amount>& values);

nlohmann::json summary_to_json(const ExperimentSummary& summary);

// ---------- break-even Monte Carlo ----------

enum class Expectation {
  kBreakEven,  // accept iff |mean| <= 3 SE
  kLoss,       // accept iff mean < -3 SE
};

struct BreakEvenParams {
  Amount principal = 1'000'000;
  std::int64_t term = 1;
  Ppm default_prob{100'000};
  std::optional<Ppm> protocol_rate;  // absent: break-even rate
  std::uint64_t trials = 100'000;
  std::uint64_t seed = 1;
  std::optional<Outcome> forced_outcome;  // bypasses the default draw
  Expectation expect = Expectation::kBreakEven;
};

struct BreakEvenRun {
  ExperimentSummary summary;
  std::vector<TrialResult> results;
};

/// Each trial originates one loan on the real engine, draws repay/default
/// from the trial's own stream and records the protocol's cash result.
BreakEvenRun mc_breakeven(const BreakEvenParams& params,
                          Exec exec = Exec::kParallel);

/// Recomputes the summary of a break-even run from its stored trials.
ExperimentSummary summarize_breakeven(const BreakEvenParams& params,
                                      const std::vector<TrialResult>& results);

// ---------- Sybil split ----------

struct SybilParams {
  AccountId account;
  std::size_t pseudonyms = 2;  // k
  Amount total = 0;            // delegated across the k pseudonyms
  std::uint64_t runs = 1;
  std::uint64_t seed = 1;
};

struct SybilRun {
  std::uint64_t run = 0;
  std::vector<Amount> parts;
  Amount total_before = 0;
  Amount total_after = 0;
  Amount limit_drop = 0;  // fall in the splitting account's credit limit
};

struct SybilResult {
  ExperimentSummary summary;  // metric: total_after - total_before
  std::vector<SybilRun> runs;
};

/// Onboards k pseudonyms under one account with random positive splits of
/// `total`. Accepted iff the aggregate never moves and the splitting
/// account's limit falls by exactly `total`.
SybilResult sybil_split(const LedgerState& state, const SybilParams& params,
                        Exec exec = Exec::kParallel);

// ---------- repay-then-default ladders ----------

struct LoanTerms {
  std::int64_t term = 1;
  Ppm default_prob{100'000};
};

/// Runs one ladder on `state`: for each entry of `rungs` the attacker
/// borrows that principal (0 or more than the feasible maximum means the
/// maximum) and repays; then it borrows the feasible maximum and defaults.
/// The state is left as the ladder ends.
verify::StrategyTrace run_ladder(LedgerState& state, const AccountId& attacker,
                                 const std::vector<Amount>& rungs,
                                 const LoanTerms& terms,
                                 const PricingConfig& config);

struct LadderParams {
  std::uint64_t configurations = 10'000;
  std::size_t max_rungs = 5;
  std::size_t max_depth = 3;  // attacker depth below its seed
  std::uint64_t seed = 1;
  Ppm max_delegation_rate{80'000};
  /// Fixed award factor for every configuration; absent draws one per
  /// configuration (including the binding-cap policy).
  std::optional<std::optional<Ppm>> award_factor;
};

struct LadderCase {
  std::uint64_t index = 0;
  std::size_t depth = 0;
  std::vector<Amount> rungs;
  LoanTerms terms;
  std::optional<Ppm> award_factor;
  verify::StrategyTrace trace;
  verify::InvariantReport report;  // bound check plus ledger invariants
};

struct LadderResult {
  ExperimentSummary summary;  // metric: attacker P&L
  std::vector<LadderCase> cases;
  std::size_t argmax = 0;
};

LadderResult repay_default_ladder(const LadderParams& params,
                                  Exec exec = Exec::kParallel);

}  // namespace credforest::simlab
