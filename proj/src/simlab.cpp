#include "credforest/simlab.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <random>
#include <string>

#include "credforest/ledger.hpp"
#include "credforest/rng.hpp"
#include "credforest/rounding.hpp"
#include "credforest/solvency.hpp"

namespace credforest::simlab {

using nlohmann::json;

namespace {

// Runs body(i) for every i in [0, n). Each call writes only its own slot,
// so the serial and parallel forms produce identical results.
// The lowest-index exception is rethrown after the loop.
template <typename Body>
void for_each_trial(std::uint64_t n, Exec exec, Body&& body) {
  const auto count = static_cast<std::int64_t>(n);
  std::vector<std::exception_ptr> errors(n);
  auto guarded = [&](std::int64_t i) {
    try {
      body(static_cast<std::uint64_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  };
  if (exec == Exec::kParallel) {
#pragma omp parallel for schedule(dynamic, 256)
    for (std::int64_t i = 0; i < count; ++i) guarded(i);
  } else {
    for (std::int64_t i = 0; i < count; ++i) guarded(i);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

Amount uniform(std::mt19937_64& rng, Amount lo, Amount hi) {
  return std::uniform_int_distribution<Amount>(lo, hi)(rng);
}

bool coin(std::mt19937_64& rng) { return uniform(rng, 0, 1) == 1; }

}  // namespace

ExperimentSummary summarize(const std::string& name,
                            const std::vector<Amount>& values) {
  ExperimentSummary s;
  s.name = name;
  s.trials = values.size();
  if (values.empty()) return s;

  Wide sum = 0;
  Wide sum_sq = 0;
  s.min = values.front();
  s.max = values.front();
  for (Amount v : values) {
    sum += v;
    sum_sq += static_cast<Wide>(v) * v;
    s.min = std::min(s.min, v);
    s.max = std::max(s.max, v);
  }
  s.total = static_cast<Amount>(sum);
  const auto n = static_cast<long double>(values.size());
  s.mean = static_cast<double>(static_cast<long double>(sum) / n);
  if (values.size() > 1) {
    // n * sum_sq - sum^2 is exact in 128 bits for the magnitudes used here.
    const Wide centered = static_cast<Wide>(values.size()) * sum_sq - sum * sum;
    const long double var =
        static_cast<long double>(centered) / (n * (n - 1.0L));
    s.stddev = static_cast<double>(std::sqrt(var));
    s.standard_error = static_cast<double>(std::sqrt(var / n));
  }
  return s;
}

json summary_to_json(const ExperimentSummary& s) {
  return {{"name", s.name},
          {"trials", s.trials},
          {"total", s.total},
          {"mean", s.mean},
          {"stddev", s.stddev},
          {"standard_error", s.standard_error},
          {"min", s.min},
          {"max", s.max},
          {"accepted", s.accepted},
          {"parameters", s.parameters},
          {"details", s.details}};
}

// ---------- break-even Monte Carlo ----------

ExperimentSummary summarize_breakeven(const BreakEvenParams& p,
                                      const std::vector<TrialResult>& results) {
  std::vector<Amount> pnl;
  pnl.reserve(results.size());
  std::uint64_t defaults = 0;
  for (const TrialResult& r : results) {
    pnl.push_back(r.protocol_pnl);
    if (r.outcome == Outcome::kDefaulted) ++defaults;
  }
  ExperimentSummary s = summarize("mc-breakeven", pnl);

  const Ppm rate = p.protocol_rate.value_or(break_even_rate(p.default_prob, p.term));
  const Amount premium = protocol_premium(p.principal, p.term, rate);
  const double d = static_cast<double>(p.default_prob.value) / kPpmScale;
  s.parameters = {{"principal", p.principal},
                  {"term", p.term},
                  {"default_prob_ppm", p.default_prob.value},
                  {"protocol_rate_ppm", rate.value},
                  {"protocol_premium", premium},
                  {"trials", p.trials},
                  {"seed", p.seed},
                  {"expect", p.expect == Expectation::kBreakEven ? "break-even"
                                                                  : "loss"}};
  s.details = {{"defaults", defaults},
               {"expected_mean", (1.0 - d) * static_cast<double>(premium) -
                                     d * static_cast<double>(p.principal)}};
  const double band = 3.0 * s.standard_error;
  s.accepted = p.expect == Expectation::kBreakEven ? std::abs(s.mean) <= band
                                                   : s.mean < -band;
  return s;
}

BreakEvenRun mc_breakeven(const BreakEvenParams& p, Exec exec) {
  PricingConfig config;
  config.protocol_rate =
      p.protocol_rate.value_or(break_even_rate(p.default_prob, p.term));

  // The borrower is a seed holding exactly the principal, so the protocol
  // P&L is the only cash leg that depends on the outcome.
  LedgerState base;
  add_seed(base, "borrower", p.principal);

  BreakEvenRun run;
  run.results.resize(p.trials);
  for_each_trial(p.trials, exec, [&](std::uint64_t i) {
    LedgerState state = base;
    const LoanId loan = borrow(
        state, {"borrower", p.principal, p.term, p.default_prob, LoanId("loan")},
        config);
    Outcome outcome;
    if (p.forced_outcome) {
      outcome = *p.forced_outcome;
    } else {
      auto rng = trial_stream(p.seed, i);
      outcome = uniform(rng, 0, kPpmScale - 1) < p.default_prob.value
                    ? Outcome::kDefaulted
                    : Outcome::kRepaid;
    }
    if (outcome == Outcome::kRepaid) {
      repay(state, loan);
    } else {
      default_loan(state, loan);
    }
    run.results[i] = {i, outcome, state.protocol_cash, 0};
  });
  run.summary = summarize_breakeven(p, run.results);
  return run;
}

// ---------- Sybil split ----------

SybilResult sybil_split(const LedgerState& state, const SybilParams& p,
                        Exec exec) {
  const AccountIndex u = state.require(p.account);
  SybilResult result;
  result.runs.resize(p.runs);
  const Amount total = p.pseudonyms == 0 ? 0 : p.total;
  const auto k = static_cast<Amount>(p.pseudonyms);
  if (k > 0 && (total < k || total > state.account(u).free_capacity()))
    throw LedgerError(ErrorCode::kInsufficientCapacity,
                      "cannot split " + std::to_string(total) + " into " +
                          std::to_string(k) + " positive parts under '" +
                          p.account + "'");

  for_each_trial(p.runs, exec, [&](std::uint64_t i) {
    SybilRun& run = result.runs[i];
    run.run = i;
    LedgerState s = state;
    run.total_before = total_credit(s);
    const Amount limit_before = s.account(u).credit_limit();

    if (k > 0) {
      // k positive parts: one unit each plus a random composition of the rest.
      auto rng = trial_stream(p.seed, i);
      std::vector<Amount> cuts{0, total - k};
      for (Amount j = 1; j < k; ++j) cuts.push_back(uniform(rng, 0, total - k));
      std::sort(cuts.begin(), cuts.end());
      for (Amount j = 0; j < k; ++j)
        run.parts.push_back(1 + cuts[static_cast<std::size_t>(j) + 1] -
                            cuts[static_cast<std::size_t>(j)]);
      for (std::size_t j = 0; j < run.parts.size(); ++j)
        onboard(s, p.account, p.account + "~sybil" + std::to_string(j),
                run.parts[j]);
    }
    run.total_after = total_credit(s);
    run.limit_drop = limit_before - s.account(u).credit_limit();
  });

  std::vector<Amount> deltas;
  bool accepted = true;
  for (const SybilRun& r : result.runs) {
    deltas.push_back(r.total_after - r.total_before);
    accepted = accepted && r.total_after == r.total_before &&
               r.limit_drop == total;
  }
  result.summary = summarize("sybil-split", deltas);
  result.summary.accepted = accepted;
  result.summary.parameters = {{"account", p.account},
                               {"pseudonyms", p.pseudonyms},
                               {"total", total},
                               {"runs", p.runs},
                               {"seed", p.seed}};
  return result;
}

// ---------- repay-then-default ladders ----------

verify::StrategyTrace run_ladder(LedgerState& state, const AccountId& attacker,
                                 const std::vector<Amount>& rungs,
                                 const LoanTerms& terms,
                                 const PricingConfig& config) {
  const AccountIndex a = state.require(attacker);
  verify::StrategyTrace trace;
  trace.baseline_notional = max_feasible_principal(state, a);
  const Amount cash_start = state.account(a).cash;

  for (Amount wanted : rungs) {
    const Amount cap = max_feasible_principal(state, a);
    if (cap <= 0) continue;
    const Amount principal = (wanted <= 0 || wanted > cap) ? cap : wanted;
    const LoanId id =
        borrow(state, {attacker, principal, terms.term, terms.default_prob, {}},
               config);
    const PricingQuote q = state.find_loan(id)->quote;
    repay(state, id);
    trace.repaid.push_back({principal, q.protocol_premium, q.delegation_premium,
                            q.earned_award});
  }

  const Amount final_principal = max_feasible_principal(state, a);
  if (final_principal > 0) {
    const LoanId id = borrow(
        state, {attacker, final_principal, terms.term, terms.default_prob, {}},
        config);
    default_loan(state, id);
    trace.defaulted_principal = final_principal;
  }
  trace.attacker_pnl =
      state.account(a).cash - cash_start - trace.baseline_notional;
  return trace;
}

namespace {

struct LadderForest {
  LedgerState state;
  AccountId tail;  // deepest chain node: the attacker
};

// Random chain seed -> n1 -> ... -> attacker with side branches that carry
// earned credit and active loans, built through ledger operations only.
LadderForest build_ladder_forest(std::mt19937_64& rng, std::size_t depth,
                                const LoanTerms& terms,
                                const PricingConfig& config) {
  LadderForest forest;
  LedgerState& s = forest.state;
  add_seed(s, "seed", uniform(rng, 1'000, 200'000));
  AccountId parent = "seed";
  for (std::size_t level = 1; level <= depth; ++level) {
    const AccountId id = "n" + std::to_string(level);
    const Amount free = s.account(s.require(parent)).free_capacity();
    if (free <= 0) break;
    onboard(s, parent, id, uniform(rng, std::max<Amount>(1, free / 3), free));

    if (level < depth && coin(rng)) {
      // Earned credit on the intermediate through one borrow/repay cycle.
      const Amount cap = max_feasible_principal(s, s.require(id));
      if (cap > 0) {
        const LoanId loan =
            borrow(s, {id, uniform(rng, 1, cap), terms.term, terms.default_prob, {}},
                   config);
        repay(s, loan);
      }
    }
    if (level < depth && coin(rng)) {
      // A side child with an outstanding loan consumes slack on the path.
      const Amount free_here = s.account(s.require(id)).free_capacity();
      if (free_here > 1) {
        const AccountId side = id + "-side";
        onboard(s, id, side, uniform(rng, 1, free_here / 2));
        const Amount cap = max_feasible_principal(s, s.require(side));
        if (cap > 0)
          borrow(s, {side, uniform(rng, 1, cap), terms.term, terms.default_prob, {}},
                 config);
      }
    }
    parent = id;
  }
  forest.tail = parent;
  return forest;
}

}  // namespace

LadderResult repay_default_ladder(const LadderParams& p, Exec exec) {
  LadderResult result;
  result.cases.resize(p.configurations);

  for_each_trial(p.configurations, exec, [&](std::uint64_t i) {
    auto rng = trial_stream(p.seed, i);
    LadderCase& c = result.cases[i];
    c.index = i;
    c.depth = static_cast<std::size_t>(
        uniform(rng, 0, static_cast<Amount>(p.max_depth)));
    c.terms.term = uniform(rng, 1, 4);
    c.terms.default_prob = Ppm{uniform(rng, 10'000, 500'000)};

    PricingConfig config;
    config.max_delegation_rate = p.max_delegation_rate;
    if (p.award_factor) {
      c.award_factor = *p.award_factor;
    } else if (coin(rng)) {
      c.award_factor = Ppm{uniform(rng, 0, 2 * kPpmScale)};
    }
    config.award_factor = c.award_factor;

    auto [s, attacker] = build_ladder_forest(rng, c.depth, c.terms, config);
    c.depth = path_to_seed(s, s.require(attacker)).depth();

    const auto rung_count =
        static_cast<std::size_t>(uniform(rng, 0, static_cast<Amount>(p.max_rungs)));
    for (std::size_t r = 0; r < rung_count; ++r)
      c.rungs.push_back(coin(rng) ? 0 : uniform(rng, 1, 200'000));

    c.trace = run_ladder(s, attacker, c.rungs, c.terms, config);
    c.report = verify::check_repay_then_default_bound(c.trace);
    c.report.merge(verify::check_all(s));
  });

  std::vector<Amount> pnl;
  bool accepted = true;
  for (const LadderCase& c : result.cases) {
    pnl.push_back(c.trace.attacker_pnl);
    accepted = accepted && c.report.ok() && c.trace.attacker_pnl <= 0;
  }
  result.summary = summarize("repay-default", pnl);
  result.summary.accepted = accepted && !result.cases.empty();
  if (!result.cases.empty()) {
    result.argmax = static_cast<std::size_t>(
        std::max_element(pnl.begin(), pnl.end()) - pnl.begin());
    const LadderCase& worst = result.cases[result.argmax];
    json rungs = json::array();
    for (const auto& r : worst.trace.repaid)
      rungs.push_back({{"principal", r.principal},
                       {"protocol_premium", r.protocol_premium},
                       {"delegation_premium", r.delegation_premium},
                       {"earned_award", r.earned_award}});
    result.summary.details = {
        {"argmax",
         {{"index", worst.index},
          {"depth", worst.depth},
          {"term", worst.terms.term},
          {"default_prob_ppm", worst.terms.default_prob.value},
          {"award_factor_ppm", worst.award_factor
                                   ? json(worst.award_factor->value)
                                   : json("cap")},
          {"baseline_notional", worst.trace.baseline_notional},
          {"repaid", rungs},
          {"defaulted_principal", worst.trace.defaulted_principal},
          {"attacker_pnl", worst.trace.attacker_pnl}}}};
  }
  result.summary.parameters = {{"configurations", p.configurations},
                               {"max_rungs", p.max_rungs},
                               {"max_depth", p.max_depth},
                               {"seed", p.seed},
                               {"rdmax_ppm", p.max_delegation_rate.value}};
  return result;
}

}  // namespace credforest::simlab
