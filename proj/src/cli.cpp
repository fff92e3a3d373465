#include "credforest/cli.hpp"

#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "credforest/ledger.hpp"
#include "credforest/pricing.hpp"
#include "credforest/scenario.hpp"
#include "credforest/simlab.hpp"
#include "credforest/solvency.hpp"
#include "credforest/verify.hpp"

namespace credforest::cli {

using nlohmann::json;

namespace {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  if (path.empty()) throw IoError("no input path given");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
  if (!out) throw IoError("write to '" + path + "' failed");
}

PricingConfig pricing_config(const RunConfig& c) {
  PricingConfig p;
  p.max_delegation_rate = c.rdmax;
  p.award_factor = c.gamma;
  return p;
}

void print_report_table(std::ostream& out, const verify::InvariantReport& r) {
  out << "invariants:";
  for (const auto& name : r.checked) out << ' ' << name;
  out << '\n';
  if (r.ok()) {
    out << "  all checks passed\n";
    return;
  }
  for (const auto& v : r.violations)
    out << "  VIOLATION " << v.invariant << " at " << v.locus << ": expected "
        << v.expected << ", actual " << v.actual << '\n';
}

void print_summary_table(std::ostream& out, const simlab::ExperimentSummary& s) {
  out << "experiment " << s.name << '\n'
      << "  parameters " << s.parameters.dump() << '\n'
      << std::setw(12) << "trials" << std::setw(16) << "mean" << std::setw(16)
      << "stddev" << std::setw(14) << "std.err" << std::setw(14) << "min"
      << std::setw(14) << "max" << "  accepted\n"
      << std::setw(12) << s.trials << std::setw(16) << std::setprecision(6)
      << s.mean << std::setw(16) << s.stddev << std::setw(14)
      << s.standard_error << std::setw(14) << s.min << std::setw(14) << s.max
      << "  " << (s.accepted ? "yes" : "no") << '\n';
  if (!s.details.is_null()) out << "  details " << s.details.dump() << '\n';
}

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
  } catch (const scenario::ParseError& e) {
    err << "parse error: " << e.what() << '\n';
  } catch (const scenario::SnapshotError& e) {
    err << "snapshot error: " << e.what() << '\n';
  }
  return kExitIo;
}

}  // namespace

int cmd_replay(const RunConfig& c, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto events = scenario::parse_scenario_text(read_file(c.scenario_path));
    const auto result = scenario::replay(events, pricing_config(c));
    const std::string snapshot = scenario::export_snapshot_text(result.state);
    if (!c.out_path.empty()) write_file(c.out_path, snapshot);

    if (c.format == ReportFormat::kMachine) {
      json log = json::array();
      for (const auto& e : result.log) log.push_back(scenario::log_entry_to_json(e));
      json doc = {{"ok", result.ok()},
                  {"events", log},
                  {"invariants", scenario::report_to_json(result.report)},
                  {"total_credit", total_credit(result.state)},
                  {"snapshot", scenario::export_state(result.state)}};
      doc["failure"] = result.failure
                           ? json{{"index", result.failure->index},
                                  {"line", result.failure->line},
                                  {"reason", result.failure->reason}}
                           : json(nullptr);
      out << doc.dump() << '\n';
    } else {
      out << std::left << std::setw(6) << "#" << std::setw(6) << "line"
          << std::setw(16) << "op" << std::setw(6) << "ok" << std::right
          << std::setw(12) << "total" << std::setw(10) << "delta" << "  detail\n";
      for (const auto& e : result.log) {
        out << std::left << std::setw(6) << e.index << std::setw(6) << e.line
            << std::setw(16) << scenario::to_string(e.op) << std::setw(6)
            << (e.ok ? "yes" : "NO") << std::right << std::setw(12)
            << e.total_after << std::setw(10) << (e.total_after - e.total_before)
            << "  " << (e.loan ? *e.loan + " " : "") << e.detail << '\n';
      }
      out << "final total credit " << total_credit(result.state) << '\n';
      for (const Account& a : result.state.accounts())
        if (over_delegated(a))
          out << "over-delegated: " << a.id << " (credit limit "
              << a.credit_limit() << ")\n";
      print_report_table(out, result.report);
    }
    if (result.failure)
      err << "replay failed at event " << result.failure->index << " (line "
          << result.failure->line << "): " << result.failure->reason << '\n';
    return result.ok() ? kExitOk : kExitViolation;
  });
}

int cmd_check(const RunConfig& c, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const LedgerState state =
        scenario::import_snapshot_text(read_file(c.snapshot_path));
    const auto report = verify::check_all(state);
    if (c.format == ReportFormat::kMachine) {
      out << json{{"invariants", scenario::report_to_json(report)}}.dump() << '\n';
    } else {
      print_report_table(out, report);
    }
    return report.ok() ? kExitOk : kExitViolation;
  });
}

int cmd_quote(const RunConfig& c, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const LedgerState state =
        scenario::import_snapshot_text(read_file(c.snapshot_path));
    const auto borrower = state.find(c.borrower);
    if (!borrower) {
      err << "unknown borrower '" << c.borrower << "'\n";
      return kExitInfeasible;
    }
    const Amount principal = c.amount.value_or(0);
    const Account& acct = state.account(*borrower);
    if (principal <= 0 || acct.principal != 0) {
      err << (principal <= 0 ? "principal must be positive"
                             : "borrower already has an active loan")
          << '\n';
      return kExitInfeasible;
    }
    const auto feas = check_feasibility(state, *borrower, principal);
    if (!feas.feasible) {
      if (!feas.within_credit_limit) {
        err << "infeasible: principal " << principal << " exceeds credit limit "
            << feas.credit_limit << '\n';
      } else {
        const auto& e = feas.per_edge[*feas.first_violation];
        err << "infeasible: edge " << e.edge << " locks " << e.locked
            << " but has slack " << e.slack << '\n';
      }
      return kExitInfeasible;
    }
    PricingQuote q;
    try {
      q = quote_loan(state, *borrower, principal, c.term, c.default_prob,
                     pricing_config(c));
    } catch (const LedgerError& e) {
      err << "cannot quote: " << e.what() << '\n';
      return kExitInfeasible;
    }

    if (c.format == ReportFormat::kMachine) {
      json doc = scenario::quote_to_json(q);
      doc["borrower"] = c.borrower;
      doc["principal"] = principal;
      doc["term"] = c.term;
      doc["default_prob_ppm"] = c.default_prob.value;
      out << doc.dump() << '\n';
    } else {
      out << "quote for " << c.borrower << ": principal " << principal
          << ", term " << c.term << ", default prob " << c.default_prob.value
          << " ppm\n"
          << "  protocol rate     " << q.protocol_rate.value << " ppm\n"
          << "  protocol premium  " << q.protocol_premium << '\n'
          << "  utilization       " << q.utilization.value << " ppm\n"
          << "  delegation rate   " << q.delegation_rate.value << " ppm\n";
      for (std::size_t k = 0; k < q.locked.size(); ++k)
        out << "  edge " << k << " sponsor " << std::left << std::setw(12)
            << q.locked[k].sponsor << std::right << " locked " << std::setw(10)
            << q.locked[k].locked << "  payout " << std::setw(8)
            << q.locked[k].payout << '\n';
      out << "  delegation premium " << q.delegation_premium << '\n'
          << "  total interest     " << q.total_interest() << '\n'
          << "  earned award       " << q.earned_award << '\n';
    }
    return kExitOk;
  });
}

int cmd_experiment(const RunConfig& c, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    simlab::ExperimentSummary summary;
    if (c.experiment == "mc-breakeven") {
      simlab::BreakEvenParams p;
      p.principal = c.amount.value_or(p.principal);
      p.term = c.term;
      p.default_prob = c.default_prob;
      p.trials = c.trials.value_or(p.trials);
      p.seed = c.seed;
      summary = simlab::mc_breakeven(p).summary;
    } else if (c.experiment == "sybil-split") {
      LedgerState state;
      simlab::SybilParams p;
      if (!c.snapshot_path.empty()) {
        state = scenario::import_snapshot_text(read_file(c.snapshot_path));
        p.account = c.borrower;
      } else {
        add_seed(state, "seed", 1'000'000);
        onboard(state, "seed", "u", 500'000);
        p.account = "u";
      }
      p.pseudonyms = c.pseudonyms;
      p.total = c.amount.value_or(100'000);
      p.runs = c.trials.value_or(1'000);
      p.seed = c.seed;
      summary = simlab::sybil_split(state, p).summary;
    } else if (c.experiment == "repay-default") {
      simlab::LadderParams p;
      p.configurations = c.trials.value_or(p.configurations);
      p.seed = c.seed;
      p.max_delegation_rate = c.rdmax;
      if (c.gamma) p.award_factor = c.gamma;
      summary = simlab::repay_default_ladder(p).summary;
    } else {
      err << "unknown experiment '" << c.experiment
          << "' (expected mc-breakeven, sybil-split or repay-default)\n";
      return kExitIo;
    }

    if (c.format == ReportFormat::kMachine) {
      out << simlab::summary_to_json(summary).dump() << '\n';
    } else {
      print_summary_table(out, summary);
    }
    if (!c.out_path.empty())
      write_file(c.out_path, simlab::summary_to_json(summary).dump(2) + "\n");
    return summary.accepted ? kExitOk : kExitViolation;
  });
}

int run(const RunConfig& c, std::ostream& out, std::ostream& err) {
  if (c.command == "replay") return cmd_replay(c, out, err);
  if (c.command == "check") return cmd_check(c, out, err);
  if (c.command == "quote") return cmd_quote(c, out, err);
  if (c.command == "experiment") return cmd_experiment(c, out, err);
  err << "unknown command '" << c.command << "'\n";
  return kExitIo;
}

}  // namespace credforest::cli
