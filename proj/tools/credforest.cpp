#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "credforest/cli.hpp"

int main(int argc, char** argv) {
  using credforest::Ppm;
  using credforest::cli::ReportFormat;

  credforest::cli::RunConfig config;
  CLI::App app{"Delegated-underwriting credit ledger: replay, check, quote, experiment"};
  app.require_subcommand(1);

  std::int64_t rdmax = config.rdmax.value;
  std::int64_t gamma = -1;
  std::int64_t default_prob = config.default_prob.value;
  std::int64_t amount = -1;
  std::uint64_t trials = 0;
  std::string format = "table";

  const std::map<std::string, ReportFormat> formats{
      {"table", ReportFormat::kTable}, {"machine", ReportFormat::kMachine}};

  auto common = [&](CLI::App* sub) {
    sub->add_option("--out", config.out_path, "Output path");
    sub->add_option("--seed", config.seed, "RNG seed");
    sub->add_option("--rdmax", rdmax, "Delegation premium rate at zero utilization (ppm)");
    sub->add_option("--gamma", gamma, "Earned-credit award factor (ppm per period); default: award = protocol premium");
    sub->add_option("--format", format, "Report format")
        ->check(CLI::IsMember({"table", "machine"}));
  };

  auto* replay = app.add_subcommand("replay", "Replay a scenario file");
  replay->add_option("--scenario", config.scenario_path, "Scenario file")->required();
  common(replay);

  auto* check = app.add_subcommand("check", "Check invariants of a snapshot");
  check->add_option("--snapshot", config.snapshot_path, "Snapshot file")->required();
  common(check);

  auto* quote = app.add_subcommand("quote", "Price a proposed loan without mutating state");
  quote->add_option("--snapshot", config.snapshot_path, "Snapshot file")->required();
  quote->add_option("--borrower", config.borrower, "Borrower id")->required();
  quote->add_option("--amount", amount, "Principal in minor units")->required();
  quote->add_option("--term", config.term, "Term in periods");
  quote->add_option("--default-prob-ppm", default_prob, "Default probability (ppm)");
  common(quote);

  auto* experiment = app.add_subcommand("experiment", "Run a simulation experiment");
  experiment->add_option("--experiment", config.experiment, "mc-breakeven | sybil-split | repay-default")->required();
  experiment->add_option("--trials", trials, "Trials, runs or configurations");
  experiment->add_option("--snapshot", config.snapshot_path, "Snapshot (sybil-split)");
  experiment->add_option("--borrower,--account", config.borrower, "Account (sybil-split with --snapshot)");
  experiment->add_option("--amount", amount, "Principal (mc-breakeven) or split total (sybil-split)");
  experiment->add_option("--term", config.term, "Term in periods (mc-breakeven)");
  experiment->add_option("--default-prob-ppm", default_prob, "Default probability (mc-breakeven)");
  experiment->add_option("--pseudonyms", config.pseudonyms, "Pseudonyms per split (sybil-split)");
  common(experiment);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : credforest::cli::kExitIo;
  }

  config.command = app.get_subcommands().front()->get_name();
  config.rdmax = Ppm{rdmax};
  if (gamma >= 0) config.gamma = Ppm{gamma};
  config.default_prob = Ppm{default_prob};
  if (amount >= 0) config.amount = amount;
  if (trials > 0) config.trials = trials;
  config.format = formats.at(format);

  return credforest::cli::run(config, std::cout, std::cerr);
}
