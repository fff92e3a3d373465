#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "credforest/types.hpp"

namespace credforest::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitViolation = 1;  // invariant or assertion failure
inline constexpr int kExitInfeasible = 2;
inline constexpr int kExitIo = 3;  // I/O or parse error

enum class ReportFormat { kTable, kMachine };

struct RunConfig {
  std::string command;
  std::string scenario_path;
  std::string snapshot_path;
  std::string out_path;
  std::uint64_t seed = 1;
  Ppm rdmax{80'000};
  std::optional<Ppm> gamma;  // absent: award equals the protocol premium
  ReportFormat format = ReportFormat::kTable;
  std::optional<std::uint64_t> trials;
  std::string experiment;

  // quote and experiment loan parameters
  std::string borrower;
  std::optional<Amount> amount;
  std::int64_t term = 1;
  Ppm default_prob{100'000};

  // sybil-split
  std::size_t pseudonyms = 10;
};

int cmd_replay(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_check(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_quote(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_experiment(const RunConfig& config, std::ostream& out,
                   std::ostream& err);

/// Dispatches on config.command.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace credforest::cli
