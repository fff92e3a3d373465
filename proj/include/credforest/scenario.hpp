#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "credforest/pricing.hpp"
#include "credforest/state.hpp"
#include "credforest/verify.hpp"

namespace credforest::scenario {

enum class EventOp {
  kAddSeed,
  kOnboard,
  kDelegate,
  kRevoke,
  kBorrow,
  kRepay,
  kDefault,
  kAssertLimit,
  kAssertTotal,
  kAssertSolvent,
};

const char* to_string(EventOp op);

/// One line of a scenario file. Only the fields the op uses are meaningful.
struct ScenarioEvent {
  EventOp op = EventOp::kAssertSolvent;
  std::size_t line = 0;  // 1-based
  AccountId id;
  AccountId sponsor;
  AccountId from;
  AccountId to;
  LoanId loan;
  Amount amount = 0;
  Amount new_amount = 0;
  Amount expected = 0;
  std::int64_t term = 0;
  Ppm default_prob;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ":" +
                           std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// One JSON object per line; blank lines are skipped.
std::vector<ScenarioEvent> parse_scenario(std::istream& in);
std::vector<ScenarioEvent> parse_scenario_text(const std::string& text);

nlohmann::json event_to_json(const ScenarioEvent& event);

struct EventLogEntry {
  std::size_t index = 0;
  std::size_t line = 0;
  EventOp op = EventOp::kAssertSolvent;
  bool ok = true;
  std::string detail;
  Amount total_before = 0;
  Amount total_after = 0;
  std::optional<LoanId> loan;
};

struct ReplayFailure {
  std::size_t index = 0;
  std::size_t line = 0;
  std::string reason;
};

struct ReplayResult {
  LedgerState state;
  verify::InvariantReport report;
  std::vector<EventLogEntry> log;
  std::optional<ReplayFailure> failure;

  bool ok() const noexcept { return !failure && report.ok(); }
};

/// Applies events in order, checking conservation and solvency after each
/// mutating event. Stops at the first rejected event, failed assertion or
/// invariant violation.
ReplayResult replay(const std::vector<ScenarioEvent>& events,
                    const PricingConfig& config = {});

inline constexpr int kSnapshotMajor = 1;
inline constexpr int kSnapshotMinor = 0;

class SnapshotError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

nlohmann::json export_state(const LedgerState& state);
/// Rejects unknown major versions, malformed fields, negative state
/// amounts and broken forest structure.
LedgerState import_state(const nlohmann::json& doc);

/// Canonical text form used for snapshot files and byte comparison.
std::string export_snapshot_text(const LedgerState& state);
LedgerState import_snapshot_text(const std::string& text);

nlohmann::json report_to_json(const verify::InvariantReport& report);
nlohmann::json log_entry_to_json(const EventLogEntry& entry);
nlohmann::json quote_to_json(const PricingQuote& quote);

}  // namespace credforest::scenario
