#include "credforest/scenario.hpp"

#include <array>
#include <istream>
#include <limits>
#include <sstream>
#include <string_view>
#include <unordered_map>
#include <utility>

#include "credforest/ledger.hpp"

namespace credforest::scenario {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<EventOp, std::string_view>, 10> kOpNames{{
    {EventOp::kAddSeed, "ADD_SEED"},
    {EventOp::kOnboard, "ONBOARD"},
    {EventOp::kDelegate, "DELEGATE"},
    {EventOp::kRevoke, "REVOKE"},
    {EventOp::kBorrow, "BORROW"},
    {EventOp::kRepay, "REPAY"},
    {EventOp::kDefault, "DEFAULT"},
    {EventOp::kAssertLimit, "ASSERT_LIMIT"},
    {EventOp::kAssertTotal, "ASSERT_TOTAL"},
    {EventOp::kAssertSolvent, "ASSERT_SOLVENT"},
}};

bool is_mutating(EventOp op) {
  switch (op) {
    case EventOp::kAssertLimit:
    case EventOp::kAssertTotal:
    case EventOp::kAssertSolvent:
      return false;
    default:
      return true;
  }
}

class LineReader {
 public:
  LineReader(const json& obj, std::size_t line) : obj_(obj), line_(line) {}

  std::string id(const char* field) const {
    const json& v = field_of(field);
    if (!v.is_string()) fail(std::string("field '") + field + "' must be a string");
    return v.get<std::string>();
  }

  std::optional<std::string> optional_id(const char* field) const {
    if (!obj_.contains(field)) return std::nullopt;
    return id(field);
  }

  std::int64_t integer(const char* field) const {
    const json& v = field_of(field);
    if (v.is_number_float())
      fail(std::string("non-integer amount in field '") + field + "'");
    if (!v.is_number_integer())
      fail(std::string("field '") + field + "' must be an integer");
    if (v.is_number_unsigned() &&
        v.get<std::uint64_t>() >
            static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max()))
      fail(std::string("field '") + field + "' out of range");
    const auto x = v.get<std::int64_t>();
    if (x < 0) fail(std::string("negative value in field '") + field + "'");
    return x;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(line_, 1, what);
  }

 private:
  const json& field_of(const char* field) const {
    auto it = obj_.find(field);
    if (it == obj_.end()) fail(std::string("missing field '") + field + "'");
    return *it;
  }

  const json& obj_;
  std::size_t line_;
};

ScenarioEvent parse_line(const std::string& text, std::size_t line) {
  json obj;
  try {
    obj = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(line, e.byte == 0 ? 1 : e.byte,
                     "malformed record: " + std::string(e.what()));
  }
  LineReader r(obj, line);
  if (!obj.is_object()) r.fail("record must be an object");

  ScenarioEvent ev;
  ev.line = line;
  const std::string op = r.id("op");
  bool known = false;
  for (const auto& [value, name] : kOpNames) {
    if (name == op) {
      ev.op = value;
      known = true;
    }
  }
  if (!known) r.fail("unknown op '" + op + "'");

  switch (ev.op) {
    case EventOp::kAddSeed:
      ev.id = r.id("id");
      ev.amount = r.integer("amount");
      break;
    case EventOp::kOnboard:
      ev.sponsor = r.id("sponsor");
      ev.id = r.id("id");
      ev.amount = r.integer("amount");
      break;
    case EventOp::kDelegate:
      ev.from = r.id("from");
      ev.to = r.id("to");
      ev.amount = r.integer("amount");
      break;
    case EventOp::kRevoke:
      ev.from = r.id("from");
      ev.to = r.id("to");
      ev.new_amount = r.integer("new_amount");
      break;
    case EventOp::kBorrow:
      ev.id = r.id("id");
      ev.amount = r.integer("amount");
      ev.term = r.integer("term");
      ev.default_prob = Ppm{r.integer("default_prob_ppm")};
      ev.loan = r.optional_id("loan").value_or("");
      break;
    case EventOp::kRepay:
    case EventOp::kDefault:
      ev.loan = r.id("loan");
      break;
    case EventOp::kAssertLimit:
      ev.id = r.id("id");
      ev.expected = r.integer("expected");
      break;
    case EventOp::kAssertTotal:
      ev.expected = r.integer("expected");
      break;
    case EventOp::kAssertSolvent:
      break;
  }
  return ev;
}

bool blank(const std::string& s) {
  return s.find_first_not_of(" \t\r") == std::string::npos;
}

json string_or_null(const std::optional<std::string>& v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace

const char* to_string(EventOp op) {
  for (const auto& [value, name] : kOpNames)
    if (value == op) return name.data();
  return "UNKNOWN";
}

std::vector<ScenarioEvent> parse_scenario(std::istream& in) {
  std::vector<ScenarioEvent> events;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (blank(text)) continue;
    events.push_back(parse_line(text, line));
  }
  return events;
}

std::vector<ScenarioEvent> parse_scenario_text(const std::string& text) {
  std::istringstream in(text);
  return parse_scenario(in);
}

json event_to_json(const ScenarioEvent& ev) {
  json j;
  j["op"] = to_string(ev.op);
  switch (ev.op) {
    case EventOp::kAddSeed:
      j["id"] = ev.id;
      j["amount"] = ev.amount;
      break;
    case EventOp::kOnboard:
      j["sponsor"] = ev.sponsor;
      j["id"] = ev.id;
      j["amount"] = ev.amount;
      break;
    case EventOp::kDelegate:
      j["from"] = ev.from;
      j["to"] = ev.to;
      j["amount"] = ev.amount;
      break;
    case EventOp::kRevoke:
      j["from"] = ev.from;
      j["to"] = ev.to;
      j["new_amount"] = ev.new_amount;
      break;
    case EventOp::kBorrow:
      j["id"] = ev.id;
      j["amount"] = ev.amount;
      j["term"] = ev.term;
      j["default_prob_ppm"] = ev.default_prob.value;
      if (!ev.loan.empty()) j["loan"] = ev.loan;
      break;
    case EventOp::kRepay:
    case EventOp::kDefault:
      j["loan"] = ev.loan;
      break;
    case EventOp::kAssertLimit:
      j["id"] = ev.id;
      j["expected"] = ev.expected;
      break;
    case EventOp::kAssertTotal:
      j["expected"] = ev.expected;
      break;
    case EventOp::kAssertSolvent:
      break;
  }
  return j;
}

ReplayResult replay(const std::vector<ScenarioEvent>& events,
                    const PricingConfig& config) {
  ReplayResult result;
  LedgerState& state = result.state;

  for (std::size_t i = 0; i < events.size(); ++i) {
    const ScenarioEvent& ev = events[i];
    EventLogEntry entry;
    entry.index = i;
    entry.line = ev.line;
    entry.op = ev.op;
    entry.total_before = total_credit(state);

    auto abort = [&](const std::string& reason) {
      entry.ok = false;
      entry.detail = reason;
      entry.total_after = total_credit(state);
      result.failure = ReplayFailure{i, ev.line, reason};
    };

    try {
      switch (ev.op) {
        case EventOp::kAddSeed:
          add_seed(state, ev.id, ev.amount);
          break;
        case EventOp::kOnboard:
          onboard(state, ev.sponsor, ev.id, ev.amount);
          break;
        case EventOp::kDelegate:
          adjust_delegation(state, ev.from, ev.to, ev.amount);
          break;
        case EventOp::kRevoke:
          revoke(state, ev.from, ev.to, ev.new_amount);
          break;
        case EventOp::kBorrow: {
          BorrowRequest req{ev.id, ev.amount, ev.term, ev.default_prob,
                            std::nullopt};
          if (!ev.loan.empty()) req.loan_id = ev.loan;
          entry.loan = borrow(state, req, config);
          const PricingQuote& q = state.find_loan(*entry.loan)->quote;
          entry.detail = "I^R=" + std::to_string(q.protocol_premium) +
                         " I^D=" + std::to_string(q.delegation_premium) +
                         " award=" + std::to_string(q.earned_award);
          break;
        }
        case EventOp::kRepay:
          entry.loan = ev.loan;
          repay(state, ev.loan);
          break;
        case EventOp::kDefault: {
          entry.loan = ev.loan;
          const LedgerState pre = state;
          const DefaultTrace trace = default_loan(state, ev.loan);
          entry.detail = "absorbed by borrower " +
                         std::to_string(trace.borrower_absorbed) +
                         ", seed charge " + std::to_string(trace.seed_charge);
          auto transition = verify::check_default_transition(pre, state, ev.loan);
          if (!transition.ok()) {
            result.report.merge(transition);
            abort("default transition check failed");
          }
          break;
        }
        case EventOp::kAssertLimit: {
          const Amount actual = credit_limit(state, ev.id);
          if (actual != ev.expected)
            abort("ASSERT_LIMIT " + ev.id + ": expected " +
                  std::to_string(ev.expected) + ", got " +
                  std::to_string(actual));
          break;
        }
        case EventOp::kAssertTotal: {
          const Amount actual = total_credit(state);
          if (actual != ev.expected)
            abort("ASSERT_TOTAL: expected " + std::to_string(ev.expected) +
                  ", got " + std::to_string(actual));
          break;
        }
        case EventOp::kAssertSolvent: {
          auto solvency = verify::check_solvency(state);
          if (!solvency.ok()) {
            result.report.merge(solvency);
            abort("ASSERT_SOLVENT failed");
          }
          break;
        }
      }
    } catch (const LedgerError& e) {
      abort(std::string(to_string(e.code())) + ": " + e.what());
    } catch (const InvariantFault& e) {
      abort(std::string("invariant fault: ") + e.what());
    }

    if (!result.failure && is_mutating(ev.op)) {
      auto checks = verify::check_conservation(state);
      checks.merge(verify::check_solvency(state));
      if (!checks.ok()) {
        result.report.merge(checks);
        abort("invariant violation after event");
      }
    }
    if (!result.failure) entry.total_after = total_credit(state);
    result.log.push_back(std::move(entry));
    if (result.failure) break;
  }

  result.report.merge(verify::check_all(state));
  return result;
}

// ---------- snapshots ----------

json quote_to_json(const PricingQuote& q) {
  json locked = json::array();
  for (const LockedEdge& e : q.locked)
    locked.push_back({{"sponsor", e.sponsor},
                      {"locked", e.locked},
                      {"payout", e.payout}});
  return {{"protocol_rate_ppm", q.protocol_rate.value},
          {"protocol_premium", q.protocol_premium},
          {"utilization_ppm", q.utilization.value},
          {"delegation_rate_ppm", q.delegation_rate.value},
          {"locked", locked},
          {"delegation_premium", q.delegation_premium},
          {"earned_award", q.earned_award}};
}

json export_state(const LedgerState& state) {
  json accounts = json::array();
  for (const Account& a : state.accounts()) {
    json out = json::array();
    for (const Delegation& d : a.out)
      out.push_back({{"to", state.account(d.child).id}, {"amount", d.amount}});
    accounts.push_back(
        {{"id", a.id},
         {"kind", to_string(a.kind)},
         {"sponsor", a.sponsor ? json(state.account(*a.sponsor).id)
                               : json(nullptr)},
         {"base_budget", a.base_budget},
         {"incoming", a.incoming},
         {"earned", a.earned},
         {"principal", a.principal},
         {"cash", a.cash},
         {"active_loan", string_or_null(a.active_loan)},
         {"out", out}});
  }
  json loans = json::array();
  for (const Loan& l : state.loans())
    loans.push_back({{"id", l.id},
                     {"borrower", l.borrower},
                     {"principal", l.principal},
                     {"term", l.term},
                     {"default_prob_ppm", l.default_prob.value},
                     {"status", to_string(l.status)},
                     {"quote", quote_to_json(l.quote)}});
  return {{"schema_version", std::to_string(kSnapshotMajor) + "." +
                                 std::to_string(kSnapshotMinor)},
          {"event_counter", state.event_counter},
          {"protocol_cash", state.protocol_cash},
          {"accounts", accounts},
          {"loans", loans}};
}

namespace {

Amount read_amount(const json& obj, const char* field, bool allow_negative) {
  const json& v = obj.at(field);
  if (!v.is_number_integer())
    throw SnapshotError(std::string("field '") + field + "' must be an integer");
  const auto x = v.get<std::int64_t>();
  if (!allow_negative && x < 0)
    throw SnapshotError(std::string("field '") + field + "' is negative");
  return x;
}

PricingQuote read_quote(const json& q) {
  PricingQuote quote;
  quote.protocol_rate = Ppm{read_amount(q, "protocol_rate_ppm", false)};
  quote.protocol_premium = read_amount(q, "protocol_premium", false);
  quote.utilization = Ppm{read_amount(q, "utilization_ppm", false)};
  quote.delegation_rate = Ppm{read_amount(q, "delegation_rate_ppm", false)};
  for (const json& e : q.at("locked"))
    quote.locked.push_back({e.at("sponsor").get<std::string>(),
                            read_amount(e, "locked", false),
                            read_amount(e, "payout", false)});
  quote.delegation_premium = read_amount(q, "delegation_premium", false);
  quote.earned_award = read_amount(q, "earned_award", false);
  return quote;
}

LoanStatus read_status(const std::string& s) {
  for (auto st : {LoanStatus::kActive, LoanStatus::kRepaid, LoanStatus::kDefaulted})
    if (s == to_string(st)) return st;
  throw SnapshotError("unknown loan status '" + s + "'");
}

void check_version(const json& doc) {
  const auto version = doc.at("schema_version").get<std::string>();
  const auto dot = version.find('.');
  int major = -1;
  try {
    major = std::stoi(version.substr(0, dot));
  } catch (const std::exception&) {
    throw SnapshotError("unreadable schema_version '" + version + "'");
  }
  if (major != kSnapshotMajor)
    throw SnapshotError("unsupported snapshot major version " +
                        std::to_string(major));
}

// Sponsor links must reach a seed, and a sponsor must be listed before the
// accounts it sponsors.
void check_forest(const json& accounts) {
  std::unordered_map<std::string, std::size_t> position;
  std::unordered_map<std::string, std::string> sponsor_of;
  for (std::size_t i = 0; i < accounts.size(); ++i) {
    const json& a = accounts[i];
    const auto id = a.at("id").get<std::string>();
    if (!position.emplace(id, i).second)
      throw SnapshotError("duplicate account id '" + id + "'");
    if (!a.at("sponsor").is_null())
      sponsor_of[id] = a.at("sponsor").get<std::string>();
  }
  for (const auto& [id, sponsor] : sponsor_of) {
    std::string j = id;
    for (std::size_t steps = 0; sponsor_of.count(j) != 0; ++steps) {
      if (steps > accounts.size())
        throw SnapshotError("sponsor cycle through '" + id + "'");
      j = sponsor_of.at(j);
      if (position.count(j) == 0)
        throw SnapshotError("account '" + id + "' has unknown sponsor '" + j +
                            "'");
    }
    if (position.at(sponsor) > position.at(id))
      throw SnapshotError("sponsor '" + sponsor + "' listed after '" + id + "'");
  }
}

}  // namespace

LedgerState import_state(const json& doc) {
  try {
    check_version(doc);
    const json& accounts = doc.at("accounts");
    if (!accounts.is_array()) throw SnapshotError("accounts must be an array");
    check_forest(accounts);

    LedgerState state;
    for (const json& a : accounts) {
      Account acct;
      acct.id = a.at("id").get<std::string>();
      const auto kind = a.at("kind").get<std::string>();
      if (kind == "seed") {
        acct.kind = AccountKind::kSeed;
      } else if (kind == "non-seed") {
        acct.kind = AccountKind::kNonSeed;
      } else {
        throw SnapshotError("unknown account kind '" + kind + "'");
      }
      if (acct.is_seed() != a.at("sponsor").is_null())
        throw SnapshotError("account '" + acct.id +
                            "': seeds and only seeds have no sponsor");
      if (!acct.is_seed())
        acct.sponsor = state.require(a.at("sponsor").get<std::string>());
      acct.base_budget = read_amount(a, "base_budget", false);
      acct.incoming = read_amount(a, "incoming", false);
      if ((acct.is_seed() && acct.incoming != 0) ||
          (!acct.is_seed() && acct.base_budget != 0))
        throw SnapshotError("account '" + acct.id +
                            "': budget fields do not match its kind");
      acct.earned = read_amount(a, "earned", false);
      acct.principal = read_amount(a, "principal", false);
      acct.cash = read_amount(a, "cash", true);
      if (!a.at("active_loan").is_null())
        acct.active_loan = a.at("active_loan").get<std::string>();
      state.push_account(std::move(acct));
    }

    // Outgoing postings: resolved once every id is known.
    for (std::size_t i = 0; i < accounts.size(); ++i) {
      for (const json& d : accounts[i].at("out")) {
        const auto to = d.at("to").get<std::string>();
        const auto child = state.find(to);
        if (!child || state.account(*child).sponsor != i)
          throw SnapshotError("account '" + state.account(i).id +
                              "' lists '" + to + "' which it does not sponsor");
        if (state.account(i).find_out(*child) != nullptr)
          throw SnapshotError("duplicate edge to '" + to + "'");
        state.account(i).out.push_back({*child, read_amount(d, "amount", false)});
      }
    }
    for (std::size_t i = 0; i < state.size(); ++i) {
      const Account& a = state.account(i);
      if (!a.is_seed() && state.account(*a.sponsor).find_out(i) == nullptr)
        throw SnapshotError("edge into '" + a.id + "' missing from sponsor");
    }

    for (const json& l : doc.at("loans")) {
      Loan loan;
      loan.id = l.at("id").get<std::string>();
      if (state.find_loan(loan.id) != nullptr)
        throw SnapshotError("duplicate loan id '" + loan.id + "'");
      loan.borrower = l.at("borrower").get<std::string>();
      if (!state.find(loan.borrower))
        throw SnapshotError("loan '" + loan.id + "' has unknown borrower");
      loan.principal = read_amount(l, "principal", false);
      loan.term = read_amount(l, "term", false);
      loan.default_prob = Ppm{read_amount(l, "default_prob_ppm", false)};
      loan.status = read_status(l.at("status").get<std::string>());
      loan.quote = read_quote(l.at("quote"));
      state.push_loan(std::move(loan));
    }
    for (const Account& a : state.accounts()) {
      if (!a.active_loan) continue;
      const Loan* loan = state.find_loan(*a.active_loan);
      if (loan == nullptr || loan->status != LoanStatus::kActive ||
          loan->borrower != a.id)
        throw SnapshotError("account '" + a.id + "' references loan '" +
                            *a.active_loan + "' that is not its active loan");
    }

    state.event_counter = doc.at("event_counter").get<std::uint64_t>();
    state.protocol_cash = read_amount(doc, "protocol_cash", true);
    return state;
  } catch (const json::exception& e) {
    throw SnapshotError(std::string("schema violation: ") + e.what());
  } catch (const LedgerError& e) {
    throw SnapshotError(std::string("schema violation: ") + e.what());
  }
}

std::string export_snapshot_text(const LedgerState& state) {
  return export_state(state).dump(2) + "\n";
}

LedgerState import_snapshot_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SnapshotError(std::string("malformed snapshot: ") + e.what());
  }
  return import_state(doc);
}

json report_to_json(const verify::InvariantReport& report) {
  json violations = json::array();
  for (const auto& v : report.violations)
    violations.push_back({{"invariant", v.invariant},
                          {"locus", v.locus},
                          {"expected", v.expected},
                          {"actual", v.actual}});
  return {{"checked", report.checked},
          {"violations", violations},
          {"ok", report.ok()}};
}

json log_entry_to_json(const EventLogEntry& e) {
  json j = {{"index", e.index},
            {"line", e.line},
            {"op", to_string(e.op)},
            {"ok", e.ok},
            {"detail", e.detail},
            {"total_before", e.total_before},
            {"total_after", e.total_after},
            {"total_delta", e.total_after - e.total_before}};
  if (e.loan) j["loan"] = *e.loan;
  return j;
}

}  // namespace credforest::scenario
