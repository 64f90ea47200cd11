#include "bioauth/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>

#include <json.hpp>

#include "bioauth/attacks.hpp"
#include "bioauth/channel.hpp"
#include "bioauth/errors.hpp"
#include "bioauth/registry.hpp"

namespace bioauth {

std::string to_string(Source s) { return s == Source::Measured ? "measured" : "paper"; }

std::string to_string(Property p) {
  switch (p) {
    case Property::MutualAuth:
      return "mutual_auth";
    case Property::ReplayPrevention:
      return "replay_prevention";
    case Property::Untraceability:
      return "untraceability";
    case Property::DosPrevention:
      return "dos_prevention";
    case Property::DesyncResistance:
      return "desync_resistance";
  }
  return "?";
}

std::string to_string(Provenance p) { return p == Provenance::Executed ? "executed" : "paper"; }

std::string format_units(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

namespace {

bool implemented(const std::string& key) {
  const auto& keys = protocol_keys();
  return std::find(keys.begin(), keys.end(), key) != keys.end();
}

CostReport reference_row(std::string protocol, std::string computation, std::optional<double> hashes, double storage,
                         double r_to_t, double t_to_r, double total) {
  CostReport r;
  r.protocol = std::move(protocol);
  r.computation = std::move(computation);
  r.tag_hash_ops = hashes;
  r.storage_units = storage;
  r.reader_to_tag_units = r_to_t;
  r.tag_to_reader_units = t_to_r;
  r.total_units = total;
  r.source = Source::Paper;
  return r;
}

std::string fixed(double v, int digits) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

const std::vector<CostReport>& reference_costs() {
  // The Chien-Huang unit "g" is a generator call, not a hash.
  static const std::vector<CostReport> kRows = {
      reference_row("ch", "1g", std::nullopt, 2, 0.5, 1.5, 2),
      reference_row("rhls", "1h", 1, 1, 0, 2, 2),
      reference_row("lcap", "2h", 2, 1, 1, 2, 3),
      reference_row("lhyc", "4h", 4, 2, 1, 2, 3),
      reference_row("smartcard_a", "4h", 4, 3, 2, 3, 5),
      reference_row("smartcard_b", "4h", 4, 3, 2, 3, 5),
      reference_row("smartcard_c", "3h", 3, 4, 2, 3, 5),
      reference_row("proposed", "2h", 2, 2, 0.5, 2.5, 3),
  };
  return kRows;
}

std::optional<CostReport> reference_cost(const std::string& protocol) {
  for (const auto& r : reference_costs()) {
    if (r.protocol == protocol) return r;
  }
  return std::nullopt;
}

CostReport measure_costs(const std::string& protocol_key, std::size_t sessions, const SystemParams& params,
                         Rng& rng) {
  if (!implemented(protocol_key) && reference_cost(protocol_key)) {
    throw NotExecutable("protocol '" + protocol_key + "' is reference data only");
  }
  if (sessions == 0) throw ConfigError("measure_costs needs at least one session");
  auto proto = make_protocol(protocol_key, params);
  for (std::size_t i = 0; i < params.n; ++i) proto->enroll(rng.next_u64(), rng);

  CostReport report;
  report.protocol = protocol_key;
  report.l = params.l;
  report.source = Source::Measured;

  std::optional<std::array<std::uint64_t, 4>> first;
  for (std::size_t s = 0; s < sessions; ++s) {
    const std::size_t index = s % proto->size();
    std::optional<BiometricTemplate> live;
    if (proto->has_bio_phase()) live = genuine_capture(*proto, index, params.noise_sigma, rng);
    proto->tag_hasher().reset();
    Channel channel;
    const auto outcome = run(*proto, index, live ? &*live : nullptr, channel, rng);
    if (!fully_accepted(*proto, outcome)) throw Error("honest session failed while measuring " + protocol_key);

    std::array<std::uint64_t, 4> counts{proto->tag_hasher().count(), 0, 0, 0};  // hashes, R->T, T->R, R->T raw
    for (const auto& e : channel.observe().events) {
      std::uint64_t bits = 0;
      for (const auto& field : e.payload) bits += field.width();
      const auto step = std::find_if(proto->steps().begin(), proto->steps().end(),
                                     [&](const StepSpec& st) { return st.number == e.step; });
      const bool counted = step != proto->steps().end() && step->counted_in_cost;
      if (e.direction == Direction::ReaderToTag) {
        counts[3] += bits;
        if (counted) counts[1] += bits;
      } else {
        counts[2] += bits;
      }
    }
    if (first && *first != counts) throw Error("per-session costs of " + protocol_key + " are not constant");
    first = counts;
  }

  const double l = static_cast<double>(params.l);
  report.tag_hash_ops = static_cast<double>((*first)[0]);
  report.computation = format_units(*report.tag_hash_ops) + "h";
  report.storage_units = static_cast<double>(proto->tag_storage_bits()) / l;
  report.reader_to_tag_bits = (*first)[1];
  report.tag_to_reader_bits = (*first)[2];
  report.reader_to_tag_raw_bits = (*first)[3];
  report.reader_to_tag_units = static_cast<double>(report.reader_to_tag_bits) / l;
  report.tag_to_reader_units = static_cast<double>(report.tag_to_reader_bits) / l;
  report.total_units = report.reader_to_tag_units + report.tag_to_reader_units;
  return report;
}

std::vector<CostReport> cost_table(const SystemParams& params, std::size_t sessions, Rng& rng) {
  std::vector<CostReport> out;
  for (const auto& ref : reference_costs()) {
    if (implemented(ref.protocol)) {
      Rng sub = rng.fork("cost/" + ref.protocol);
      out.push_back(measure_costs(ref.protocol, sessions, params, sub));
    } else {
      out.push_back(ref);
    }
  }
  for (const auto& key : protocol_keys()) {
    if (reference_cost(key)) continue;
    Rng sub = rng.fork("cost/" + key);
    out.push_back(measure_costs(key, sessions, params, sub));
  }
  return out;
}

// ------------------------------------------------------------ security

std::optional<std::array<bool, kProperties.size()>> reference_marks(const std::string& protocol) {
  using Marks = std::array<bool, kProperties.size()>;
  static const std::map<std::string, Marks> kMarks = {
      {"rhls", {true, false, false, false, true}},
      {"lcap", {true, true, true, false, true}},
      {"ch", {true, false, true, true, true}},
      {"lhyc", {true, true, true, true, true}},
      {"proposed", {true, true, true, true, true}},
  };
  auto it = kMarks.find(protocol);
  if (it == kMarks.end()) return std::nullopt;
  return it->second;
}

const SecurityRow& SecurityMatrix::row(const std::string& protocol) const {
  for (const auto& r : rows) {
    if (r.protocol == protocol) return r;
  }
  throw ConfigError("no security row for '" + protocol + "'");
}

namespace {

// Cells whose published mark is kept because no executed game in this
// library exercises the weakness behind it.
bool reference_only_cell(const std::string& protocol, Property p) {
  return protocol == "rhls" && p == Property::Untraceability;
}

bool opens_with_challenge(const std::string& key, const SystemParams& params) {
  const auto proto = make_protocol(key, params);
  return !proto->steps().empty() && proto->steps().front().sender == Party::Reader;
}

}  // namespace

Cell executed_cell(const std::string& protocol, Property property, const SystemParams& params, const Rng& rng,
                   const MatrixOptions& options) {
  Cell cell;
  if (const auto marks = reference_marks(protocol)) cell.reference = (*marks)[static_cast<std::size_t>(property)];
  Rng sub = rng.fork(protocol + "/" + to_string(property));
  switch (property) {
    case Property::MutualAuth: {
      const bool mutual = make_protocol(protocol, params)->mutual();
      const std::size_t ok = honest_acceptances(protocol, options.honest_sessions, params, sub);
      cell.plus = mutual && ok == options.honest_sessions;
      cell.evidence = std::string("reader proof ") + (mutual ? "present" : "absent") + ", " + std::to_string(ok) +
                      "/" + std::to_string(options.honest_sessions) + " honest sessions accepted";
      break;
    }
    case Property::ReplayPrevention: {
      const auto replay = replay_attack(protocol, params, sub);
      cell.evidence = std::string("replay ") + (replay.succeeded ? "succeeded" : "failed");
      bool broken = replay.succeeded;
      if (opens_with_challenge(protocol, params)) {
        const auto algebraic = algebraic_replay(protocol, params, sub);
        cell.evidence += std::string(", algebraic replay ") + (algebraic.succeeded ? "succeeded" : "failed");
        broken = broken || algebraic.succeeded;
      }
      cell.plus = !broken;
      break;
    }
    case Property::Untraceability: {
      const auto game = trace_game(protocol, options.trace_trials, params, sub, options.jobs);
      cell.plus = game.advantage <= options.trace_threshold;
      cell.evidence = "advantage=" + fixed(game.advantage, 4) + " over " + std::to_string(game.trials) + " trials";
      break;
    }
    case Property::DosPrevention: {
      const auto dos = dos_flood(protocol, options.dos_sessions, params, sub);
      cell.plus = dos.ok;
      cell.evidence = std::to_string(options.dos_sessions) + " bogus sessions, server hashes per session " +
                      std::to_string(dos.min_server_hashes) + ".." + std::to_string(dos.max_server_hashes) +
                      " with " + std::to_string(dos.enrolled) + " enrolled";
      break;
    }
    case Property::DesyncResistance: {
      const auto report = desync_report(protocol, kAllInterruptPoints, params, sub);
      cell.plus = report.ok;
      cell.evidence = report.ok ? "recovered at every interruption point" : "desynchronized";
      break;
    }
  }
  return cell;
}

SecurityMatrix build_security_matrix(const SystemParams& params, const Rng& rng, const MatrixOptions& options) {
  SecurityMatrix m;
  for (const std::string protocol : {"rhls", "lcap", "ch", "lhyc", "proposed", "clear_id"}) {
    SecurityRow row;
    row.protocol = protocol;
    const auto marks = reference_marks(protocol);
    for (const auto p : kProperties) {
      Cell& cell = row.at(p);
      if (!implemented(protocol)) {
        cell.plus = (*marks)[static_cast<std::size_t>(p)];
        cell.reference = cell.plus;
        cell.provenance = Provenance::Paper;
        cell.evidence = "published mark; protocol not implemented";
        continue;
      }
      if (reference_only_cell(protocol, p)) {
        const Cell game = executed_cell(protocol, p, params, rng, options);
        cell.plus = (*marks)[static_cast<std::size_t>(p)];
        cell.reference = cell.plus;
        cell.provenance = Provenance::Paper;
        cell.evidence = "published mark; generic distinguisher gives " + game.evidence;
        continue;
      }
      cell = executed_cell(protocol, p, params, rng, options);
    }
    m.rows.push_back(std::move(row));
  }
  return m;
}

// ------------------------------------------------------------ rendering

namespace {

std::string mark(bool plus) { return plus ? "+" : "-"; }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string display_name(const std::string& protocol) {
  static const std::map<std::string, std::string> kNames = {
      {"rhls", "RHLS"},       {"lcap", "LCAP"},       {"ch", "CH"},
      {"lhyc", "LHYC"},       {"proposed", "Proposed"}, {"clear_id", "Clear ID"},
      {"smartcard_a", "Smart card A"}, {"smartcard_b", "Smart card B"}, {"smartcard_c", "Smart card C"},
  };
  auto it = kNames.find(protocol);
  return it == kNames.end() ? protocol : it->second;
}

std::string fraction(double units) {
  if (units == 0) return "-";
  const double whole = static_cast<double>(static_cast<long long>(units));
  const double rest = units - whole;
  if (rest == 0) return format_units(whole) + "l";
  if (rest == 0.5) return (whole == 0 ? std::string() : format_units(whole) + " ") + "1/2l";
  return format_units(units) + "l";
}

}  // namespace

std::string table1_csv(const SecurityMatrix& m) {
  std::ostringstream out;
  out << "protocol,property,mark,provenance,reference,agrees,evidence\n";
  for (const auto& row : m.rows) {
    for (const auto p : kProperties) {
      const Cell& c = row.at(p);
      out << row.protocol << ',' << to_string(p) << ',' << mark(c.plus) << ',' << to_string(c.provenance) << ','
          << (c.reference ? mark(*c.reference) : "") << ',' << (c.agrees_with_reference() ? "yes" : "no") << ','
          << csv_field(c.evidence) << '\n';
    }
  }
  return out.str();
}

std::string table1_json(const SecurityMatrix& m) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : m.rows) {
    nlohmann::ordered_json cells = nlohmann::ordered_json::object();
    for (const auto p : kProperties) {
      const Cell& c = row.at(p);
      nlohmann::ordered_json cell = {{"mark", mark(c.plus)}, {"provenance", to_string(c.provenance)}};
      cell["reference"] = c.reference ? nlohmann::ordered_json(mark(*c.reference)) : nlohmann::ordered_json();
      cell["agrees"] = c.agrees_with_reference();
      cell["evidence"] = c.evidence;
      cells[to_string(p)] = std::move(cell);
    }
    rows.push_back({{"protocol", row.protocol}, {"cells", std::move(cells)}});
  }
  return nlohmann::ordered_json{{"table", "security"}, {"rows", std::move(rows)}}.dump(2) + "\n";
}

std::string table1_markdown(const SecurityMatrix& m) {
  std::ostringstream out;
  out << "| Property |";
  for (const auto& row : m.rows) out << ' ' << display_name(row.protocol) << " |";
  out << "\n|---|";
  for (std::size_t i = 0; i < m.rows.size(); ++i) out << "---|";
  out << '\n';
  std::vector<std::string> notes;
  for (const auto p : kProperties) {
    out << "| " << to_string(p) << " |";
    for (const auto& row : m.rows) {
      const Cell& c = row.at(p);
      out << ' ' << mark(c.plus) << " (" << to_string(c.provenance) << (c.agrees_with_reference() ? "" : ", differs")
          << ") |";
      if (!c.agrees_with_reference()) {
        notes.push_back(display_name(row.protocol) + " " + to_string(p) + ": executed " + mark(c.plus) +
                        ", published " + mark(*c.reference) + " (" + c.evidence + ")");
      }
    }
    out << '\n';
  }
  for (const auto& n : notes) out << "\n- " << n;
  if (!notes.empty()) out << '\n';
  return out.str();
}

std::string table2_csv(const std::vector<CostReport>& rows) {
  std::ostringstream out;
  out << "protocol,computation,storage,r_to_t,t_to_r,total,r_to_t_bits,t_to_r_bits,r_to_t_raw_bits,"
         "printed_computation,source\n";
  for (const auto& r : rows) {
    const auto ref = reference_cost(r.protocol);
    out << r.protocol << ',' << (r.tag_hash_ops ? format_units(*r.tag_hash_ops) : "") << ','
        << format_units(r.storage_units) << ',' << format_units(r.reader_to_tag_units) << ','
        << format_units(r.tag_to_reader_units) << ',' << format_units(r.total_units) << ',';
    if (r.source == Source::Measured) {
      out << r.reader_to_tag_bits << ',' << r.tag_to_reader_bits << ',' << r.reader_to_tag_raw_bits;
    } else {
      out << ",,";
    }
    out << ',' << (ref ? ref->computation : "") << ',' << to_string(r.source) << '\n';
  }
  return out.str();
}

std::string table2_json(const std::vector<CostReport>& rows) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json j;
    j["protocol"] = r.protocol;
    j["computation"] = r.computation;
    j["tag_hash_ops"] = r.tag_hash_ops ? nlohmann::ordered_json(*r.tag_hash_ops) : nlohmann::ordered_json();
    j["storage_l"] = r.storage_units;
    j["r_to_t_l"] = r.reader_to_tag_units;
    j["t_to_r_l"] = r.tag_to_reader_units;
    j["total_l"] = r.total_units;
    if (r.source == Source::Measured) {
      j["l"] = r.l;
      j["r_to_t_bits"] = r.reader_to_tag_bits;
      j["t_to_r_bits"] = r.tag_to_reader_bits;
      j["r_to_t_raw_bits"] = r.reader_to_tag_raw_bits;
    }
    j["source"] = to_string(r.source);
    out.push_back(std::move(j));
  }
  return nlohmann::ordered_json{{"table", "costs"}, {"rows", std::move(out)}}.dump(2) + "\n";
}

std::string table2_markdown(const std::vector<CostReport>& rows) {
  std::ostringstream out;
  out << "| Protocol | Computation (tag) | Storage | R -> T | T -> R | Total | Source |\n"
         "|---|---|---|---|---|---|---|\n";
  for (const auto& r : rows) {
    const auto ref = reference_cost(r.protocol);
    std::string computation = r.computation;
    if (r.source == Source::Measured && ref && ref->computation != r.computation) {
      computation += " (printed " + ref->computation + ")";
    }
    out << "| " << display_name(r.protocol) << " | " << computation << " | " << fraction(r.storage_units) << " | "
        << fraction(r.reader_to_tag_units) << " | " << fraction(r.tag_to_reader_units) << " | "
        << fraction(r.total_units) << " | " << to_string(r.source) << " |\n";
  }
  return out.str();
}

}  // namespace bioauth
