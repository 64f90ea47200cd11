#include "bioauth/dolev_yao/concrete.hpp"

#include <algorithm>
#include <memory>

#include "bioauth/attacks.hpp"
#include "bioauth/baselines.hpp"
#include "bioauth/errors.hpp"
#include "bioauth/hash.hpp"
#include "bioauth/registry.hpp"

namespace bioauth::dy {

FunctionEval function_eval(const SystemParams& params) {
  return [digest = params.digest](const std::string& fn, const BitString& input, std::size_t width) {
    if (fn == "h") return hash_bits(input, digest, width);
    if (fn == "rot") {
      const auto halves = split_halves(input);
      return ch::rotate(halves.left, halves.right);
    }
    throw ConfigError("no concrete meaning for function symbol '" + fn + "'");
  };
}

BitString evaluate_ground(const Term& t, const std::map<std::string, BitString>& values, const FunctionEval& fn) {
  switch (t.kind()) {
    case Kind::Atom:
    case Kind::Nonce:
    case Kind::Var: {
      auto it = values.find(t.name());
      if (it == values.end()) throw ConfigError("no value for " + t.str());
      if (it->second.width() != t.width()) throw WidthError("value for " + t.str() + " has the wrong width");
      return it->second;
    }
    case Kind::Zero:
      return BitString(t.width());
    case Kind::Concat:
      return concat(evaluate_ground(t.children()[0], values, fn), evaluate_ground(t.children()[1], values, fn));
    case Kind::Xor: {
      BitString out(t.width());
      for (const auto& c : t.children()) out ^= evaluate_ground(c, values, fn);
      return out;
    }
    case Kind::Hash:
      return fn(t.name(), evaluate_ground(t.children()[0], values, fn), t.width());
    case Kind::Left:
      return left_half(evaluate_ground(t.children()[0], values, fn));
    case Kind::Right:
      return right_half(evaluate_ground(t.children()[0], values, fn));
  }
  throw Error("evaluate_ground: bad term");
}

namespace {

const BitString& secret_value(const EnrolmentRecord& record, const std::string& name) {
  return name == "ID" ? record.id : record.secret;
}

}  // namespace

ConcreteReplay replay_concretely(const std::string& protocol_key, const ProtocolSpec& spec, const Scenario& scenario,
                                 const AttackTrace& trace, const SystemParams& params, Rng& rng) {
  ConcreteReplay out;
  auto protocol = make_protocol(protocol_key, params);

  // The honest agent is enrolled first.
  std::vector<std::string> agents{"A"};
  for (const auto& t : scenario.threads) {
    if (std::find(agents.begin(), agents.end(), t.agent) == agents.end()) agents.push_back(t.agent);
  }
  std::map<std::string, std::size_t> index;
  for (const auto& a : agents) index[a] = protocol->enroll(rng.next_u64(), rng, a);

  KnowledgeSet knowledge = initial_knowledge(spec, scenario);
  std::vector<BitString> known;
  for (const auto& t : knowledge.terms()) {
    if (t.kind() == Kind::Nonce) {
      known.push_back(rng.bits(t.width()));
      continue;
    }
    const auto cut = t.name().rfind('_');
    if (t.kind() != Kind::Atom || cut == std::string::npos || !index.contains(t.name().substr(cut + 1))) {
      throw ConfigError("no concrete value for intruder knowledge " + t.str());
    }
    known.push_back(secret_value(protocol->record(index.at(t.name().substr(cut + 1))), t.name().substr(0, cut)));
  }

  std::vector<std::unique_ptr<Endpoint>> endpoints;
  std::vector<ReaderEndpoint*> readers(scenario.threads.size(), nullptr);
  for (std::size_t i = 0; i < scenario.threads.size(); ++i) {
    const auto& t = scenario.threads[i];
    if (t.role == spec.roles[0]) {
      endpoints.push_back(protocol->make_tag(index.at(t.agent), rng.next_u64()));
    } else {
      auto reader = protocol->make_reader(rng.next_u64());
      readers[i] = reader.get();
      endpoints.push_back(std::move(reader));
    }
  }

  const FunctionEval fn = function_eval(params);
  for (const auto& e : trace.events) {
    Endpoint& party = *endpoints.at(e.thread);
    const std::string who = scenario.threads[e.thread].role + "#" + std::to_string(scenario.threads[e.thread].session);
    if (e.type == TraceEvent::Type::Send) {
      const auto payload = party.emit(e.step);
      if (!payload || payload->size() != e.fields.size()) {
        out.findings.push_back(who + " did not send step " + std::to_string(e.step));
        return out;
      }
      for (std::size_t f = 0; f < e.fields.size(); ++f) {
        if ((*payload)[f].width() != e.fields[f].width()) {
          out.findings.push_back(who + " step " + std::to_string(e.step) + " field width differs from the model");
          return out;
        }
        const std::size_t at = knowledge.add(e.fields[f]);
        if (at == known.size()) {
          known.push_back((*payload)[f]);
        } else if (known[at] != (*payload)[f]) {
          out.findings.push_back("model equates " + e.fields[f].str() + " with a different earlier value");
          return out;
        }
      }
    } else {
      const Closure closure = close(knowledge, kDefaultDepth, e.fields);
      Payload message;
      for (const auto& f : e.fields) message.push_back(closure.evaluate(f, known, fn));
      if (!party.absorb(e.step, message)) {
        out.findings.push_back(who + " rejected the forged step " + std::to_string(e.step));
        return out;
      }
    }
  }
  out.replayed = true;

  if (trace.goal.starts_with("secrecy:")) {
    const std::string name = trace.goal.substr(8);
    for (const auto& s : scenario.secrets) {
      if (s.str() != name) continue;
      const Term goals[] = {s};
      const Closure closure = close(knowledge, kDefaultDepth, goals);
      const auto cut = name.rfind('_');
      const BitString real = secret_value(protocol->record(index.at("A")), name.substr(0, cut));
      out.violation_confirmed = closure.evaluate(s, known, fn) == real;
      out.findings.push_back(out.violation_confirmed ? "secret recovered bit for bit" : "recovered value is wrong");
    }
    return out;
  }

  std::vector<RunRecord> runs;
  std::set<BitString> intruder_ids;
  for (std::size_t i = 0; i < scenario.threads.size(); ++i) {
    const bool intruder_owned = scenario.threads[i].agent != "A";
    if (readers[i]) {
      runs.push_back(snapshot(*readers[i], false, true));
    } else {
      runs.push_back(snapshot(*endpoints[i], intruder_owned));
    }
  }
  for (const auto& a : agents) {
    if (a != "A") intruder_ids.insert(protocol->tag_id(index.at(a)));
  }
  const auto violations = agreement_violations(runs, intruder_ids);
  out.violation_confirmed = !violations.empty();
  out.findings.insert(out.findings.end(), violations.begin(), violations.end());
  return out;
}

}  // namespace bioauth::dy
