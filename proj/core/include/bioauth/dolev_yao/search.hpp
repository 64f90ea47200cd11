#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bioauth/dolev_yao/knowledge.hpp"
#include "bioauth/dolev_yao/spec.hpp"
#include "bioauth/dolev_yao/term.hpp"

namespace bioauth::dy {

using Bindings = std::map<std::string, Term>;

// One role instance. Its bindings start as the long-term secrets plus its
// own fresh names as Nonce(name, session); the rest are bound on receipt.
struct ThreadSpec {
  std::string role;
  int session = 0;
  Bindings secrets;
  // False when the thread talks to the intruder; such runs carry no
  // authentication goal.
  bool honest_peer = true;
  std::string agent;
};

struct Scenario {
  std::string name;
  std::vector<ThreadSpec> threads;
  std::vector<Term> intruder_knowledge;
  // Terms that must stay underivable.
  std::vector<Term> secrets;
};

// Long-term secret `name` of `agent` as an atom, e.g. ID_A.
Term agent_secret(const ProtocolSpec& spec, const std::string& name, const std::string& agent);

// Two full sessions between the same honest tag and server.
Scenario replay_scenario(const ProtocolSpec& spec);
// An honest session, a tag talking to the intruder and a server talking to
// the intruder. The last two use credentials the intruder knows.
Scenario mitm_scenario(const ProtocolSpec& spec);
// `sessions` = 2 gives the replay scenario, 3 the MITM one.
Scenario scenario_for_sessions(const ProtocolSpec& spec, int sessions);

// Intruder-chosen value for `var` received by thread `thread`.
Term intruder_nonce(const std::string& var, std::size_t thread, std::size_t width);

// Scenario knowledge plus one intruder nonce per receivable variable, in
// the order the search and concrete replay both use.
KnowledgeSet initial_knowledge(const ProtocolSpec& spec, const Scenario& scenario);

struct TraceEvent {
  enum class Type { Send, Receive } type = Type::Send;
  std::size_t thread = 0;
  int step = 0;
  std::vector<Term> fields;
};

struct AttackTrace {
  // "secrecy:<term>" or "agreement:<role>:<step>".
  std::string goal;
  std::string description;
  std::vector<TraceEvent> events;
};

struct SearchOptions {
  std::size_t depth = kDefaultDepth;
  std::size_t term_cap = kDefaultTermCap;
  std::size_t state_budget = 200000;
};

struct SearchResult {
  std::optional<AttackTrace> attack;
  // Set when a bound cut the search short; "no attack" is then not a claim.
  bool incomplete = false;
  std::size_t states = 0;
};

// Depth-first search over interleavings. Honest sends happen as soon as a
// thread can send; at each receive the intruder supplies derivable fields.
// Returns the first secrecy or injective-agreement violation found.
SearchResult search_attacks(const ProtocolSpec& spec, const Scenario& scenario, const SearchOptions& options = {});

// Substitutions extending `base` under which `pattern` equals the ground term
// `target` modulo xor. Finds structural matches, xor permutations and the
// solution of a single variable occurring as an xor factor. Not complete.
std::vector<Bindings> unify(const Term& pattern, const Term& target, const Bindings& base = {});

std::string to_string(const AttackTrace& trace, const Scenario& scenario);

}  // namespace bioauth::dy
