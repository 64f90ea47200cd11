#pragma once

#include <map>
#include <string>
#include <vector>

#include "bioauth/bit_string.hpp"
#include "bioauth/dolev_yao/knowledge.hpp"
#include "bioauth/dolev_yao/search.hpp"
#include "bioauth/params.hpp"
#include "bioauth/rng.hpp"

namespace bioauth::dy {

// Bit-level meaning of the function symbols used by the shipped
// descriptions: `h` is the configured hash, `rot(a, g)` the Chien-Huang
// rotation of a by g.
FunctionEval function_eval(const SystemParams& params);

// Value of a term whose atoms, nonces and variables are all named in
// `values` (nonces by name, ignoring the session).
BitString evaluate_ground(const Term& t, const std::map<std::string, BitString>& values, const FunctionEval& fn);

struct ConcreteReplay {
  // Every send happened and every forged message was accepted.
  bool replayed = false;
  // The real deployment shows the violation the trace claims.
  bool violation_confirmed = false;
  std::vector<std::string> findings;
};

// Executes a symbolic trace against real endpoints: the honest agent is
// enrolled first, intruder-known agents after it; each intruder message is
// computed from the bits seen so far along the closure's derivation.
ConcreteReplay replay_concretely(const std::string& protocol_key, const ProtocolSpec& spec, const Scenario& scenario,
                                 const AttackTrace& trace, const SystemParams& params, Rng& rng);

}  // namespace bioauth::dy
