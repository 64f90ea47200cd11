#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "bioauth/dolev_yao/term.hpp"

// Declarative protocol descriptions for the symbolic engine.
//
//   protocol <name>
//   roles <role> <role>
// Widths are bit counts or `l`, the unit width supplied by the caller.
//
//   function <name> <width>            public one-way function
//   secret <name> <width> <role>       long-term value shared by both roles
//   fresh <name> <width> <role>        nonce generated by <role> per run
//   let <name> = <expr>                macro
//   send <n> <from> <to> : <expr>, ...
//   accept <role> <n> agree <peer> <name> ...
//   secrecy <name> ...
//
// Expressions: `a ^ b` xor, `a . b` concatenation (binds tighter), `f(x)`,
// `f(a, b)` = f(a . b), `left(x)`, `right(x)`. `#` starts a comment.
namespace bioauth::dy {

struct NameDecl {
  std::string name;
  std::size_t width = 0;
  std::string owner;
  bool fresh = false;
};

struct MessageStep {
  int number = 0;
  std::string sender;
  std::string receiver;
  std::vector<Term> fields;  // normalized; declared names appear as variables
};

// After accepting message `step`, `role` commits to `values` and expects a
// run of `peer` that sent that message with the same values.
struct AcceptDecl {
  std::string role;
  int step = 0;
  std::string peer;
  std::vector<std::string> values;
};

struct ProtocolSpec {
  std::string name;
  std::vector<std::string> roles;
  std::map<std::string, std::size_t> functions;
  std::vector<NameDecl> names;
  std::vector<MessageStep> steps;
  std::vector<AcceptDecl> accepts;
  std::vector<std::string> secrecy;

  const NameDecl& name_decl(const std::string& name) const;
  const MessageStep& step(int number) const;
};

// Throws ParseError naming the offending line.
ProtocolSpec parse_spec(std::string_view text, std::size_t unit = 128);

// Shipped descriptions keyed by protocol ("proposed", "rhls", "ch").
const std::map<std::string, std::string>& embedded_specs();
// Parsed shipped description; throws ConfigError for an unknown key.
const ProtocolSpec& builtin_spec(const std::string& key, std::size_t unit = 128);

}  // namespace bioauth::dy
