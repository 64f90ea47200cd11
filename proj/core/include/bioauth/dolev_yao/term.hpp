#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

// Symbolic message algebra: free constructors plus xor and bit-string
// projection. Terms are immutable shared nodes; equality and order go by a
// canonical key string.
namespace bioauth::dy {

enum class Kind { Atom, Nonce, Var, Zero, Concat, Xor, Hash, Left, Right };

class Term {
 public:
  Term() = default;

  explicit operator bool() const noexcept { return node_ != nullptr; }

  Kind kind() const;
  // Atom, Nonce and Var name; function name for Hash.
  const std::string& name() const;
  int session() const;
  const std::vector<Term>& children() const;
  std::size_t width() const;
  const std::string& key() const;
  // Node count.
  std::size_t size() const;
  bool is_ground() const;

  std::string str() const;

  friend bool operator==(const Term& a, const Term& b) { return a.node_ == b.node_ || a.key() == b.key(); }
  friend std::strong_ordering operator<=>(const Term& a, const Term& b) { return a.key() <=> b.key(); }

  struct Node;

 private:
  explicit Term(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  const Node& node() const;
  friend Term make_node(Kind, std::string, int, std::vector<Term>, std::size_t);

  std::shared_ptr<const Node> node_;
};

// Raw constructors: widths are checked, nothing is simplified.
Term atom(std::string name, std::size_t width);
Term nonce(std::string name, int session, std::size_t width);
Term var(std::string name, std::size_t width);
Term zero(std::size_t width);
Term concat(const Term& a, const Term& b);
Term xor_of(std::vector<Term> terms);
Term hash(std::string fn, const Term& input, std::size_t width);
Term left(const Term& t);
Term right(const Term& t);

// Canonical form: xor flattened, zero dropped, pairs cancelled, children
// sorted; concatenation right-nested; left/right of a concatenation that
// splits exactly at the half reduce to the half; concat(left(x), right(x))
// rejoins to x; left/right of zero is zero. Idempotent.
Term normalize(const Term& t);

// Normalized xor of two terms.
Term operator^(const Term& a, const Term& b);

// Replaces variables by name and normalizes the result.
Term substitute(const Term& t, const std::map<std::string, Term>& bindings);

// Xor factors of a normalized term: its children for Xor, none for Zero,
// otherwise the term itself.
std::vector<Term> xor_factors(const Term& t);
// Components of a right-nested concatenation chain.
std::vector<Term> concat_components(const Term& t);
// Normalized right-nested chain; a single component is returned as is.
Term concat_chain(const std::vector<Term>& parts);

void collect_subterms(const Term& t, std::set<Term>& out);
std::set<std::string> variables(const Term& t);

}  // namespace bioauth::dy
