#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "bioauth/bit_string.hpp"
#include "bioauth/dolev_yao/term.hpp"

namespace bioauth::dy {

inline constexpr std::size_t kDefaultDepth = 8;
inline constexpr std::size_t kDefaultTermCap = 64;

// Ordered set of normalized ground terms known to the intruder. The order
// fixes the index used when concrete values are attached later.
class KnowledgeSet {
 public:
  KnowledgeSet() = default;
  explicit KnowledgeSet(const std::vector<Term>& terms);

  // Normalizes; duplicates are ignored. Returns the term's index.
  std::size_t add(const Term& t);
  bool has(const Term& t) const;
  const std::vector<Term>& terms() const noexcept { return terms_; }
  std::size_t size() const noexcept { return terms_.size(); }

 private:
  std::vector<Term> terms_;
  std::map<std::string, std::size_t> index_;
};

// Concrete semantics of a public function symbol.
using FunctionEval = std::function<BitString(const std::string& fn, const BitString& input, std::size_t width)>;

// Intruder knowledge closed under pairing, projection, public functions and
// xor, restricted to subterms of the knowledge and the goals. Xor closure is
// kept implicitly as a GF(2) span per width, so `contains` means "some xor
// combination of closed members equals the term".
class Closure {
 public:
  bool contains(const Term& t) const;
  // contains(t), or t composable from contained terms (a superset of the
  // universe the closure was built over).
  bool derivable(const Term& t) const;

  // False when the depth budget ran out before a fixed point or a candidate
  // exceeded the term-size cap.
  bool complete() const noexcept { return complete_; }
  std::size_t rounds() const noexcept { return rounds_; }
  // Terms that extended the span, in the order they were added.
  const std::vector<Term>& members() const noexcept { return members_; }

  // Bit value of a derivable term given the values of the knowledge set the
  // closure was built from. Throws Error when `t` is not derivable.
  BitString evaluate(const Term& t, std::span<const BitString> known, const FunctionEval& fn) const;

 private:
  friend Closure close(const KnowledgeSet&, std::size_t, std::span<const Term>, std::size_t);

  enum class Rule { Known, Compose, Project, Rejoin };
  struct Derivation {
    Rule rule = Rule::Known;
    std::size_t source = 0;  // Known: knowledge index
    Term from;               // Project: the concatenation; Rejoin: unused
    std::size_t offset = 0;  // Project: bit offset inside `from`
  };
  using Vec = std::vector<int>;  // sorted factor ids
  struct Row {
    Vec factors;
    Vec combo;  // member indices whose xor this row is
  };
  struct Span {
    std::map<int, Row> rows;  // keyed by pivot (largest factor id)
  };

  int factor_id(const Term& f) const;
  int factor_id_or_add(const Term& f);
  Vec vector_of(const Term& t) const;
  // Reduces `v` against `span`; `combo` accumulates the rows used.
  static void reduce(const Span& span, Vec& v, Vec& combo);
  bool add_member(const Term& t, Derivation d);
  bool composable(const Term& t) const;
  BitString evaluate_member(std::size_t index, std::span<const BitString> known, const FunctionEval& fn,
                            std::map<std::string, BitString>& memo) const;
  BitString evaluate_any(const Term& t, std::span<const BitString> known, const FunctionEval& fn,
                         std::map<std::string, BitString>& memo) const;

  std::map<std::string, int> factor_ids_;
  std::map<std::size_t, Span> spans_;  // per width
  std::vector<Term> members_;
  std::vector<Derivation> derivations_;
  bool complete_ = true;
  std::size_t rounds_ = 0;
};

// Synchronous rounds of composition and projection over the universe of
// subterms of `k` and `goals`, at most `depth` rounds. Candidates larger than
// `term_cap` nodes are not added and make the result incomplete.
Closure close(const KnowledgeSet& k, std::size_t depth, std::span<const Term> goals = {},
              std::size_t term_cap = kDefaultTermCap);

bool derivable(const KnowledgeSet& k, const Term& goal, std::size_t depth);

}  // namespace bioauth::dy
