#include "bioauth/dolev_yao/knowledge.hpp"

#include <algorithm>
#include <iterator>
#include <optional>

#include "bioauth/errors.hpp"

namespace bioauth::dy {

KnowledgeSet::KnowledgeSet(const std::vector<Term>& terms) {
  for (const auto& t : terms) add(t);
}

std::size_t KnowledgeSet::add(const Term& t) {
  const Term n = normalize(t);
  if (!n.is_ground()) throw Error("knowledge term has free variables: " + n.str());
  auto [it, inserted] = index_.emplace(n.key(), terms_.size());
  if (inserted) terms_.push_back(n);
  return it->second;
}

bool KnowledgeSet::has(const Term& t) const { return index_.contains(normalize(t).key()); }

namespace {

using Vec = std::vector<int>;

Vec symdiff(const Vec& a, const Vec& b) {
  Vec out;
  std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

}  // namespace

int Closure::factor_id(const Term& f) const {
  auto it = factor_ids_.find(f.key());
  return it == factor_ids_.end() ? -1 : it->second;
}

int Closure::factor_id_or_add(const Term& f) {
  auto [it, inserted] = factor_ids_.emplace(f.key(), static_cast<int>(factor_ids_.size()));
  return it->second;
}

Closure::Vec Closure::vector_of(const Term& t) const {
  Vec v;
  for (const auto& f : xor_factors(t)) {
    const int id = factor_id(f);
    if (id < 0) return {-1};
    v.push_back(id);
  }
  std::sort(v.begin(), v.end());
  return v;
}

void Closure::reduce(const Span& span, Vec& v, Vec& combo) {
  while (!v.empty()) {
    auto it = span.rows.find(v.back());
    if (it == span.rows.end()) return;
    v = symdiff(v, it->second.factors);
    combo = symdiff(combo, it->second.combo);
  }
}

bool Closure::add_member(const Term& t, Derivation d) {
  Vec v;
  for (const auto& f : xor_factors(t)) v.push_back(factor_id_or_add(f));
  std::sort(v.begin(), v.end());
  Vec combo;
  auto& span = spans_[t.width()];
  reduce(span, v, combo);
  if (v.empty()) return false;
  const int index = static_cast<int>(members_.size());
  combo = symdiff(combo, Vec{index});
  const int pivot = v.back();
  span.rows.emplace(pivot, Row{std::move(v), std::move(combo)});
  members_.push_back(t);
  derivations_.push_back(std::move(d));
  return true;
}

bool Closure::contains(const Term& t) const {
  Vec v = vector_of(normalize(t));
  if (!v.empty() && v.front() < 0) return false;
  if (v.empty()) return true;
  auto it = spans_.find(t.width());
  if (it == spans_.end()) return false;
  Vec combo;
  reduce(it->second, v, combo);
  return v.empty();
}

bool Closure::composable(const Term& t) const {
  switch (t.kind()) {
    case Kind::Zero:
      return true;
    case Kind::Concat:
      return derivable(t.children()[0]) && derivable(t.children()[1]);
    case Kind::Hash:
    case Kind::Left:
    case Kind::Right:
      return derivable(t.children()[0]);
    default:
      return false;
  }
}

bool Closure::derivable(const Term& raw) const {
  const Term t = normalize(raw);
  if (!t.is_ground()) return false;
  if (contains(t)) return true;
  if (t.kind() != Kind::Xor) return composable(t);
  // Xor of spanned factors and freshly composed ones. Composed factors get
  // ids above the closure's own.
  Span span;
  if (auto it = spans_.find(t.width()); it != spans_.end()) span = it->second;
  std::map<std::string, int> extra;
  int next = static_cast<int>(factor_ids_.size());
  Vec v;
  for (const auto& f : t.children()) {
    int id = factor_id(f);
    if (!contains(f) && composable(f)) {
      if (id < 0) id = extra.emplace(f.key(), next++).first->second;
      Vec row{id};
      Vec unused;
      reduce(span, row, unused);
      if (!row.empty()) span.rows.emplace(row.back(), Row{row, {}});
    } else if (id < 0) {
      return false;
    }
    v.push_back(id);
  }
  std::sort(v.begin(), v.end());
  Vec combo;
  reduce(span, v, combo);
  return v.empty();
}

BitString Closure::evaluate(const Term& t, std::span<const BitString> known, const FunctionEval& fn) const {
  std::map<std::string, BitString> memo;
  return evaluate_any(normalize(t), known, fn, memo);
}

BitString Closure::evaluate_member(std::size_t index, std::span<const BitString> known, const FunctionEval& fn,
                                   std::map<std::string, BitString>& memo) const {
  const std::string memo_key = "#member" + std::to_string(index);
  if (auto it = memo.find(memo_key); it != memo.end()) return it->second;
  const Term& m = members_.at(index);
  const Derivation& d = derivations_.at(index);
  BitString value;
  switch (d.rule) {
    case Rule::Known:
      if (d.source >= known.size()) throw Error("closure: no value for knowledge item " + std::to_string(d.source));
      value = known[d.source];
      break;
    case Rule::Compose:
      switch (m.kind()) {
        case Kind::Concat:
          value = concat(evaluate_any(m.children()[0], known, fn, memo), evaluate_any(m.children()[1], known, fn, memo));
          break;
        case Kind::Hash:
          value = fn(m.name(), evaluate_any(m.children()[0], known, fn, memo), m.width());
          break;
        case Kind::Left:
          value = left_half(evaluate_any(m.children()[0], known, fn, memo));
          break;
        case Kind::Right:
          value = right_half(evaluate_any(m.children()[0], known, fn, memo));
          break;
        default:
          throw Error("closure: bad composed member " + m.str());
      }
      break;
    case Rule::Project:
      value = slice(evaluate_any(d.from, known, fn, memo), d.offset, m.width());
      break;
    case Rule::Rejoin:
      value = concat(evaluate_any(normalize(left(m)), known, fn, memo),
                     evaluate_any(normalize(right(m)), known, fn, memo));
      break;
  }
  if (value.width() != m.width()) {
    throw WidthError("closure: value of " + m.str() + " has " + std::to_string(value.width()) + " bits");
  }
  memo.emplace(memo_key, value);
  return value;
}

BitString Closure::evaluate_any(const Term& t, std::span<const BitString> known, const FunctionEval& fn,
                                std::map<std::string, BitString>& memo) const {
  if (auto it = memo.find(t.key()); it != memo.end()) return it->second;
  BitString value(t.width());
  auto xor_members = [&](const Vec& combo) {
    for (int i : combo) {
      if (i >= 0) value ^= evaluate_member(static_cast<std::size_t>(i), known, fn, memo);
    }
  };

  if (contains(t)) {
    Vec v = vector_of(t);
    Vec combo;
    if (!v.empty()) reduce(spans_.at(t.width()), v, combo);
    xor_members(combo);
  } else if (t.kind() == Kind::Xor) {
    // Extend the span with composable factors; they carry negative ids.
    Span span;
    if (auto it = spans_.find(t.width()); it != spans_.end()) span = it->second;
    std::vector<Term> extras;
    std::map<std::string, int> ids;
    int next = static_cast<int>(factor_ids_.size());
    Vec v;
    for (const auto& f : t.children()) {
      int id = factor_id(f);
      if (!contains(f) && composable(f)) {
        if (id < 0) id = ids.emplace(f.key(), next++).first->second;
        Vec row{id};
        Vec combo{-static_cast<int>(extras.size()) - 1};
        extras.push_back(f);
        reduce(span, row, combo);
        if (!row.empty()) span.rows.emplace(row.back(), Row{row, combo});
      } else if (id < 0) {
        throw Error("closure: term not derivable: " + t.str());
      }
      v.push_back(id);
    }
    std::sort(v.begin(), v.end());
    Vec combo;
    reduce(span, v, combo);
    if (!v.empty()) throw Error("closure: term not derivable: " + t.str());
    xor_members(combo);
    for (int i : combo) {
      if (i < 0) value ^= evaluate_any(extras.at(static_cast<std::size_t>(-i - 1)), known, fn, memo);
    }
  } else {
    switch (t.kind()) {
      case Kind::Zero:
        break;
      case Kind::Concat:
        value = concat(evaluate_any(t.children()[0], known, fn, memo), evaluate_any(t.children()[1], known, fn, memo));
        break;
      case Kind::Hash:
        value = fn(t.name(), evaluate_any(t.children()[0], known, fn, memo), t.width());
        break;
      case Kind::Left:
        value = left_half(evaluate_any(t.children()[0], known, fn, memo));
        break;
      case Kind::Right:
        value = right_half(evaluate_any(t.children()[0], known, fn, memo));
        break;
      default:
        throw Error("closure: term not derivable: " + t.str());
    }
  }
  memo.emplace(t.key(), value);
  return value;
}

Closure close(const KnowledgeSet& k, std::size_t depth, std::span<const Term> goals, std::size_t term_cap) {
  Closure c;
  for (std::size_t i = 0; i < k.size(); ++i) c.add_member(k.terms()[i], {Closure::Rule::Known, i, {}, 0});

  std::set<Term> universe_set;
  for (const auto& t : k.terms()) collect_subterms(t, universe_set);
  for (const auto& g : goals) collect_subterms(normalize(g), universe_set);
  std::vector<Term> universe;
  for (const auto& u : universe_set) {
    if (u.is_ground()) universe.push_back(u);
  }
  std::stable_sort(universe.begin(), universe.end(),
                   [](const Term& a, const Term& b) { return a.size() < b.size(); });

  for (;;) {
    std::vector<std::pair<Term, Closure::Derivation>> candidates;
    for (const auto& u : universe) {
      if (c.contains(u)) {
        if (u.kind() != Kind::Concat) continue;
        std::size_t offset = 0;
        for (const auto& part : concat_components(u)) {
          if (!c.contains(part)) candidates.push_back({part, {Closure::Rule::Project, 0, u, offset}});
          offset += part.width();
        }
        continue;
      }
      bool composed = false;
      switch (u.kind()) {
        case Kind::Concat:
          composed = c.contains(u.children()[0]) && c.contains(u.children()[1]);
          break;
        case Kind::Hash:
        case Kind::Left:
        case Kind::Right:
          composed = c.contains(u.children()[0]);
          break;
        default:
          break;
      }
      if (composed) {
        candidates.push_back({u, {Closure::Rule::Compose, 0, {}, 0}});
      } else if (u.width() % 2 == 0 && u.kind() != Kind::Concat && u.width() > 0) {
        // Both halves known: the whole is their concatenation.
        if (c.contains(normalize(left(u))) && c.contains(normalize(right(u)))) {
          candidates.push_back({u, {Closure::Rule::Rejoin, 0, {}, 0}});
        }
      }
    }
    if (candidates.empty()) break;
    if (c.rounds_ == depth) {
      c.complete_ = false;
      break;
    }
    ++c.rounds_;
    for (auto& [t, d] : candidates) {
      if (t.size() > term_cap) {
        c.complete_ = false;
        continue;
      }
      c.add_member(t, std::move(d));
    }
  }
  return c;
}

bool derivable(const KnowledgeSet& k, const Term& goal, std::size_t depth) {
  const Term g = normalize(goal);
  const Term goals[] = {g};
  return close(k, depth, goals).derivable(g);
}

}  // namespace bioauth::dy
