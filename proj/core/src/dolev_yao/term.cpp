#include "bioauth/dolev_yao/term.hpp"

#include <algorithm>

#include "bioauth/errors.hpp"

namespace bioauth::dy {

struct Term::Node {
  Kind kind;
  std::string name;
  int session = 0;
  std::vector<Term> children;
  std::size_t width = 0;
  std::string key;
  std::size_t size = 1;
  bool ground = true;
};

namespace {

std::string build_key(Kind kind, const std::string& name, int session, const std::vector<Term>& children,
                      std::size_t width) {
  auto joined = [&] {
    std::string s;
    for (std::size_t i = 0; i < children.size(); ++i) {
      if (i) s += ';';
      s += children[i].key();
    }
    return s;
  };
  switch (kind) {
    case Kind::Atom:
      return "a:" + name;
    case Kind::Nonce:
      return "n:" + name + "@" + std::to_string(session);
    case Kind::Var:
      return "v:" + name;
    case Kind::Zero:
      return "0:" + std::to_string(width);
    case Kind::Concat:
      return "c(" + joined() + ")";
    case Kind::Xor:
      return "x(" + joined() + ")";
    case Kind::Hash:
      return "h:" + name + "(" + joined() + ")";
    case Kind::Left:
      return "L(" + joined() + ")";
    case Kind::Right:
      return "R(" + joined() + ")";
  }
  return {};
}

}  // namespace

Term make_node(Kind kind, std::string name, int session, std::vector<Term> children, std::size_t width) {
  auto n = std::make_shared<Term::Node>();
  n->kind = kind;
  n->ground = kind != Kind::Var;
  for (const auto& c : children) {
    n->size += c.size();
    n->ground = n->ground && c.is_ground();
  }
  n->key = build_key(kind, name, session, children, width);
  n->name = std::move(name);
  n->session = session;
  n->children = std::move(children);
  n->width = width;
  return Term(std::move(n));
}

const Term::Node& Term::node() const {
  if (!node_) throw Error("dolev_yao: use of an empty term");
  return *node_;
}

Kind Term::kind() const { return node().kind; }
const std::string& Term::name() const { return node().name; }
int Term::session() const { return node().session; }
const std::vector<Term>& Term::children() const { return node().children; }
std::size_t Term::width() const { return node().width; }
const std::string& Term::key() const { return node().key; }
std::size_t Term::size() const { return node().size; }
bool Term::is_ground() const { return node().ground; }

std::string Term::str() const {
  const auto& n = node();
  switch (n.kind) {
    case Kind::Atom:
      return n.name;
    case Kind::Nonce:
      return n.name + "#" + std::to_string(n.session);
    case Kind::Var:
      return "?" + n.name;
    case Kind::Zero:
      return "0";
    case Kind::Concat:
      return n.children[0].str() + "." + n.children[1].str();
    case Kind::Xor: {
      std::string s = "(";
      for (std::size_t i = 0; i < n.children.size(); ++i) s += (i ? " ^ " : "") + n.children[i].str();
      return s + ")";
    }
    case Kind::Hash:
      return n.name + "(" + n.children[0].str() + ")";
    case Kind::Left:
      return "left(" + n.children[0].str() + ")";
    case Kind::Right:
      return "right(" + n.children[0].str() + ")";
  }
  return {};
}

Term atom(std::string name, std::size_t width) { return make_node(Kind::Atom, std::move(name), 0, {}, width); }

Term nonce(std::string name, int session, std::size_t width) {
  return make_node(Kind::Nonce, std::move(name), session, {}, width);
}

Term var(std::string name, std::size_t width) { return make_node(Kind::Var, std::move(name), 0, {}, width); }

Term zero(std::size_t width) { return make_node(Kind::Zero, {}, 0, {}, width); }

Term concat(const Term& a, const Term& b) { return make_node(Kind::Concat, {}, 0, {a, b}, a.width() + b.width()); }

Term xor_of(std::vector<Term> terms) {
  if (terms.empty()) throw Error("xor_of: no operands");
  const std::size_t w = terms.front().width();
  for (const auto& t : terms) {
    if (t.width() != w) {
      throw WidthError("xor of " + std::to_string(w) + "-bit and " + std::to_string(t.width()) + "-bit terms");
    }
  }
  return make_node(Kind::Xor, {}, 0, std::move(terms), w);
}

Term hash(std::string fn, const Term& input, std::size_t width) {
  return make_node(Kind::Hash, std::move(fn), 0, {input}, width);
}

namespace {

Term half(Kind kind, const Term& t) {
  if (t.width() % 2 != 0) throw WidthError("projection of odd-width term " + t.str());
  return make_node(kind, {}, 0, {t}, t.width() / 2);
}

void flatten_concat(const Term& t, std::vector<Term>& out) {
  if (t.kind() == Kind::Concat) {
    flatten_concat(t.children()[0], out);
    flatten_concat(t.children()[1], out);
  } else {
    out.push_back(t);
  }
}

bool is_pair_of_halves(const Term& a, const Term& b) {
  return a.kind() == Kind::Left && b.kind() == Kind::Right && a.children()[0] == b.children()[0];
}

// Prefix of `parts` whose widths sum to `target`, or nullopt.
std::optional<std::size_t> split_at(const std::vector<Term>& parts, std::size_t target) {
  std::size_t sum = 0;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (sum == target) return i;
    sum += parts[i].width();
  }
  return std::nullopt;
}

}  // namespace

Term left(const Term& t) { return half(Kind::Left, t); }
Term right(const Term& t) { return half(Kind::Right, t); }

std::vector<Term> concat_components(const Term& t) {
  std::vector<Term> out;
  flatten_concat(t, out);
  return out;
}

Term concat_chain(const std::vector<Term>& input) {
  if (input.empty()) throw Error("concat_chain: no components");
  // Rejoin adjacent left(x), right(x) pairs; a rejoined x may itself be a chain.
  std::vector<Term> parts;
  for (const auto& p : input) {
    std::vector<Term> pending;
    flatten_concat(p, pending);
    for (auto& q : pending) {
      parts.push_back(std::move(q));
      while (parts.size() >= 2 && is_pair_of_halves(parts[parts.size() - 2], parts.back())) {
        Term whole = parts.back().children()[0];
        parts.pop_back();
        parts.pop_back();
        std::vector<Term> sub;
        flatten_concat(whole, sub);
        for (auto& s : sub) parts.push_back(std::move(s));
      }
    }
  }
  Term out = parts.back();
  for (std::size_t i = parts.size() - 1; i-- > 0;) out = concat(parts[i], out);
  return out;
}

std::vector<Term> xor_factors(const Term& t) {
  if (t.kind() == Kind::Zero) return {};
  if (t.kind() == Kind::Xor) return t.children();
  return {t};
}

Term normalize(const Term& t) {
  switch (t.kind()) {
    case Kind::Atom:
    case Kind::Nonce:
    case Kind::Var:
    case Kind::Zero:
      return t;
    case Kind::Hash:
      return hash(t.name(), normalize(t.children()[0]), t.width());
    case Kind::Concat:
      return concat_chain({normalize(t.children()[0]), normalize(t.children()[1])});
    case Kind::Xor: {
      std::vector<Term> factors;
      for (const auto& c : t.children()) {
        for (auto& f : xor_factors(normalize(c))) factors.push_back(std::move(f));
      }
      std::sort(factors.begin(), factors.end());
      std::vector<Term> kept;
      for (auto& f : factors) {
        if (!kept.empty() && kept.back() == f) {
          kept.pop_back();
        } else {
          kept.push_back(std::move(f));
        }
      }
      if (kept.empty()) return zero(t.width());
      if (kept.size() == 1) return kept.front();
      return xor_of(std::move(kept));
    }
    case Kind::Left:
    case Kind::Right: {
      const Term inner = normalize(t.children()[0]);
      const std::size_t halfw = inner.width() / 2;
      if (inner.kind() == Kind::Zero) return zero(halfw);
      const auto parts = concat_components(inner);
      if (parts.size() > 1) {
        if (auto cut = split_at(parts, halfw)) {
          const std::vector<Term> head(parts.begin(), parts.begin() + static_cast<std::ptrdiff_t>(*cut));
          const std::vector<Term> tail(parts.begin() + static_cast<std::ptrdiff_t>(*cut), parts.end());
          return concat_chain(t.kind() == Kind::Left ? head : tail);
        }
      }
      return t.kind() == Kind::Left ? left(inner) : right(inner);
    }
  }
  return t;
}

Term operator^(const Term& a, const Term& b) { return normalize(xor_of({a, b})); }

namespace {

Term substitute_raw(const Term& t, const std::map<std::string, Term>& bindings) {
  if (t.is_ground()) return t;
  switch (t.kind()) {
    case Kind::Var: {
      auto it = bindings.find(t.name());
      if (it == bindings.end()) return t;
      if (it->second.width() != t.width()) {
        throw WidthError("binding for " + t.name() + " has width " + std::to_string(it->second.width()));
      }
      return it->second;
    }
    case Kind::Hash:
      return hash(t.name(), substitute_raw(t.children()[0], bindings), t.width());
    case Kind::Concat:
      return concat(substitute_raw(t.children()[0], bindings), substitute_raw(t.children()[1], bindings));
    case Kind::Xor: {
      std::vector<Term> cs;
      for (const auto& c : t.children()) cs.push_back(substitute_raw(c, bindings));
      return xor_of(std::move(cs));
    }
    case Kind::Left:
      return left(substitute_raw(t.children()[0], bindings));
    case Kind::Right:
      return right(substitute_raw(t.children()[0], bindings));
    default:
      return t;
  }
}

}  // namespace

Term substitute(const Term& t, const std::map<std::string, Term>& bindings) {
  return normalize(substitute_raw(t, bindings));
}

void collect_subterms(const Term& t, std::set<Term>& out) {
  if (!out.insert(t).second) return;
  for (const auto& c : t.children()) collect_subterms(c, out);
}

std::set<std::string> variables(const Term& t) {
  std::set<std::string> out;
  if (t.is_ground()) return out;
  if (t.kind() == Kind::Var) {
    out.insert(t.name());
    return out;
  }
  for (const auto& c : t.children()) out.merge(variables(c));
  return out;
}

}  // namespace bioauth::dy
