#include "bioauth/dolev_yao/search.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>

#include "bioauth/errors.hpp"

namespace bioauth::dy {

Term agent_secret(const ProtocolSpec& spec, const std::string& name, const std::string& agent) {
  return atom(name + "_" + agent, spec.name_decl(name).width);
}

namespace {

ThreadSpec make_thread(const ProtocolSpec& spec, const std::string& role, int session, const std::string& agent,
                       bool honest_peer) {
  ThreadSpec t{role, session, {}, honest_peer, agent};
  for (const auto& d : spec.names) {
    if (!d.fresh) t.secrets.emplace(d.name, agent_secret(spec, d.name, agent));
  }
  return t;
}

std::vector<Term> honest_secrets(const ProtocolSpec& spec, const std::string& agent) {
  std::vector<Term> out;
  for (const auto& s : spec.secrecy) out.push_back(agent_secret(spec, s, agent));
  return out;
}

}  // namespace

Scenario replay_scenario(const ProtocolSpec& spec) {
  Scenario s;
  s.name = spec.name + "/replay";
  for (int session = 1; session <= 2; ++session) {
    for (const auto& role : spec.roles) s.threads.push_back(make_thread(spec, role, session, "A", true));
  }
  s.secrets = honest_secrets(spec, "A");
  return s;
}

Scenario mitm_scenario(const ProtocolSpec& spec) {
  Scenario s;
  s.name = spec.name + "/mitm";
  for (const auto& role : spec.roles) s.threads.push_back(make_thread(spec, role, 1, "A", true));
  s.threads.push_back(make_thread(spec, spec.roles[0], 2, "th", false));
  s.threads.push_back(make_thread(spec, spec.roles[1], 3, "ri", false));
  for (const auto& agent : {"th", "ri"}) {
    for (const auto& d : spec.names) {
      if (!d.fresh) s.intruder_knowledge.push_back(agent_secret(spec, d.name, agent));
    }
  }
  s.secrets = honest_secrets(spec, "A");
  return s;
}

Scenario scenario_for_sessions(const ProtocolSpec& spec, int sessions) {
  if (sessions == 2) return replay_scenario(spec);
  if (sessions == 3) return mitm_scenario(spec);
  throw ConfigError("symbolic scenarios have 2 (replay) or 3 (man-in-the-middle) sessions, not " +
                    std::to_string(sessions));
}

Term intruder_nonce(const std::string& var, std::size_t thread, std::size_t width) {
  return nonce("i." + var, static_cast<int>(thread), width);
}

namespace {

std::vector<int> steps_of(const ProtocolSpec& spec, const std::string& role) {
  std::vector<int> out;
  for (const auto& s : spec.steps) {
    if (s.sender == role || s.receiver == role) out.push_back(s.number);
  }
  return out;
}

Bindings initial_bindings(const ProtocolSpec& spec, const ThreadSpec& t) {
  Bindings b = t.secrets;
  for (const auto& d : spec.names) {
    if (d.fresh && d.owner == t.role) b.emplace(d.name, nonce(d.name, t.session, d.width));
  }
  return b;
}

// Variables a thread learns only on receipt, in name order.
std::vector<std::string> receivable(const ProtocolSpec& spec, const ThreadSpec& t) {
  const Bindings b = initial_bindings(spec, t);
  std::set<std::string> out;
  for (const auto& s : spec.steps) {
    if (s.receiver != t.role) continue;
    for (const auto& f : s.fields) {
      for (const auto& v : variables(f)) {
        if (!b.contains(v)) out.insert(v);
      }
    }
  }
  return {out.begin(), out.end()};
}

std::string bindings_key(const Bindings& b) {
  std::string k;
  for (const auto& [name, t] : b) k += name + "=" + t.key() + ",";
  return k;
}

}  // namespace

KnowledgeSet initial_knowledge(const ProtocolSpec& spec, const Scenario& scenario) {
  KnowledgeSet k(scenario.intruder_knowledge);
  for (std::size_t i = 0; i < scenario.threads.size(); ++i) {
    for (const auto& v : receivable(spec, scenario.threads[i])) {
      k.add(intruder_nonce(v, i, spec.name_decl(v).width));
    }
  }
  return k;
}

// ---------------------------------------------------------------- unify

namespace {

void unify_into(const Term& pattern, const Term& target, const Bindings& base, std::vector<Bindings>& out);

// Unifies the pairs in order, threading every partial solution through.
std::vector<Bindings> unify_pairs(const std::vector<std::pair<Term, Term>>& pairs, const Bindings& base) {
  std::vector<Bindings> current{base};
  for (const auto& [p, t] : pairs) {
    std::vector<Bindings> next;
    for (const auto& b : current) unify_into(p, t, b, next);
    current = std::move(next);
    if (current.empty()) break;
  }
  return current;
}

void unify_xor(const Term& p, const Term& target, const Bindings& base, std::vector<Bindings>& out) {
  std::vector<Term> ground;
  std::vector<Term> open;
  for (const auto& f : xor_factors(p)) (f.is_ground() ? ground : open).push_back(f);

  // A lone variable factor is solved linearly.
  if (open.size() == 1 && open.front().kind() == Kind::Var) {
    Term value = target;
    for (const auto& g : ground) value = value ^ g;
    Bindings b = base;
    b[open.front().name()] = value;
    out.push_back(std::move(b));
  }

  // Factor-by-factor matching once the ground factors are cancelled.
  std::vector<Term> rest = xor_factors(target);
  for (const auto& g : ground) {
    auto it = std::find(rest.begin(), rest.end(), g);
    if (it == rest.end()) return;
    rest.erase(it);
  }
  if (rest.size() != open.size() || open.size() > 4) return;
  std::vector<std::size_t> order(rest.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  do {
    std::vector<std::pair<Term, Term>> pairs;
    for (std::size_t i = 0; i < open.size(); ++i) pairs.emplace_back(open[i], rest[order[i]]);
    for (auto& b : unify_pairs(pairs, base)) out.push_back(std::move(b));
  } while (std::next_permutation(order.begin(), order.end()));
}

void unify_into(const Term& pattern, const Term& target, const Bindings& base, std::vector<Bindings>& out) {
  const Term p = substitute(pattern, base);
  if (p.width() != target.width()) return;
  if (p.is_ground()) {
    if (p == target) out.push_back(base);
    return;
  }
  switch (p.kind()) {
    case Kind::Var: {
      Bindings b = base;
      b[p.name()] = target;
      out.push_back(std::move(b));
      return;
    }
    case Kind::Xor:
      unify_xor(p, target, base, out);
      return;
    case Kind::Hash:
      if (target.kind() == Kind::Hash && target.name() == p.name()) {
        unify_into(p.children()[0], target.children()[0], base, out);
      }
      return;
    case Kind::Left:
    case Kind::Right:
      if (target.kind() == p.kind()) unify_into(p.children()[0], target.children()[0], base, out);
      return;
    case Kind::Concat: {
      const auto ps = concat_components(p);
      const auto ts = concat_components(target);
      if (ps.size() != ts.size()) return;
      std::vector<std::pair<Term, Term>> pairs;
      for (std::size_t i = 0; i < ps.size(); ++i) {
        if (ps[i].width() != ts[i].width()) return;
        pairs.emplace_back(ps[i], ts[i]);
      }
      for (auto& b : unify_pairs(pairs, base)) out.push_back(std::move(b));
      return;
    }
    default:
      return;
  }
}

}  // namespace

std::vector<Bindings> unify(const Term& pattern, const Term& target, const Bindings& base) {
  std::vector<Bindings> raw;
  unify_into(normalize(pattern), normalize(target), base, raw);
  std::vector<Bindings> out;
  std::set<std::string> seen;
  for (auto& b : raw) {
    if (seen.insert(bindings_key(b)).second) out.push_back(std::move(b));
  }
  return out;
}

// ---------------------------------------------------------------- search

namespace {

struct State {
  std::vector<std::size_t> pos;  // index into the thread's step list
  std::vector<Bindings> bindings;
  KnowledgeSet knowledge;
  std::vector<TraceEvent> events;
};

class Searcher {
 public:
  Searcher(const ProtocolSpec& spec, const Scenario& scenario, const SearchOptions& options)
      : spec_(spec), scenario_(scenario), options_(options) {
    if (scenario.threads.empty() || scenario.threads.size() > 4) {
      throw ConfigError("a symbolic scenario has between 1 and 4 role threads");
    }
    for (const auto& t : scenario.threads) {
      if (std::find(spec.roles.begin(), spec.roles.end(), t.role) == spec.roles.end()) {
        throw ConfigError("scenario thread plays unknown role " + t.role);
      }
      steps_.push_back(steps_of(spec, t.role));
    }
  }

  SearchResult run() {
    State s;
    s.pos.assign(scenario_.threads.size(), 0);
    for (const auto& t : scenario_.threads) s.bindings.push_back(initial_bindings(spec_, t));
    s.knowledge = initial_knowledge(spec_, scenario_);
    explore(std::move(s));
    return result_;
  }

 private:
  const MessageStep* next_step(const State& s, std::size_t thread) const {
    if (s.pos[thread] >= steps_[thread].size()) return nullptr;
    return &spec_.step(steps_[thread][s.pos[thread]]);
  }

  bool past(const State& s, std::size_t thread, int step) const {
    const auto& list = steps_[thread];
    auto it = std::find(list.begin(), list.end(), step);
    return it != list.end() && s.pos[thread] > static_cast<std::size_t>(it - list.begin());
  }

  void send_eagerly(State& s) const {
    for (std::size_t i = 0; i < scenario_.threads.size(); ++i) {
      while (const MessageStep* step = next_step(s, i)) {
        if (step->sender != scenario_.threads[i].role) break;
        TraceEvent e{TraceEvent::Type::Send, i, step->number, {}};
        for (const auto& f : step->fields) {
          Term t = substitute(f, s.bindings[i]);
          if (!t.is_ground()) throw Error("thread sends unbound variables: " + t.str());
          s.knowledge.add(t);
          e.fields.push_back(std::move(t));
        }
        s.events.push_back(std::move(e));
        ++s.pos[i];
      }
    }
  }

  std::string key_of(const State& s) const {
    std::string k;
    for (std::size_t i = 0; i < s.pos.size(); ++i) k += std::to_string(s.pos[i]) + ":" + bindings_key(s.bindings[i]) + "|";
    return k;
  }

  std::string describe_values(const AcceptDecl& a, const Bindings& b) const {
    std::string out;
    for (const auto& v : a.values) out += (out.empty() ? "" : ", ") + v + "=" + b.at(v).str();
    return out;
  }

  std::string thread_name(std::size_t i) const {
    const auto& t = scenario_.threads[i];
    return t.role + "#" + std::to_string(t.session) + "(" + t.agent + ")";
  }

  // Injective agreement per accept declaration, by bipartite matching.
  std::optional<AttackTrace> agreement_violation(const State& s) const {
    for (const auto& a : spec_.accepts) {
      std::vector<std::size_t> committers;
      std::vector<std::size_t> emitters;
      for (std::size_t i = 0; i < scenario_.threads.size(); ++i) {
        const auto& t = scenario_.threads[i];
        if (!t.honest_peer) continue;
        if (t.role == a.role && past(s, i, a.step)) committers.push_back(i);
        if (t.role == a.peer && past(s, i, a.step)) emitters.push_back(i);
      }
      auto agrees = [&](std::size_t c, std::size_t e) {
        if (scenario_.threads[c].secrets != scenario_.threads[e].secrets) return false;
        for (const auto& v : a.values) {
          auto x = s.bindings[c].find(v);
          auto y = s.bindings[e].find(v);
          if (x == s.bindings[c].end() || y == s.bindings[e].end() || !(x->second == y->second)) return false;
        }
        return true;
      };
      std::vector<int> owner(emitters.size(), -1);
      std::function<bool(std::size_t, std::vector<bool>&)> augment = [&](std::size_t ci, std::vector<bool>& seen) {
        for (std::size_t ei = 0; ei < emitters.size(); ++ei) {
          if (seen[ei] || !agrees(committers[ci], emitters[ei])) continue;
          seen[ei] = true;
          if (owner[ei] < 0 || augment(static_cast<std::size_t>(owner[ei]), seen)) {
            owner[ei] = static_cast<int>(ci);
            return true;
          }
        }
        return false;
      };
      for (std::size_t ci = 0; ci < committers.size(); ++ci) {
        std::vector<bool> seen(emitters.size(), false);
        if (!augment(ci, seen)) {
          const std::size_t c = committers[ci];
          AttackTrace trace;
          trace.goal = "agreement:" + a.role + ":" + std::to_string(a.step);
          trace.description = thread_name(c) + " accepted step " + std::to_string(a.step) + " on (" +
                              describe_values(a, s.bindings[c]) + ") without its own matching " + a.peer + " run";
          trace.events = s.events;
          return trace;
        }
      }
    }
    return std::nullopt;
  }

  std::vector<Term> targets(const State& s, const Closure& c) const {
    std::set<Term> all;
    for (const auto& t : s.knowledge.terms()) collect_subterms(t, all);
    for (const auto& m : c.members()) collect_subterms(m, all);
    return {all.begin(), all.end()};
  }

  // Intruder-supplied bindings for thread `i`'s next receive.
  std::vector<Bindings> candidates(const State& s, std::size_t i, const MessageStep& step, const Closure& c) const {
    const Bindings& base = s.bindings[i];
    std::vector<Term> fields;
    for (const auto& f : step.fields) fields.push_back(substitute(f, base));
    const auto pool = targets(s, c);

    std::vector<Bindings> partial{base};
    for (const auto& f : fields) {
      if (f.is_ground() || f.kind() == Kind::Var) continue;
      std::vector<Bindings> next = partial;
      for (const auto& b : partial) {
        const Term g = substitute(f, b);
        if (g.is_ground()) continue;
        for (const auto& t : pool) {
          if (t.width() != g.width() || t.kind() == Kind::Var) continue;
          for (auto& u : unify(g, t, b)) next.push_back(std::move(u));
        }
      }
      partial = std::move(next);
    }

    std::vector<Bindings> out;
    std::set<std::string> seen;
    for (const auto& b : partial) {
      std::set<std::string> open;
      for (const auto& f : fields) {
        for (const auto& v : variables(substitute(f, b))) open.insert(v);
      }
      std::vector<std::string> vars(open.begin(), open.end());
      std::vector<std::vector<Term>> options;
      for (const auto& v : vars) {
        const std::size_t w = spec_.name_decl(v).width;
        std::vector<Term> opts;
        for (const auto& t : pool) {
          if (t.kind() == Kind::Nonce && t.name() == v && t.width() == w) opts.push_back(t);
        }
        opts.push_back(intruder_nonce(v, i, w));
        options.push_back(std::move(opts));
      }
      std::vector<std::size_t> pick(vars.size(), 0);
      for (;;) {
        Bindings full = b;
        for (std::size_t k = 0; k < vars.size(); ++k) full[vars[k]] = options[k][pick[k]];
        bool ok = true;
        for (const auto& f : fields) {
          const Term g = substitute(f, full);
          if (!g.is_ground() || !c.derivable(g)) {
            ok = false;
            break;
          }
        }
        if (ok && seen.insert(bindings_key(full)).second) out.push_back(std::move(full));
        std::size_t k = 0;
        while (k < vars.size() && ++pick[k] == options[k].size()) pick[k++] = 0;
        if (k == vars.size()) break;
      }
    }
    return out;
  }

  // True once an attack is found or the budget is spent.
  bool explore(State s) {
    send_eagerly(s);
    if (!visited_.insert(key_of(s)).second) return false;
    if (++result_.states > options_.state_budget) {
      result_.incomplete = true;
      return true;
    }
    const Closure c = close(s.knowledge, options_.depth, scenario_.secrets, options_.term_cap);
    if (!c.complete()) result_.incomplete = true;
    for (const auto& secret : scenario_.secrets) {
      if (c.derivable(secret)) {
        result_.attack = AttackTrace{"secrecy:" + secret.str(), "intruder derives " + secret.str(), s.events};
        return true;
      }
    }
    if (auto violation = agreement_violation(s)) {
      result_.attack = std::move(violation);
      return true;
    }
    for (std::size_t i = 0; i < scenario_.threads.size(); ++i) {
      const MessageStep* step = next_step(s, i);
      if (!step || step->receiver != scenario_.threads[i].role) continue;
      for (auto& b : candidates(s, i, *step, c)) {
        State next = s;
        TraceEvent e{TraceEvent::Type::Receive, i, step->number, {}};
        for (const auto& f : step->fields) e.fields.push_back(substitute(f, b));
        next.bindings[i] = std::move(b);
        next.events.push_back(std::move(e));
        ++next.pos[i];
        if (explore(std::move(next))) return true;
      }
    }
    return false;
  }

  const ProtocolSpec& spec_;
  const Scenario& scenario_;
  SearchOptions options_;
  std::vector<std::vector<int>> steps_;
  std::set<std::string> visited_;
  SearchResult result_;
};

}  // namespace

SearchResult search_attacks(const ProtocolSpec& spec, const Scenario& scenario, const SearchOptions& options) {
  return Searcher(spec, scenario, options).run();
}

std::string to_string(const AttackTrace& trace, const Scenario& scenario) {
  std::ostringstream out;
  out << trace.goal << ": " << trace.description << "\n";
  for (const auto& e : trace.events) {
    const auto& t = scenario.threads.at(e.thread);
    out << "  " << (e.type == TraceEvent::Type::Send ? "send " : "recv ") << t.role << "#" << t.session << "("
        << t.agent << ") step " << e.step << ":";
    for (std::size_t i = 0; i < e.fields.size(); ++i) out << (i ? ", " : " ") << e.fields[i].str();
    out << "\n";
  }
  return out.str();
}

}  // namespace bioauth::dy
