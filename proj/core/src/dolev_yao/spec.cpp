#include "bioauth/dolev_yao/spec.hpp"

#include <algorithm>
#include <cctype>
#include <mutex>
#include <sstream>

#include "bioauth/errors.hpp"

namespace bioauth::dy {

const NameDecl& ProtocolSpec::name_decl(const std::string& n) const {
  for (const auto& d : names) {
    if (d.name == n) return d;
  }
  throw ConfigError("protocol " + name + ": undeclared name " + n);
}

const MessageStep& ProtocolSpec::step(int number) const {
  for (const auto& s : steps) {
    if (s.number == number) return s;
  }
  throw ConfigError("protocol " + name + ": no step " + std::to_string(number));
}

namespace {

struct Token {
  enum class Type { Ident, Number, Symbol, End } type = Type::End;
  std::string text;
};

std::vector<Token> tokenize(std::string_view line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    const char c = line[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < line.size() && (std::isalnum(static_cast<unsigned char>(line[j])) || line[j] == '_')) ++j;
      out.push_back({Token::Type::Ident, std::string(line.substr(i, j - i))});
      i = j;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < line.size() && std::isdigit(static_cast<unsigned char>(line[j]))) ++j;
      out.push_back({Token::Type::Number, std::string(line.substr(i, j - i))});
      i = j;
    } else if (std::string_view("()^.,:=").find(c) != std::string_view::npos) {
      out.push_back({Token::Type::Symbol, std::string(1, c)});
      ++i;
    } else {
      throw ParseError(std::string("unexpected character '") + c + "'");
    }
  }
  out.push_back({Token::Type::End, {}});
  return out;
}

class Parser {
 public:
  Parser(ProtocolSpec& spec, std::size_t unit) : spec_(spec), unit_(unit) {}

  void line(std::string_view text) {
    toks_ = tokenize(text);
    pos_ = 0;
    if (peek().type == Token::Type::End) return;
    const std::string keyword = ident();
    if (keyword == "protocol") {
      spec_.name = ident();
    } else if (keyword == "roles") {
      while (peek().type == Token::Type::Ident) spec_.roles.push_back(ident());
      if (spec_.roles.size() != 2) throw ParseError("exactly two roles are supported");
    } else if (keyword == "function") {
      const std::string n = ident();
      spec_.functions[n] = width();
    } else if (keyword == "secret" || keyword == "fresh") {
      NameDecl d;
      d.name = ident();
      d.width = width();
      d.owner = role();
      d.fresh = keyword == "fresh";
      if (declared(d.name)) throw ParseError("name declared twice: " + d.name);
      spec_.names.push_back(d);
    } else if (keyword == "let") {
      const std::string n = ident();
      expect("=");
      macros_[n] = expr();
    } else if (keyword == "send") {
      MessageStep s;
      s.number = static_cast<int>(number());
      if (s.number != static_cast<int>(spec_.steps.size()) + 1) throw ParseError("steps must be numbered 1, 2, ...");
      s.sender = role();
      s.receiver = role();
      if (s.sender == s.receiver) throw ParseError("a role cannot send to itself");
      expect(":");
      s.fields.push_back(normalize(expr()));
      while (accept(",")) s.fields.push_back(normalize(expr()));
      spec_.steps.push_back(std::move(s));
    } else if (keyword == "accept") {
      AcceptDecl a;
      a.role = role();
      a.step = static_cast<int>(number());
      if (ident() != "agree") throw ParseError("expected 'agree'");
      a.peer = role();
      while (peek().type == Token::Type::Ident) {
        a.values.push_back(ident());
        spec_.name_decl(a.values.back());
      }
      const auto& s = spec_.step(a.step);
      if (s.receiver != a.role) throw ParseError("accept: " + a.role + " does not receive step " + std::to_string(a.step));
      spec_.accepts.push_back(std::move(a));
    } else if (keyword == "secrecy") {
      while (peek().type == Token::Type::Ident) {
        spec_.secrecy.push_back(ident());
        if (spec_.name_decl(spec_.secrecy.back()).fresh) throw ParseError("secrecy goals name long-term secrets");
      }
    } else {
      throw ParseError("unknown keyword '" + keyword + "'");
    }
    if (peek().type != Token::Type::End) throw ParseError("trailing input '" + peek().text + "'");
  }

 private:
  const Token& peek() const { return toks_[pos_]; }

  bool accept(const char* symbol) {
    if (peek().type == Token::Type::Symbol && peek().text == symbol) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(const char* symbol) {
    if (!accept(symbol)) throw ParseError(std::string("expected '") + symbol + "'");
  }

  std::string ident() {
    if (peek().type != Token::Type::Ident) throw ParseError("expected a name, got '" + peek().text + "'");
    return toks_[pos_++].text;
  }

  std::size_t number() {
    if (peek().type != Token::Type::Number) throw ParseError("expected a number, got '" + peek().text + "'");
    return std::stoul(toks_[pos_++].text);
  }

  // A literal bit count or the unit width `l`.
  std::size_t width() {
    std::size_t w = 0;
    if (peek().type == Token::Type::Ident && peek().text == "l") {
      ++pos_;
      w = unit_;
    } else {
      w = number();
    }
    if (w == 0) throw ParseError("zero width");
    return w;
  }

  std::string role() {
    std::string r = ident();
    if (std::find(spec_.roles.begin(), spec_.roles.end(), r) == spec_.roles.end()) {
      throw ParseError("unknown role '" + r + "'");
    }
    return r;
  }

  bool declared(const std::string& n) const {
    return std::any_of(spec_.names.begin(), spec_.names.end(), [&](const NameDecl& d) { return d.name == n; });
  }

  Term expr() {
    std::vector<Term> terms{concat_expr()};
    while (accept("^")) terms.push_back(concat_expr());
    return terms.size() == 1 ? terms.front() : xor_of(std::move(terms));
  }

  Term concat_expr() {
    Term t = primary();
    std::vector<Term> parts{t};
    while (accept(".")) parts.push_back(primary());
    Term out = parts.back();
    for (std::size_t i = parts.size() - 1; i-- > 0;) out = concat(parts[i], out);
    return out;
  }

  Term primary() {
    if (accept("(")) {
      Term t = expr();
      expect(")");
      return t;
    }
    const std::string n = ident();
    if (accept("(")) {
      std::vector<Term> args{expr()};
      while (accept(",")) args.push_back(expr());
      expect(")");
      Term input = args.back();
      for (std::size_t i = args.size() - 1; i-- > 0;) input = concat(args[i], input);
      if (n == "left" || n == "right") {
        if (args.size() != 1) throw ParseError(n + " takes one argument");
        return n == "left" ? left(input) : right(input);
      }
      auto fn = spec_.functions.find(n);
      if (fn == spec_.functions.end()) throw ParseError("undeclared function '" + n + "'");
      return hash(n, input, fn->second);
    }
    if (auto m = macros_.find(n); m != macros_.end()) return m->second;
    if (!declared(n)) throw ParseError("undeclared name '" + n + "'");
    return var(n, spec_.name_decl(n).width);
  }

  ProtocolSpec& spec_;
  std::size_t unit_;
  std::map<std::string, Term> macros_;
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace

ProtocolSpec parse_spec(std::string_view text, std::size_t unit) {
  ProtocolSpec spec;
  Parser parser(spec, unit);
  std::istringstream in{std::string(text)};
  std::string raw;
  int number = 0;
  while (std::getline(in, raw)) {
    ++number;
    const auto hash_pos = raw.find('#');
    if (hash_pos != std::string::npos) raw.resize(hash_pos);
    try {
      parser.line(raw);
    } catch (const ParseError& e) {
      throw ParseError("line " + std::to_string(number) + ": " + e.what());
    } catch (const Error& e) {
      throw ParseError("line " + std::to_string(number) + ": " + e.what());
    }
  }
  if (spec.name.empty() || spec.roles.size() != 2 || spec.steps.empty()) {
    throw ParseError("a protocol needs a name, two roles and at least one step");
  }
  return spec;
}

const ProtocolSpec& builtin_spec(const std::string& key, std::size_t unit) {
  static std::mutex mutex;
  static std::map<std::pair<std::string, std::size_t>, ProtocolSpec> cache;
  std::lock_guard lock(mutex);
  if (auto it = cache.find({key, unit}); it != cache.end()) return it->second;
  const auto& texts = embedded_specs();
  auto text = texts.find(key);
  if (text == texts.end()) throw ConfigError("no symbolic description for protocol '" + key + "'");
  return cache.emplace(std::pair{key, unit}, parse_spec(text->second, unit)).first->second;
}

}  // namespace bioauth::dy
