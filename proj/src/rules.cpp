#include "hearth/rules.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>
#include <sstream>

namespace hearth::rules {

std::string to_string(const SourcePos& pos) {
  return std::to_string(pos.line) + ":" + std::to_string(pos.column);
}

// ---------------------------------------------------------------------------
// ExprBox

ExprBox::ExprBox() : ptr_(std::make_unique<Expr>()) {}
ExprBox::ExprBox(Expr expr) : ptr_(std::make_unique<Expr>(std::move(expr))) {}
ExprBox::ExprBox(const ExprBox& other) : ptr_(std::make_unique<Expr>(*other.ptr_)) {}
ExprBox& ExprBox::operator=(const ExprBox& other) {
  if (this != &other) ptr_ = std::make_unique<Expr>(*other.ptr_);
  return *this;
}
ExprBox::~ExprBox() = default;

bool operator==(const ExprBox& a, const ExprBox& b) { return *a.ptr_ == *b.ptr_; }

Expr make_not(Expr operand) { return Expr{NotExpr{ExprBox(std::move(operand))}}; }

Expr make_binary(Connective op, Expr lhs, Expr rhs) {
  return Expr{BinaryExpr{op, ExprBox(std::move(lhs)), ExprBox(std::move(rhs))}};
}

ParseError::ParseError(SourcePos pos, std::vector<std::string> expected, const std::string& message)
    : Error(to_string(pos) + ": " + message), pos_(pos), expected_(std::move(expected)) {}

// ---------------------------------------------------------------------------
// Lexer

namespace {

enum class Tok {
  Ident,
  Number,
  String,
  KwRule,
  KwWhen,
  KwThen,
  KwSet,
  KwAnd,
  KwOr,
  KwNot,
  KwTrue,
  KwFalse,
  KwDisabled,
  Colon,
  Comma,
  Dot,
  LParen,
  RParen,
  Eq,
  Ne,
  Lt,
  Le,
  Gt,
  Ge,
  End,
};

std::string_view spelling(Tok t) {
  switch (t) {
    case Tok::Ident: return "identifier";
    case Tok::Number: return "number";
    case Tok::String: return "string";
    case Tok::KwRule: return "'rule'";
    case Tok::KwWhen: return "'when'";
    case Tok::KwThen: return "'then'";
    case Tok::KwSet: return "'set'";
    case Tok::KwAnd: return "'and'";
    case Tok::KwOr: return "'or'";
    case Tok::KwNot: return "'not'";
    case Tok::KwTrue: return "'true'";
    case Tok::KwFalse: return "'false'";
    case Tok::KwDisabled: return "'disabled'";
    case Tok::Colon: return "':'";
    case Tok::Comma: return "','";
    case Tok::Dot: return "'.'";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::Eq: return "'='";
    case Tok::Ne: return "'!='";
    case Tok::Lt: return "'<'";
    case Tok::Le: return "'<='";
    case Tok::Gt: return "'>'";
    case Tok::Ge: return "'>='";
    case Tok::End: return "end of input";
  }
  return "?";
}

constexpr std::pair<std::string_view, Tok> kKeywords[] = {
    {"rule", Tok::KwRule}, {"when", Tok::KwWhen}, {"then", Tok::KwThen},
    {"set", Tok::KwSet},   {"and", Tok::KwAnd},   {"or", Tok::KwOr},
    {"not", Tok::KwNot},   {"true", Tok::KwTrue}, {"false", Tok::KwFalse},
    {"disabled", Tok::KwDisabled},
};

struct Token {
  Tok kind = Tok::End;
  std::string text;  // identifier name or decoded string contents
  double number = 0.0;
  Unit unit = Unit::None;
  SourcePos pos;
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool digit(char c) { return c >= '0' && c <= '9'; }

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space_and_comments();
      Token t;
      t.pos = pos_;
      if (i_ >= src_.size()) {
        t.kind = Tok::End;
        out.push_back(std::move(t));
        return out;
      }
      const char c = src_[i_];
      if (ident_start(c)) {
        std::size_t start = i_;
        while (i_ < src_.size() && ident_char(src_[i_])) advance();
        t.text = std::string(src_.substr(start, i_ - start));
        t.kind = Tok::Ident;
        for (const auto& [word, kw] : kKeywords)
          if (word == t.text) t.kind = kw;
      } else if (digit(c) || (c == '-' && i_ + 1 < src_.size() && digit(src_[i_ + 1]))) {
        lex_number(t);
      } else if (c == '"') {
        lex_string(t);
      } else {
        lex_punct(t);
      }
      out.push_back(std::move(t));
    }
  }

 private:
  void advance() {
    if (src_[i_] == '\n') {
      ++pos_.line;
      pos_.column = 1;
    } else {
      ++pos_.column;
    }
    ++i_;
  }

  [[noreturn]] void fail(SourcePos at, const std::string& msg) {
    throw ParseError(at, {}, "lexical error: " + msg);
  }

  void skip_space_and_comments() {
    while (i_ < src_.size()) {
      const char c = src_[i_];
      if (c == '#') {
        while (i_ < src_.size() && src_[i_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  void lex_number(Token& t) {
    const std::size_t start = i_;
    if (src_[i_] == '-') advance();
    while (i_ < src_.size() && digit(src_[i_])) advance();
    if (i_ < src_.size() && src_[i_] == '.') {
      advance();
      if (i_ >= src_.size() || !digit(src_[i_])) fail(pos_, "expected digit after '.'");
      while (i_ < src_.size() && digit(src_[i_])) advance();
    }
    const std::string_view digits = src_.substr(start, i_ - start);
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), t.number);
    if (ec != std::errc() || ptr != digits.data() + digits.size())
      fail(t.pos, "bad number '" + std::string(digits) + "'");
    // A unit suffix is attached directly to the digits.
    const SourcePos unit_pos = pos_;
    const std::size_t unit_start = i_;
    if (i_ < src_.size() && src_[i_] == '%') {
      advance();
    } else {
      while (i_ < src_.size() && ident_char(src_[i_])) advance();
    }
    const std::string_view suffix = src_.substr(unit_start, i_ - unit_start);
    auto unit = parse_unit(suffix);
    if (!unit) fail(unit_pos, "unknown unit '" + std::string(suffix) + "'");
    t.unit = *unit;
    t.kind = Tok::Number;
  }

  void lex_string(Token& t) {
    advance();  // opening quote
    std::string out;
    for (;;) {
      if (i_ >= src_.size()) fail(t.pos, "unterminated string");
      const char c = src_[i_];
      if (c == '"') {
        advance();
        break;
      }
      if (c == '\n') fail(pos_, "newline in string literal");
      if (c == '\\') {
        const SourcePos esc = pos_;
        advance();
        if (i_ >= src_.size()) fail(t.pos, "unterminated string");
        switch (src_[i_]) {
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          default: fail(esc, std::string("unknown escape '\\") + src_[i_] + "'");
        }
        advance();
        continue;
      }
      out += c;
      advance();
    }
    t.kind = Tok::String;
    t.text = std::move(out);
  }

  void lex_punct(Token& t) {
    const char c = src_[i_];
    const char n = i_ + 1 < src_.size() ? src_[i_ + 1] : '\0';
    auto one = [&](Tok k) {
      t.kind = k;
      advance();
    };
    auto two = [&](Tok k) {
      t.kind = k;
      advance();
      advance();
    };
    switch (c) {
      case ':': return one(Tok::Colon);
      case ',': return one(Tok::Comma);
      case '.': return one(Tok::Dot);
      case '(': return one(Tok::LParen);
      case ')': return one(Tok::RParen);
      case '=': return one(Tok::Eq);
      case '!':
        if (n == '=') return two(Tok::Ne);
        break;
      case '<': return n == '=' ? two(Tok::Le) : one(Tok::Lt);
      case '>': return n == '=' ? two(Tok::Ge) : one(Tok::Gt);
      default: break;
    }
    fail(t.pos, std::string("unexpected character '") + c + "'");
  }

  std::string_view src_;
  std::size_t i_ = 0;
  SourcePos pos_;
};

// ---------------------------------------------------------------------------
// Parser

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  std::vector<RuleAst> file() {
    std::vector<RuleAst> rules;
    std::set<std::string, std::less<>> names;
    while (!check(Tok::End)) {
      const SourcePos start = peek().pos;
      RuleAst r = rule();
      if (!names.insert(r.name).second)
        throw ParseError(start, {}, "duplicate rule name '" + r.name + "'");
      rules.push_back(std::move(r));
    }
    return rules;
  }

  RuleAst single() {
    RuleAst r = rule();
    expect(Tok::End);
    return r;
  }

 private:
  const Token& peek() const { return toks_[i_]; }

  bool check(Tok k) {
    expected_.insert(std::string(spelling(k)));
    return peek().kind == k;
  }

  bool accept(Tok k) {
    if (!check(k)) return false;
    consume();
    return true;
  }

  Token consume() {
    Token t = toks_[i_];
    if (i_ + 1 < toks_.size()) ++i_;
    expected_.clear();
    return t;
  }

  Token expect(Tok k) {
    if (!check(k)) fail();
    return consume();
  }

  [[noreturn]] void fail() {
    std::vector<std::string> expected(expected_.begin(), expected_.end());
    std::string msg = "syntax error: expected ";
    for (std::size_t i = 0; i < expected.size(); ++i) {
      if (i) msg += i + 1 == expected.size() ? " or " : ", ";
      msg += expected[i];
    }
    const Token& t = peek();
    msg += ", found ";
    switch (t.kind) {
      case Tok::Ident: msg += "identifier '" + t.text + "'"; break;
      case Tok::End: msg += "end of input"; break;
      default: msg += spelling(t.kind); break;
    }
    throw ParseError(t.pos, std::move(expected), msg);
  }

  RuleAst rule() {
    RuleAst r;
    r.pos = peek().pos;
    if (accept(Tok::KwDisabled)) r.enabled = false;
    expect(Tok::KwRule);
    r.name = expect(Tok::Ident).text;
    expect(Tok::Colon);
    expect(Tok::KwWhen);
    r.condition = or_expr();
    expect(Tok::KwThen);
    do {
      r.actions.push_back(action());
    } while (accept(Tok::Comma));
    return r;
  }

  Action action() {
    Action a;
    a.pos = peek().pos;
    expect(Tok::KwSet);
    a.target = ref();
    expect(Tok::Eq);
    a.value = literal();
    return a;
  }

  Ref ref() {
    Ref r;
    r.device = expect(Tok::Ident).text;
    expect(Tok::Dot);
    r.attribute = expect(Tok::Ident).text;
    return r;
  }

  Expr or_expr() {
    Expr lhs = and_expr();
    while (accept(Tok::KwOr)) lhs = make_binary(Connective::Or, std::move(lhs), and_expr());
    return lhs;
  }

  Expr and_expr() {
    Expr lhs = not_expr();
    while (accept(Tok::KwAnd)) lhs = make_binary(Connective::And, std::move(lhs), not_expr());
    return lhs;
  }

  Expr not_expr() {
    if (accept(Tok::KwNot)) return make_not(not_expr());
    return primary();
  }

  Expr primary() {
    if (accept(Tok::LParen)) {
      Expr inner = or_expr();
      expect(Tok::RParen);
      return inner;
    }
    if (accept(Tok::KwTrue)) return Expr{BoolConst{true}};
    if (accept(Tok::KwFalse)) return Expr{BoolConst{false}};
    if (!check(Tok::Ident)) fail();
    Comparison c;
    c.pos = peek().pos;
    c.ref = ref();
    c.op = comparison_op();
    c.literal = literal();
    return Expr{std::move(c)};
  }

  CompareOp comparison_op() {
    if (accept(Tok::Eq)) return CompareOp::Eq;
    if (accept(Tok::Ne)) return CompareOp::Ne;
    if (accept(Tok::Le)) return CompareOp::Le;
    if (accept(Tok::Lt)) return CompareOp::Lt;
    if (accept(Tok::Ge)) return CompareOp::Ge;
    if (accept(Tok::Gt)) return CompareOp::Gt;
    fail();
  }

  AttributeValue literal() {
    if (accept(Tok::KwTrue)) return AttributeValue::boolean(true);
    if (accept(Tok::KwFalse)) return AttributeValue::boolean(false);
    if (check(Tok::Number)) {
      Token t = consume();
      return AttributeValue::number(t.number, t.unit);
    }
    if (check(Tok::String)) return AttributeValue::string(consume().text);
    fail();
  }

  std::vector<Token> toks_;
  std::size_t i_ = 0;
  std::set<std::string> expected_;
};

}  // namespace

RuleAst parse_rule(std::string_view text) {
  Parser p(Lexer(text).run());
  return p.single();
}

std::vector<RuleAst> parse_rules(std::string_view text) {
  Parser p(Lexer(text).run());
  return p.file();
}

// ---------------------------------------------------------------------------
// Type checking

std::string to_string(const RuleTypeError& e) {
  return "rule '" + e.rule + "' at " + to_string(e.pos) + ": " + e.message;
}

namespace {

struct Checker {
  const RuleAst& rule;
  const DirectorySchema& schema;
  std::vector<RuleTypeError> errors;

  void error(SourcePos pos, std::string msg) { errors.push_back({rule.name, pos, std::move(msg)}); }

  const AttributeSpec* resolve(const Ref& ref, SourcePos pos) {
    auto it = schema.find(ref.device);
    if (it == schema.end()) {
      error(pos, "unknown device '" + ref.device + "'");
      return nullptr;
    }
    const AttributeSpec* spec = schema_of(it->second).find(ref.attribute);
    if (!spec) {
      error(pos, "unknown attribute '" + ref.attribute + "' on " +
                     std::string(to_string(it->second)) + " '" + ref.device + "'");
    }
    return spec;
  }

  void value_matches(const AttributeSpec& spec, const Ref& ref, const AttributeValue& v,
                     SourcePos pos) {
    if (v.type() != spec.type) {
      error(pos, "type mismatch: " + ref.device + "." + ref.attribute + " is " +
                     std::string(to_string(spec.type)) + ", literal is " +
                     std::string(to_string(v.type())));
    } else if (spec.type == ValueType::Number && v.unit() != spec.unit) {
      error(pos, "unit mismatch: " + ref.device + "." + ref.attribute + " is in '" +
                     std::string(unit_symbol(spec.unit)) + "', literal is in '" +
                     std::string(unit_symbol(v.unit())) + "'");
    }
  }

  void expr(const Expr& e) {
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, Comparison>) {
            const AttributeSpec* spec = resolve(n.ref, n.pos);
            if (!spec) return;
            value_matches(*spec, n.ref, n.literal, n.pos);
            if (spec->type != ValueType::Number && n.op != CompareOp::Eq &&
                n.op != CompareOp::Ne) {
              error(n.pos, "operator " + std::string(to_string(n.op)) + " is not defined for " +
                               std::string(to_string(spec->type)) + " values");
            }
          } else if constexpr (std::is_same_v<T, NotExpr>) {
            expr(*n.operand);
          } else if constexpr (std::is_same_v<T, BinaryExpr>) {
            expr(*n.lhs);
            expr(*n.rhs);
          }
        },
        e.node);
  }

  void action(const Action& a) {
    const AttributeSpec* spec = resolve(a.target, a.pos);
    if (!spec) return;
    if (spec->access != Access::Writable) {
      error(a.pos, a.target.device + "." + a.target.attribute + " is not writable");
    }
    value_matches(*spec, a.target, a.value, a.pos);
  }
};

}  // namespace

std::vector<RuleTypeError> typecheck_rule(const RuleAst& rule, const DirectorySchema& schema) {
  Checker c{rule, schema, {}};
  c.expr(rule.condition);
  for (const auto& a : rule.actions) c.action(a);
  return std::move(c.errors);
}

// ---------------------------------------------------------------------------
// Evaluation

void WorldSnapshot::set(std::string_view device, std::string_view attribute, AttributeValue value) {
  auto it = values_.find(device);
  if (it == values_.end()) it = values_.emplace(std::string(device), AttributeMap{}).first;
  it->second.insert_or_assign(std::string(attribute), std::move(value));
}

const AttributeValue* WorldSnapshot::find(std::string_view device,
                                          std::string_view attribute) const {
  auto dev = values_.find(device);
  if (dev == values_.end()) return nullptr;
  auto attr = dev->second.find(attribute);
  return attr == dev->second.end() ? nullptr : &attr->second;
}

bool eval_condition(const Expr& expr, const WorldSnapshot& snapshot) {
  return std::visit(
      [&](const auto& n) -> bool {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, BoolConst>) {
          return n.value;
        } else if constexpr (std::is_same_v<T, Comparison>) {
          const AttributeValue* v = snapshot.find(n.ref.device, n.ref.attribute);
          if (!v) throw EvalError("no value for " + n.ref.device + "." + n.ref.attribute);
          try {
            return compare_values(*v, n.literal, n.op);
          } catch (const TypeError& e) {
            throw EvalError(n.ref.device + "." + n.ref.attribute + ": " + e.what());
          }
        } else if constexpr (std::is_same_v<T, NotExpr>) {
          return !eval_condition(*n.operand, snapshot);
        } else {
          // Both sides are evaluated so a missing attribute is reported even
          // when the other side would short-circuit.
          const bool lhs = eval_condition(*n.lhs, snapshot);
          const bool rhs = eval_condition(*n.rhs, snapshot);
          return n.op == Connective::And ? (lhs && rhs) : (lhs || rhs);
        }
      },
      expr.node);
}

Evaluation evaluate_all(std::span<const RuleAst> rules, const WorldSnapshot& snapshot) {
  Evaluation out;
  std::vector<RuleCommand> emitted;
  for (const auto& rule : rules) {
    if (!rule.enabled) continue;
    bool holds = false;
    try {
      holds = eval_condition(rule.condition, snapshot);
    } catch (const EvalError& e) {
      out.failures.push_back({rule.name, e.what()});
      continue;
    }
    if (!holds) continue;
    for (const auto& a : rule.actions) emitted.push_back({rule.name, a.target, a.value});
  }
  // Last writer per target wins.
  std::map<Ref, std::size_t> last;
  for (std::size_t i = 0; i < emitted.size(); ++i) last[emitted[i].target] = i;
  for (std::size_t i = 0; i < emitted.size(); ++i) {
    const std::size_t winner = last[emitted[i].target];
    if (winner == i) {
      out.commands.push_back(emitted[i]);
    } else {
      out.shadowed.push_back({emitted[i], emitted[winner].rule});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Formatting

std::string format_literal(const AttributeValue& value) {
  switch (value.type()) {
    case ValueType::Boolean: return value.as_bool() ? "true" : "false";
    case ValueType::Number: {
      char buf[512];
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value.as_number(),
                                     std::chars_format::fixed);
      std::string s(buf, ec == std::errc() ? ptr : buf);
      if (s.find('.') == std::string::npos) s += ".0";
      return s + std::string(unit_symbol(value.unit()));
    }
    case ValueType::String: {
      std::string s = "\"";
      for (char c : value.as_string()) {
        switch (c) {
          case '"': s += "\\\""; break;
          case '\\': s += "\\\\"; break;
          case '\n': s += "\\n"; break;
          case '\t': s += "\\t"; break;
          default: s += c;
        }
      }
      return s + "\"";
    }
  }
  return {};
}

namespace {

int precedence(const Expr& e) {
  if (auto* b = std::get_if<BinaryExpr>(&e.node)) return b->op == Connective::Or ? 1 : 2;
  if (std::holds_alternative<NotExpr>(e.node)) return 3;
  return 4;
}

std::string format_at(const Expr& e, int min_prec) {
  std::string s = std::visit(
      [](const auto& n) -> std::string {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, BoolConst>) {
          return n.value ? "true" : "false";
        } else if constexpr (std::is_same_v<T, Comparison>) {
          return n.ref.device + "." + n.ref.attribute + " " + std::string(to_string(n.op)) + " " +
                 format_literal(n.literal);
        } else if constexpr (std::is_same_v<T, NotExpr>) {
          return "not " + format_at(*n.operand, 3);
        } else {
          const int p = n.op == Connective::Or ? 1 : 2;
          return format_at(*n.lhs, p) + (n.op == Connective::Or ? " or " : " and ") +
                 format_at(*n.rhs, p + 1);
        }
      },
      e.node);
  return precedence(e) < min_prec ? "(" + s + ")" : s;
}

}  // namespace

std::string format_expr(const Expr& expr) { return format_at(expr, 0); }

std::string format_rule(const RuleAst& rule) {
  std::string s = rule.enabled ? "" : "disabled ";
  s += "rule " + rule.name + ": when " + format_expr(rule.condition) + " then ";
  for (std::size_t i = 0; i < rule.actions.size(); ++i) {
    const auto& a = rule.actions[i];
    if (i) s += ", ";
    s += "set " + a.target.device + "." + a.target.attribute + " = " + format_literal(a.value);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Standard pack

void LawnConfig::validate() const {
  if (!(on_below_pct < off_above_pct)) throw ArgumentError("lawn thresholds must satisfy on < off");
  if (on_below_pct < 0.0 || off_above_pct > 100.0)
    throw ArgumentError("lawn thresholds must lie in [0, 100]");
}

std::optional<PackGroup> parse_pack_group(std::string_view name) {
  for (auto g : {PackGroup::Fire, PackGroup::Climate, PackGroup::Lawn, PackGroup::Motion})
    if (to_string(g) == name) return g;
  return std::nullopt;
}

std::string_view to_string(PackGroup group) {
  switch (group) {
    case PackGroup::Fire: return "fire";
    case PackGroup::Climate: return "climate";
    case PackGroup::Lawn: return "lawn";
    case PackGroup::Motion: return "motion";
  }
  return "?";
}

std::string standard_pack(const devices::ThermostatConfig& thermostat, const LawnConfig& lawn,
                          std::span<const PackGroup> groups) {
  thermostat.validate();
  lawn.validate();
  auto celsius = [](double v) { return format_literal(AttributeValue::number(v, Unit::Celsius)); };
  auto pct = [](double v) { return format_literal(AttributeValue::number(v, Unit::Percent)); };
  auto wanted = [&](PackGroup g) { return std::find(groups.begin(), groups.end(), g) != groups.end(); };

  std::ostringstream out;
  if (wanted(PackGroup::Fire)) {
    out << "# fire or smoke: sprinklers, siren, open the window\n"
        << "rule fire_safety: when fire_monitor.fire = true or smoke_detector.smoke = true\n"
        << "  then set fire_sprinkler.on = true, set siren.on = true, set window.open = true\n";
  }
  if (wanted(PackGroup::Climate)) {
    out << "# climate: AC above the upper band, furnace below the lower band\n"
        << "rule cooling: when thermostat.temperature > " << celsius(thermostat.ac_on_above)
        << " then set ac.on = true\n"
        << "rule cooling_off: when thermostat.temperature <= "
        << celsius(thermostat.ac_on_above - thermostat.hysteresis) << " then set ac.on = false\n"
        << "rule heating: when thermostat.temperature < " << celsius(thermostat.furnace_on_below)
        << " then set furnace.on = true\n"
        << "rule heating_off: when thermostat.temperature >= "
        << celsius(thermostat.furnace_on_below + thermostat.hysteresis)
        << " then set furnace.on = false\n";
  }
  if (wanted(PackGroup::Lawn)) {
    out << "# lawn: water when dry, stop when soaked\n"
        << "rule lawn_water: when water_level_monitor.level < " << pct(lawn.on_below_pct)
        << " then set lawn_sprinkler.on = true\n"
        << "rule lawn_water_off: when water_level_monitor.level > " << pct(lawn.off_above_pct)
        << " then set lawn_sprinkler.on = false\n";
  }
  if (wanted(PackGroup::Motion)) {
    out << "# motion: lights and camera on, off again once the detector goes idle\n"
        << "rule motion_lights: when motion_detector.motion = true\n"
        << "  then set light.on = true, set webcam.recording = true\n"
        << "rule motion_lights_off: when motion_detector.idle = true\n"
        << "  then set light.on = false, set webcam.recording = false\n";
  }
  return out.str();
}

std::string standard_pack(const devices::ThermostatConfig& thermostat, const LawnConfig& lawn) {
  static constexpr PackGroup all[] = {PackGroup::Fire, PackGroup::Climate, PackGroup::Lawn,
                                      PackGroup::Motion};
  return standard_pack(thermostat, lawn, all);
}

DirectorySchema standard_directory() {
  return {
      {"thermostat", DeviceKind::Thermostat},
      {"ac", DeviceKind::AirConditioner},
      {"furnace", DeviceKind::Furnace},
      {"fire_monitor", DeviceKind::FireMonitor},
      {"smoke_detector", DeviceKind::SmokeDetector},
      {"fire_sprinkler", DeviceKind::FireSprinkler},
      {"siren", DeviceKind::Siren},
      {"window", DeviceKind::Window},
      {"motion_detector", DeviceKind::MotionDetector},
      {"webcam", DeviceKind::Webcam},
      {"light", DeviceKind::Light},
      {"water_level_monitor", DeviceKind::WaterLevelMonitor},
      {"lawn_sprinkler", DeviceKind::LawnSprinkler},
  };
}

}  // namespace hearth::rules
