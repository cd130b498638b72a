// Condition -> action automation language.
//
//   rule <ident>: when <expr> then set <dev>.<attr> = <literal> {, set ...}
//
// Precedence is `not` > `and` > `or`; both connectives are left
// associative. See docs/GRAMMAR.md for the full grammar.
#pragma once

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "hearth/devices.hpp"
#include "hearth/domain.hpp"

namespace hearth::rules {

struct SourcePos {
  int line = 1;
  int column = 1;
};

std::string to_string(const SourcePos& pos);

struct Ref {
  std::string device;
  std::string attribute;

  friend auto operator<=>(const Ref&, const Ref&) = default;
  friend bool operator==(const Ref&, const Ref&) = default;
};

struct Expr;

/// Owning, deep-copying pointer so the AST keeps value semantics.
class ExprBox {
 public:
  ExprBox();
  ExprBox(Expr expr);
  ExprBox(const ExprBox& other);
  ExprBox(ExprBox&&) noexcept = default;
  ExprBox& operator=(const ExprBox& other);
  ExprBox& operator=(ExprBox&&) noexcept = default;
  ~ExprBox();

  const Expr& operator*() const { return *ptr_; }
  const Expr* operator->() const { return ptr_.get(); }

  friend bool operator==(const ExprBox& a, const ExprBox& b);

 private:
  std::unique_ptr<Expr> ptr_;
};

struct BoolConst {
  bool value = false;
  friend bool operator==(const BoolConst&, const BoolConst&) = default;
};

struct Comparison {
  Ref ref;
  CompareOp op = CompareOp::Eq;
  AttributeValue literal;
  SourcePos pos;

  /// Positions are diagnostics only and do not take part in equality.
  friend bool operator==(const Comparison& a, const Comparison& b) {
    return a.ref == b.ref && a.op == b.op && a.literal == b.literal;
  }
};

struct NotExpr {
  ExprBox operand;
  friend bool operator==(const NotExpr&, const NotExpr&) = default;
};

enum class Connective { And, Or };

struct BinaryExpr {
  Connective op = Connective::And;
  ExprBox lhs;
  ExprBox rhs;
  friend bool operator==(const BinaryExpr&, const BinaryExpr&) = default;
};

struct Expr {
  std::variant<BoolConst, Comparison, NotExpr, BinaryExpr> node;
  friend bool operator==(const Expr&, const Expr&) = default;
};

Expr make_not(Expr operand);
Expr make_binary(Connective op, Expr lhs, Expr rhs);

struct Action {
  Ref target;
  AttributeValue value;
  SourcePos pos;

  friend bool operator==(const Action& a, const Action& b) {
    return a.target == b.target && a.value == b.value;
  }
};

struct RuleAst {
  std::string name;
  Expr condition;
  std::vector<Action> actions;
  bool enabled = true;
  SourcePos pos;

  friend bool operator==(const RuleAst& a, const RuleAst& b) {
    return a.name == b.name && a.condition == b.condition && a.actions == b.actions &&
           a.enabled == b.enabled;
  }
};

// ---------------------------------------------------------------------------
// Parsing

class ParseError : public Error {
 public:
  ParseError(SourcePos pos, std::vector<std::string> expected, const std::string& message);

  const SourcePos& pos() const noexcept { return pos_; }
  /// Sorted set of tokens that would have been accepted at `pos`.
  const std::vector<std::string>& expected() const noexcept { return expected_; }

 private:
  SourcePos pos_;
  std::vector<std::string> expected_;
};

/// Parse exactly one rule.
RuleAst parse_rule(std::string_view text);

/// Parse a rule file: zero or more rules, `#` line comments. Duplicate rule
/// names raise ParseError at the second definition.
std::vector<RuleAst> parse_rules(std::string_view text);

// ---------------------------------------------------------------------------
// Type checking

/// Device handle used in rules (its display name) -> kind.
using DirectorySchema = std::map<std::string, DeviceKind, std::less<>>;

struct RuleTypeError {
  std::string rule;
  SourcePos pos;
  std::string message;
};

std::string to_string(const RuleTypeError& error);

/// Every violation in the rule, in source order. Empty means well-typed.
std::vector<RuleTypeError> typecheck_rule(const RuleAst& rule, const DirectorySchema& schema);

// ---------------------------------------------------------------------------
// Evaluation

/// Attribute values at one virtual instant, keyed by device handle.
class WorldSnapshot {
 public:
  void set(std::string_view device, std::string_view attribute, AttributeValue value);
  const AttributeValue* find(std::string_view device, std::string_view attribute) const;
  bool empty() const noexcept { return values_.empty(); }

  friend bool operator==(const WorldSnapshot&, const WorldSnapshot&) = default;

 private:
  std::map<std::string, AttributeMap, std::less<>> values_;
};

class EvalError : public Error {
 public:
  using Error::Error;
};

/// Throws EvalError when the snapshot lacks a referenced attribute.
bool eval_condition(const Expr& expr, const WorldSnapshot& snapshot);

struct RuleCommand {
  std::string rule;
  Ref target;
  AttributeValue value;

  friend bool operator==(const RuleCommand&, const RuleCommand&) = default;
};

struct ShadowedCommand {
  RuleCommand command;
  std::string by_rule;
};

struct RuleFailure {
  std::string rule;
  std::string message;
};

struct Evaluation {
  /// Winning commands, in the order their final writer emitted them.
  std::vector<RuleCommand> commands;
  std::vector<ShadowedCommand> shadowed;
  std::vector<RuleFailure> failures;
};

/// Level-triggered pass: every enabled rule whose condition holds emits its
/// actions. Later writes to the same device attribute win.
Evaluation evaluate_all(std::span<const RuleAst> rules, const WorldSnapshot& snapshot);

// ---------------------------------------------------------------------------
// Formatting

std::string format_literal(const AttributeValue& value);
std::string format_expr(const Expr& expr);
/// Canonical single-line text; parse_rule(format_rule(r)) == r.
std::string format_rule(const RuleAst& rule);

// ---------------------------------------------------------------------------
// Standard pack

struct LawnConfig {
  double on_below_pct = 33.0;
  double off_above_pct = 66.0;

  void validate() const;
};

enum class PackGroup { Fire, Climate, Lawn, Motion };
std::optional<PackGroup> parse_pack_group(std::string_view name);
std::string_view to_string(PackGroup group);

/// The five home automations (fire safety, cooling, heating, lawn watering,
/// motion lighting) plus their generated OFF companions. Thresholds come
/// from the configs so scenarios can override them.
std::string standard_pack(const devices::ThermostatConfig& thermostat, const LawnConfig& lawn,
                          std::span<const PackGroup> groups);
std::string standard_pack(const devices::ThermostatConfig& thermostat = {},
                          const LawnConfig& lawn = {});

/// Device handles and kinds the standard pack refers to.
DirectorySchema standard_directory();

}  // namespace hearth::rules
