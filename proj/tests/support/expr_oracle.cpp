#include "support/expr_oracle.hpp"

#include <array>
#include <cmath>

namespace hearth::oracle {

namespace {

constexpr std::array<const char*, 4> kVars = {"a", "b", "c", "d"};

std::uint16_t var_table(int i) {
  std::uint16_t t = 0;
  for (int k = 0; k < 16; ++k)
    if (k & (1 << i)) t = static_cast<std::uint16_t>(t | (1u << k));
  return t;
}

std::vector<TextExpr> leaves() {
  std::vector<TextExpr> out;
  for (int i = 0; i < 4; ++i) {
    const std::string v = kVars[static_cast<std::size_t>(i)];
    out.push_back({v + ".on = true", var_table(i)});
    out.push_back({v + ".on != true", static_cast<std::uint16_t>(~var_table(i))});
  }
  out.push_back({"true", 0xFFFF});
  out.push_back({"false", 0});
  return out;
}

TextExpr negate(const TextExpr& e) {
  return {"not (" + e.text + ")", static_cast<std::uint16_t>(~e.table)};
}
TextExpr conj(const TextExpr& a, const TextExpr& b) {
  return {"(" + a.text + ") and (" + b.text + ")", static_cast<std::uint16_t>(a.table & b.table)};
}
TextExpr disj(const TextExpr& a, const TextExpr& b) {
  return {"(" + a.text + ") or (" + b.text + ")", static_cast<std::uint16_t>(a.table | b.table)};
}

std::size_t below(Rng& rng, std::size_t n) { return static_cast<std::size_t>(rng.next_u64() % n); }

// Identifiers that are never keywords.
constexpr std::array<const char*, 8> kDevices = {"lamp", "ac", "front_door", "x1",
                                                 "Hall_Light", "_tmp", "truex", "notify"};
constexpr std::array<const char*, 6> kAttrs = {"on", "open", "temperature", "level", "mode", "or_else"};

AttributeValue random_literal(Rng& rng) {
  switch (below(rng, 4)) {
    case 0:
      return AttributeValue::boolean(below(rng, 2) == 1);
    case 1: {
      const Unit units[] = {Unit::None, Unit::Celsius, Unit::Percent, Unit::Ppm};
      double v = 0;
      switch (below(rng, 3)) {
        case 0: v = static_cast<double>(below(rng, 200)); break;
        case 1: v = static_cast<double>(below(rng, 4096)) / 8.0; break;
        default: v = rng.uniform() * 1e6; break;
      }
      if (below(rng, 3) == 0) v = -v;
      return AttributeValue::number(v, units[below(rng, 4)]);
    }
    default: {
      static constexpr char kChars[] = "abcXYZ 019_.:-\"\\\n\t#";
      std::string s;
      const std::size_t len = below(rng, 8);
      for (std::size_t i = 0; i < len; ++i) s += kChars[below(rng, sizeof kChars - 1)];
      return AttributeValue::string(std::move(s));
    }
  }
}

rules::Ref random_ref(Rng& rng) {
  return {kDevices[below(rng, kDevices.size())], kAttrs[below(rng, kAttrs.size())]};
}

rules::Expr random_ast(Rng& rng, int depth) {
  const std::size_t pick = depth <= 0 ? below(rng, 2) : below(rng, 5);
  switch (pick) {
    case 0:
      return rules::Expr{rules::BoolConst{below(rng, 2) == 1}};
    case 1: {
      rules::Comparison c;
      c.ref = random_ref(rng);
      c.op = static_cast<CompareOp>(below(rng, 6));
      c.literal = random_literal(rng);
      return rules::Expr{std::move(c)};
    }
    case 2:
      return rules::make_not(random_ast(rng, depth - 1));
    case 3:
      return rules::make_binary(rules::Connective::And, random_ast(rng, depth - 1),
                                random_ast(rng, depth - 1));
    default:
      return rules::make_binary(rules::Connective::Or, random_ast(rng, depth - 1),
                                random_ast(rng, depth - 1));
  }
}

void check(const TextExpr& e, Tally& tally) {
  ++tally.expressions;
  std::uint16_t got = 0;
  try {
    got = evaluated_table(e.text);
  } catch (const std::exception& ex) {
    ++tally.mismatches;
    if (tally.first_failure.empty()) tally.first_failure = "'" + e.text + "': " + ex.what();
    return;
  }
  tally.checked += 16;
  if (got != e.table) {
    ++tally.mismatches;
    if (tally.first_failure.empty()) tally.first_failure = "'" + e.text + "' evaluates differently";
  }
}

}  // namespace

std::vector<TextExpr> enumerate_expressions(int depth) {
  std::vector<TextExpr> level = leaves();
  for (int d = 1; d <= depth; ++d) {
    std::vector<TextExpr> next = level;
    for (const auto& e : level) next.push_back(negate(e));
    for (const auto& a : level)
      for (const auto& b : level) {
        next.push_back(conj(a, b));
        next.push_back(disj(a, b));
      }
    level = std::move(next);
  }
  return level;
}

TextExpr random_expression(Rng& rng, int depth) {
  static const std::vector<TextExpr> kLeaves = leaves();
  if (depth <= 0 || below(rng, 4) == 0) return kLeaves[below(rng, kLeaves.size())];
  switch (below(rng, 3)) {
    case 0: return negate(random_expression(rng, depth - 1));
    case 1: return conj(random_expression(rng, depth - 1), random_expression(rng, depth - 1));
    default: return disj(random_expression(rng, depth - 1), random_expression(rng, depth - 1));
  }
}

std::uint16_t evaluated_table(const std::string& condition_text) {
  const auto rule = rules::parse_rule("rule t: when " + condition_text + " then set z.on = true");
  // The canonical text must parse to the same tree.
  if (!(rules::parse_rule(rules::format_rule(rule)) == rule))
    throw Error("format_rule does not round-trip");
  std::uint16_t table = 0;
  for (int k = 0; k < 16; ++k) {
    rules::WorldSnapshot world;
    for (int i = 0; i < 4; ++i)
      world.set(kVars[static_cast<std::size_t>(i)], "on", AttributeValue::boolean((k >> i) & 1));
    if (rules::eval_condition(rule.condition, world)) table = static_cast<std::uint16_t>(table | (1u << k));
  }
  return table;
}

rules::RuleAst random_rule(Rng& rng, int max_depth) {
  rules::RuleAst r;
  r.name = std::string(kDevices[below(rng, kDevices.size())]) + "_" + std::to_string(below(rng, 1000));
  r.condition = random_ast(rng, static_cast<int>(below(rng, static_cast<std::size_t>(max_depth) + 1)));
  const std::size_t n = 1 + below(rng, 3);
  for (std::size_t i = 0; i < n; ++i) {
    rules::Action a;
    a.target = random_ref(rng);
    a.value = random_literal(rng);
    r.actions.push_back(std::move(a));
  }
  r.enabled = below(rng, 4) != 0;
  return r;
}

Tally random_round_trips(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Tally tally;
  for (std::size_t i = 0; i < n; ++i) {
    const auto rule = random_rule(rng);
    const std::string text = rules::format_rule(rule);
    ++tally.checked;
    ++tally.expressions;
    try {
      if (rules::parse_rule(text) == rule) continue;
      if (tally.first_failure.empty()) tally.first_failure = "round trip changed: " + text;
    } catch (const std::exception& e) {
      if (tally.first_failure.empty()) tally.first_failure = text + ": " + e.what();
    }
    ++tally.mismatches;
  }
  return tally;
}

Tally truth_table_sweep(std::size_t random_count, std::uint64_t seed) {
  Tally tally;
  for (const auto& e : enumerate_expressions(2)) check(e, tally);
  Rng rng(seed);
  for (std::size_t i = 0; i < random_count; ++i) check(random_expression(rng, 7), tally);
  return tally;
}

}  // namespace hearth::oracle
