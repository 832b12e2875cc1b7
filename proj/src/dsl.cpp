// Copyright 2026 The nlteach Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "nlteach/dsl.hpp"

#include <cctype>
#include <cstdlib>

#include "nlteach/error.hpp"
#include "nlteach/text.hpp"

namespace nlteach::dsl {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

Expr make(NodeVariant v) { return std::make_shared<const Node>(Node{std::move(v)}); }

Expr requireSpan(NodeVariant v, const std::string& span) {
  if (text::trim(span).empty())
    throw Error(ErrorCode::MalformedExpression, "resolve node needs a non-empty span");
  return make(std::move(v));
}

Expr child(const Expr& e, Slot s) {
  if (!e) return nullptr;
  return std::visit(overloaded{
                        [&](const Conditional& c) -> Expr {
                          if (s == Slot::Cond) return c.cond;
                          if (s == Slot::Then) return c.then;
                          if (s == Slot::Else) return c.otherwise;
                          return nullptr;
                        },
                        [&](const BoolComparison& b) -> Expr {
                          if (s == Slot::Lhs) return b.lhs;
                          if (s == Slot::Rhs) return b.rhs;
                          return nullptr;
                        },
                        [](const auto&) -> Expr { return nullptr; },
                    },
                    e->v);
}

bool hasSlot(const Expr& e, Slot s) {
  if (std::holds_alternative<Conditional>(e->v))
    return s == Slot::Cond || s == Slot::Then || s == Slot::Else;
  if (std::holds_alternative<BoolComparison>(e->v)) return s == Slot::Lhs || s == Slot::Rhs;
  return false;
}

Type slotType(Slot s) {
  switch (s) {
    case Slot::Cond: return Type::Bool;
    case Slot::Then:
    case Slot::Else: return Type::Proc;
    case Slot::Lhs:
    case Slot::Rhs: return Type::Value;
  }
  return Type::Value;
}

Expr withChild(const Expr& e, Slot s, Expr c) {
  if (auto* cd = std::get_if<Conditional>(&e->v)) {
    Conditional n = *cd;
    if (s == Slot::Cond) n.cond = std::move(c);
    else if (s == Slot::Then) n.then = std::move(c);
    else n.otherwise = std::move(c);
    return make(n);
  }
  BoolComparison n = std::get<BoolComparison>(e->v);
  if (s == Slot::Lhs) n.lhs = std::move(c);
  else n.rhs = std::move(c);
  return make(n);
}

void checkNode(const Expr& e, const NodePath& path, std::vector<TypeError>& out) {
  auto slot = [&](Slot s, const Expr& c, bool optional) {
    NodePath p = path;
    p.push_back(s);
    Type want = slotType(s);
    if (!c) {
      if (!optional)
        out.push_back({p, want, std::nullopt,
                       pathToString(p) + ": missing " + std::string(typeName(want)) + " child"});
      return;
    }
    Type got = typeOf(c);
    if (got != want)
      out.push_back({p, want, got,
                     pathToString(p) + ": expected " + std::string(typeName(want)) + ", got " +
                         std::string(typeName(got))});
    checkNode(c, p, out);
  };
  std::visit(overloaded{
                 [&](const Conditional& c) {
                   slot(Slot::Cond, c.cond, false);
                   slot(Slot::Then, c.then, false);
                   slot(Slot::Else, c.otherwise, true);
                 },
                 [&](const BoolComparison& b) {
                   slot(Slot::Lhs, b.lhs, false);
                   slot(Slot::Rhs, b.rhs, false);
                 },
                 [](const auto&) {},
             },
             e->v);
}

void collectHoles(const Expr& e, NodePath& path, std::vector<Hole>& out) {
  if (!e) return;
  std::visit(overloaded{
                 [&](const Conditional& c) {
                   for (auto [s, ch] : {std::pair{Slot::Cond, c.cond}, std::pair{Slot::Then, c.then},
                                        std::pair{Slot::Else, c.otherwise}}) {
                     path.push_back(s);
                     collectHoles(ch, path, out);
                     path.pop_back();
                   }
                 },
                 [&](const BoolComparison& b) {
                   for (auto [s, ch] : {std::pair{Slot::Lhs, b.lhs}, std::pair{Slot::Rhs, b.rhs}}) {
                     path.push_back(s);
                     collectHoles(ch, path, out);
                     path.pop_back();
                   }
                 },
                 [&](const ResolveBool& r) { out.push_back({path, Type::Bool, r.span}); },
                 [&](const ResolveValue& r) { out.push_back({path, Type::Value, r.span}); },
                 [&](const ResolveProcedure& r) { out.push_back({path, Type::Proc, r.span}); },
                 [](const auto&) {},
             },
             e->v);
}

// S-expression reader.

struct Reader {
  std::string_view s;
  std::size_t i = 0;

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::MalformedExpression,
                what + " at offset " + std::to_string(i) + " in '" + std::string(s) + "'");
  }
  void ws() {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  }
  bool peek(char c) {
    ws();
    return i < s.size() && s[i] == c;
  }
  void expect(char c) {
    ws();
    if (i >= s.size() || s[i] != c) fail(std::string("expected '") + c + "'");
    ++i;
  }
  std::string atom() {
    ws();
    std::size_t b = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i])) && s[i] != '(' &&
           s[i] != ')' && s[i] != '"')
      ++i;
    if (b == i) fail("expected atom");
    return std::string(s.substr(b, i - b));
  }
  std::string str() {
    ws();
    if (i >= s.size() || s[i] != '"') fail("expected string");
    ++i;
    std::string out;
    while (i < s.size() && s[i] != '"') {
      if (s[i] == '\\') {
        ++i;
        if (i >= s.size()) fail("dangling escape");
      }
      out += s[i++];
    }
    if (i >= s.size()) fail("unterminated string");
    ++i;
    return out;
  }

  Expr expr() {
    expect('(');
    std::string head = atom();
    Expr out;
    if (head == "if") {
      Expr c = expr(), t = expr();
      Expr e = peek('(') ? expr() : nullptr;
      out = ifThen(c, t, e);
    } else if (head == ">" || head == "<" || head == "=") {
      Comparison op = head == ">" ? Comparison::GT : head == "<" ? Comparison::LT : Comparison::EQ;
      Expr l = expr(), r = expr();
      out = compare(l, op, r);
    } else if (head == "bool") {
      out = boolRef(str());
    } else if (head == "value") {
      out = valueRef(str());
    } else if (head == "const") {
      std::string num = atom();
      char* end = nullptr;
      double m = std::strtod(num.c_str(), &end);
      if (end == num.c_str() || *end != '\0') fail("bad number '" + num + "'");
      std::string tag;
      if (!peek(')')) tag = atom();
      try {
        out = constant(TypedValue::fromTag(m, tag));
      } catch (const Error& e) {
        fail(e.what());
      }
    } else if (head == "proc") {
      std::string name = str();
      std::map<std::string, std::string> bindings;
      while (peek('(')) {
        expect('(');
        std::string param = atom();
        bindings[param] = str();
        expect(')');
      }
      out = call(name, bindings);
    } else if (head == "resolve-bool") {
      out = resolveBool(str());
    } else if (head == "resolve-value") {
      out = resolveValue(str());
    } else if (head == "resolve-proc") {
      out = resolveProcedure(str());
    } else {
      fail("unknown form '" + head + "'");
    }
    expect(')');
    return out;
  }
};

// Evaluation.

struct Evaluator {
  const ExecutionEnvironment& env;
  ExecutionTrace trace;
  int depth = 0;

  static constexpr int kMaxDepth = 32;

  void event(TraceEvent::Kind k, std::string text) { trace.events.push_back({k, std::move(text)}); }

  bool evalBool(const Expr& e) {
    if (auto* b = std::get_if<BoolComparison>(&e->v)) {
      TypedValue l = evalValue(b->lhs), r = evalValue(b->rhs);
      bool res = nlteach::compare(l, b->op, r);
      event(TraceEvent::Kind::Comparison, display(l) + " " + std::string(comparisonSymbol(b->op)) +
                                              " " + display(r) + " = " + (res ? "true" : "false"));
      return res;
    }
    if (auto* c = std::get_if<BoolConceptRef>(&e->v)) {
      if (++depth > kMaxDepth)
        throw Error(ErrorCode::UnknownConcept, "concept '" + c->name + "' refers to itself");
      Expr def = env.runtime->booleanConcept(c->name, env.contextLabel);
      if (!def || typeOf(def) != Type::Bool || !isExecutable(def))
        throw Error(ErrorCode::UnknownConcept, "concept '" + c->name + "' has no usable definition");
      bool res = evalBool(def);
      --depth;
      event(TraceEvent::Kind::Concept, c->name + " = " + (res ? "true" : "false"));
      return res;
    }
    throw Error(ErrorCode::TypeMismatch, "expected a Bool expression, got " + render(e));
  }

  TypedValue evalValue(const Expr& e) {
    if (auto* k = std::get_if<ValueConstant>(&e->v)) return k->value;
    if (auto* r = std::get_if<ValueConceptRef>(&e->v)) {
      TypedValue v = env.runtime->readValue(r->name, env.contextLabel);
      event(TraceEvent::Kind::ValueRead, r->name + " = " + display(v));
      return v;
    }
    throw Error(ErrorCode::TypeMismatch, "expected a Value expression, got " + render(e));
  }

  void evalProc(const Expr& e) {
    auto* p = std::get_if<ProcedureCall>(&e->v);
    if (!p) throw Error(ErrorCode::TypeMismatch, "expected a procedure call, got " + render(e));
    std::string head = p->procedure + "(";
    bool first = true;
    for (const auto& [k, v] : p->bindings) {
      if (!first) head += ", ";
      head += k + "=" + v;
      first = false;
    }
    event(TraceEvent::Kind::Call, head + ")");
    for (auto& a : env.runtime->runProcedure(*p)) event(TraceEvent::Kind::Action, a);
  }

  void run(const Expr& e) {
    if (auto* c = std::get_if<Conditional>(&e->v)) {
      if (env.contextLabel.empty())
        throw Error(ErrorCode::InvalidValue, "conditional evaluated without a context label");
      bool taken = evalBool(c->cond);
      Branch b = taken ? Branch::Then : (c->otherwise ? Branch::Else : Branch::None);
      trace.branch = b;
      event(TraceEvent::Kind::Branch, std::string(branchName(b)));
      if (b == Branch::Then) evalProc(c->then);
      else if (b == Branch::Else) evalProc(c->otherwise);
      return;
    }
    switch (typeOf(e)) {
      case Type::Bool: evalBool(e); break;
      case Type::Value: evalValue(e); break;
      default: evalProc(e); break;
    }
  }
};

std::string_view eventKindName(TraceEvent::Kind k) {
  switch (k) {
    case TraceEvent::Kind::ValueRead: return "read";
    case TraceEvent::Kind::Concept: return "concept";
    case TraceEvent::Kind::Comparison: return "compare";
    case TraceEvent::Kind::Branch: return "branch";
    case TraceEvent::Kind::Call: return "call";
    case TraceEvent::Kind::Action: return "action";
  }
  return "event";
}

}  // namespace

std::string_view typeName(Type t) {
  switch (t) {
    case Type::Bool: return "Bool";
    case Type::Value: return "Value";
    case Type::Proc: return "Proc";
    case Type::Script: return "Script";
  }
  return "?";
}

std::string pathToString(const NodePath& p) {
  if (p.empty()) return "root";
  std::string out;
  for (Slot s : p) {
    if (!out.empty()) out += '.';
    switch (s) {
      case Slot::Cond: out += "cond"; break;
      case Slot::Then: out += "then"; break;
      case Slot::Else: out += "else"; break;
      case Slot::Lhs: out += "lhs"; break;
      case Slot::Rhs: out += "rhs"; break;
    }
  }
  return out;
}

Expr ifThen(Expr cond, Expr then, Expr otherwise) {
  return make(Conditional{std::move(cond), std::move(then), std::move(otherwise)});
}
Expr compare(Expr lhs, Comparison op, Expr rhs) {
  return make(BoolComparison{std::move(lhs), op, std::move(rhs)});
}
Expr boolRef(std::string name, std::string mention) {
  return make(BoolConceptRef{std::move(name), std::move(mention)});
}
Expr constant(TypedValue v, bool unitAssumed) { return make(ValueConstant{normalize(v), unitAssumed}); }
Expr valueRef(std::string name, std::string mention) {
  return make(ValueConceptRef{std::move(name), std::move(mention)});
}
Expr call(std::string procedure, std::map<std::string, std::string> bindings, std::string mention) {
  return make(ProcedureCall{std::move(procedure), std::move(bindings), std::move(mention)});
}
Expr resolveBool(std::string span) { return requireSpan(ResolveBool{span}, span); }
Expr resolveValue(std::string span) { return requireSpan(ResolveValue{span}, span); }
Expr resolveProcedure(std::string span) { return requireSpan(ResolveProcedure{span}, span); }

bool same(const Expr& a, const Expr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->v.index() != b->v.index()) return false;
  return std::visit(
      overloaded{
          [&](const Conditional& x) {
            const auto& y = std::get<Conditional>(b->v);
            return same(x.cond, y.cond) && same(x.then, y.then) && same(x.otherwise, y.otherwise);
          },
          [&](const BoolComparison& x) {
            const auto& y = std::get<BoolComparison>(b->v);
            return x.op == y.op && same(x.lhs, y.lhs) && same(x.rhs, y.rhs);
          },
          [&](const BoolConceptRef& x) { return x.name == std::get<BoolConceptRef>(b->v).name; },
          [&](const ValueConstant& x) { return x.value == std::get<ValueConstant>(b->v).value; },
          [&](const ValueConceptRef& x) { return x.name == std::get<ValueConceptRef>(b->v).name; },
          [&](const ProcedureCall& x) {
            const auto& y = std::get<ProcedureCall>(b->v);
            return x.procedure == y.procedure && x.bindings == y.bindings;
          },
          [&](const ResolveBool& x) { return x.span == std::get<ResolveBool>(b->v).span; },
          [&](const ResolveValue& x) { return x.span == std::get<ResolveValue>(b->v).span; },
          [&](const ResolveProcedure& x) { return x.span == std::get<ResolveProcedure>(b->v).span; },
      },
      a->v);
}

Type typeOf(const Expr& e) {
  return std::visit(overloaded{
                        [](const Conditional&) { return Type::Script; },
                        [](const BoolComparison&) { return Type::Bool; },
                        [](const BoolConceptRef&) { return Type::Bool; },
                        [](const ResolveBool&) { return Type::Bool; },
                        [](const ValueConstant&) { return Type::Value; },
                        [](const ValueConceptRef&) { return Type::Value; },
                        [](const ResolveValue&) { return Type::Value; },
                        [](const ProcedureCall&) { return Type::Proc; },
                        [](const ResolveProcedure&) { return Type::Proc; },
                    },
                    e->v);
}

bool isHole(const Expr& e) {
  return e && (std::holds_alternative<ResolveBool>(e->v) ||
               std::holds_alternative<ResolveValue>(e->v) ||
               std::holds_alternative<ResolveProcedure>(e->v));
}

TypeReport typecheck(const Expr& e) {
  TypeReport r;
  if (!e) {
    r.errors.push_back({{}, Type::Script, std::nullopt, "root: missing expression"});
    return r;
  }
  checkNode(e, {}, r.errors);
  return r;
}

std::vector<Hole> listHoles(const Expr& e) {
  std::vector<Hole> out;
  NodePath path;
  collectHoles(e, path, out);
  return out;
}

bool isExecutable(const Expr& e) { return listHoles(e).empty(); }

Expr at(const Expr& e, const NodePath& path) {
  Expr cur = e;
  for (Slot s : path) {
    if (!cur || !hasSlot(cur, s))
      throw Error(ErrorCode::PathNotAHole, "no node at " + pathToString(path));
    cur = child(cur, s);
  }
  if (!cur) throw Error(ErrorCode::PathNotAHole, "no node at " + pathToString(path));
  return cur;
}

Expr replaceAt(const Expr& e, const NodePath& path, Expr replacement) {
  if (path.empty()) return replacement;
  if (!e || !hasSlot(e, path.front()))
    throw Error(ErrorCode::PathNotAHole, "no node at " + pathToString(path));
  NodePath rest(path.begin() + 1, path.end());
  Slot s = path.front();
  Expr c = child(e, s);
  if (rest.empty()) return withChild(e, s, std::move(replacement));
  if (!c) throw Error(ErrorCode::PathNotAHole, "no node at " + pathToString(path));
  return withChild(e, s, replaceAt(c, rest, std::move(replacement)));
}

Expr substituteHole(const Expr& e, const NodePath& path, Expr replacement) {
  Expr target = at(e, path);
  if (!isHole(target))
    throw Error(ErrorCode::PathNotAHole, pathToString(path) + " is not a resolve node");
  if (!replacement || typeOf(replacement) != typeOf(target))
    throw Error(ErrorCode::TypeMismatch,
                pathToString(path) + " expects " + std::string(typeName(typeOf(target))) +
                    ", got " +
                    (replacement ? std::string(typeName(typeOf(replacement))) : "nothing"));
  return replaceAt(e, path, std::move(replacement));
}

std::string render(const Expr& e) {
  if (!e) return "()";
  return std::visit(
      overloaded{
          [](const Conditional& c) {
            std::string out = "(if " + render(c.cond) + " " + render(c.then);
            if (c.otherwise) out += " " + render(c.otherwise);
            return out + ")";
          },
          [](const BoolComparison& b) {
            return "(" + std::string(comparisonSymbol(b.op)) + " " + render(b.lhs) + " " +
                   render(b.rhs) + ")";
          },
          [](const BoolConceptRef& r) { return "(bool " + text::quote(r.name) + ")"; },
          [](const ValueConstant& k) {
            std::string tag(unitTag(k.value.dimension));
            return "(const " + formatMagnitude(k.value.magnitude) + (tag.empty() ? "" : " " + tag) +
                   ")";
          },
          [](const ValueConceptRef& r) { return "(value " + text::quote(r.name) + ")"; },
          [](const ProcedureCall& p) {
            std::string out = "(proc " + text::quote(p.procedure);
            for (const auto& [k, v] : p.bindings) out += " (" + k + " " + text::quote(v) + ")";
            return out + ")";
          },
          [](const ResolveBool& r) { return "(resolve-bool " + text::quote(r.span) + ")"; },
          [](const ResolveValue& r) { return "(resolve-value " + text::quote(r.span) + ")"; },
          [](const ResolveProcedure& r) { return "(resolve-proc " + text::quote(r.span) + ")"; },
      },
      e->v);
}

Expr parse(std::string_view textForm) {
  Reader r{textForm};
  Expr e = r.expr();
  r.ws();
  if (r.i != textForm.size()) r.fail("trailing input");
  return e;
}

std::string_view branchName(Branch b) {
  switch (b) {
    case Branch::Then: return "then";
    case Branch::Else: return "else";
    case Branch::None: return "none";
  }
  return "none";
}

std::vector<std::string> ExecutionTrace::actions() const {
  std::vector<std::string> out;
  for (const auto& ev : events)
    if (ev.kind == TraceEvent::Kind::Action) out.push_back(ev.text);
  return out;
}

std::string ExecutionTrace::render() const {
  std::string out;
  for (const auto& ev : events) {
    out += eventKindName(ev.kind);
    out += ' ';
    out += ev.text;
    out += '\n';
  }
  return out;
}

ExecutionTrace evaluate(const Expr& e, const ExecutionEnvironment& env) {
  if (!e) throw Error(ErrorCode::MalformedExpression, "nothing to evaluate");
  auto holes = listHoles(e);
  if (!holes.empty())
    throw Error(ErrorCode::UnresolvedHole,
                "unresolved " + std::string(typeName(holes.front().type)) + " hole \"" +
                    holes.front().span + "\" at " + pathToString(holes.front().path));
  if (!env.runtime) throw Error(ErrorCode::InvalidValue, "no runtime in environment");
  Evaluator ev{env};
  ev.run(e);
  return ev.trace;
}

}  // namespace nlteach::dsl
