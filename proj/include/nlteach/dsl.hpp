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

#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "nlteach/value.hpp"

namespace nlteach::dsl {

enum class Type { Bool, Value, Proc, Script };
std::string_view typeName(Type t);

struct Node;
// Immutable and shareable; substitution copies only the spine it rewrites.
using Expr = std::shared_ptr<const Node>;

struct Conditional {
  Expr cond;
  Expr then;
  Expr otherwise;  // may be null
};

struct BoolComparison {
  Expr lhs;
  Comparison op = Comparison::GT;
  Expr rhs;
};

// `mention` and `unitAssumed` record how the node was written. They are not
// part of the expression's identity and never rendered.
struct BoolConceptRef {
  std::string name;
  std::string mention;
};

struct ValueConstant {
  TypedValue value;
  bool unitAssumed = false;
};

struct ValueConceptRef {
  std::string name;
  std::string mention;
};

struct ProcedureCall {
  std::string procedure;
  std::map<std::string, std::string> bindings;
  std::string mention;
};

struct ResolveBool {
  std::string span;
};
struct ResolveValue {
  std::string span;
};
struct ResolveProcedure {
  std::string span;
};

using NodeVariant = std::variant<Conditional, BoolComparison, BoolConceptRef, ValueConstant,
                                 ValueConceptRef, ProcedureCall, ResolveBool, ResolveValue,
                                 ResolveProcedure>;

struct Node {
  NodeVariant v;
};

// Child slots addressable by a path.
enum class Slot { Cond, Then, Else, Lhs, Rhs };
using NodePath = std::vector<Slot>;
std::string pathToString(const NodePath& p);  // "cond.lhs"; "root" when empty

Expr ifThen(Expr cond, Expr then, Expr otherwise = nullptr);
Expr compare(Expr lhs, Comparison op, Expr rhs);
Expr boolRef(std::string name, std::string mention = {});
Expr constant(TypedValue v, bool unitAssumed = false);
Expr valueRef(std::string name, std::string mention = {});
Expr call(std::string procedure, std::map<std::string, std::string> bindings = {},
          std::string mention = {});
// Throws MalformedExpression on an empty span.
Expr resolveBool(std::string span);
Expr resolveValue(std::string span);
Expr resolveProcedure(std::string span);

// Structural equality; metadata fields are ignored.
bool same(const Expr& a, const Expr& b);

Type typeOf(const Expr& e);
bool isHole(const Expr& e);

struct TypeError {
  NodePath path;
  Type expected;
  std::optional<Type> actual;  // empty when the child is missing
  std::string message;
};

struct TypeReport {
  std::vector<TypeError> errors;
  bool ok() const { return errors.empty(); }
};

TypeReport typecheck(const Expr& e);

struct Hole {
  NodePath path;
  Type type;
  std::string span;
};

// Depth-first, left to right.
std::vector<Hole> listHoles(const Expr& e);
bool isExecutable(const Expr& e);

// Throws PathNotAHole when the path does not lead to a node.
Expr at(const Expr& e, const NodePath& path);
// Replaces whatever sits at `path`; the replacement must keep the slot type.
Expr replaceAt(const Expr& e, const NodePath& path, Expr replacement);
// Throws PathNotAHole or TypeMismatch.
Expr substituteHole(const Expr& e, const NodePath& path, Expr replacement);

// Canonical text, e.g. (if (bool "hot") (proc "order_Starbucks" (item "Hot Latte"))).
std::string render(const Expr& e);
// Whitespace-insensitive inverse of render. Throws MalformedExpression.
Expr parse(std::string_view text);

// Evaluation.

class Runtime {
 public:
  virtual ~Runtime() = default;
  // Bool-typed, hole-free definition for `name` in `context`.
  virtual Expr booleanConcept(const std::string& name, const std::string& context) = 0;
  virtual TypedValue readValue(const std::string& name, const std::string& context) = 0;
  // Performs the procedure and returns the actions it took, rendered.
  virtual std::vector<std::string> runProcedure(const ProcedureCall& call) = 0;
};

struct ExecutionEnvironment {
  Runtime* runtime = nullptr;
  std::string contextLabel;
};

enum class Branch { Then, Else, None };
std::string_view branchName(Branch b);

struct TraceEvent {
  enum class Kind { ValueRead, Concept, Comparison, Branch, Call, Action };
  Kind kind;
  std::string text;
  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

struct ExecutionTrace {
  std::optional<Branch> branch;
  std::vector<TraceEvent> events;

  std::vector<std::string> actions() const;
  std::string render() const;
  friend bool operator==(const ExecutionTrace&, const ExecutionTrace&) = default;
};

// Throws UnresolvedHole, UnknownConcept, UnknownProcedure, DimensionMismatch
// or QueryFailed.
ExecutionTrace evaluate(const Expr& e, const ExecutionEnvironment& env);

}  // namespace nlteach::dsl
