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


#include <gtest/gtest.h>

#include <functional>

#include "nlteach/dsl.hpp"
#include "nlteach/error.hpp"

namespace nlteach::dsl {
namespace {

Expr figureParse() {
  return ifThen(resolveBool("it's hot"), resolveProcedure("order a cup of Iced Cappuccino"));
}

// Independent hole walk over the rendered tree structure.
std::vector<std::string> spansByWalk(const Expr& e) {
  std::vector<std::string> out;
  std::function<void(const Expr&)> walk = [&](const Expr& n) {
    if (!n) return;
    std::visit(
        [&](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, Conditional>) {
            walk(x.cond);
            walk(x.then);
            walk(x.otherwise);
          } else if constexpr (std::is_same_v<T, BoolComparison>) {
            walk(x.lhs);
            walk(x.rhs);
          } else if constexpr (std::is_same_v<T, ResolveBool> || std::is_same_v<T, ResolveValue> ||
                               std::is_same_v<T, ResolveProcedure>) {
            out.push_back(x.span);
          }
        },
        n->v);
  };
  walk(e);
  return out;
}

TEST(Typecheck, FigureParseIsWellTyped) {
  EXPECT_TRUE(typecheck(figureParse()).ok());
  EXPECT_EQ(typeOf(figureParse()), Type::Script);
}

TEST(Typecheck, ValueInConditionSlot) {
  auto r = typecheck(ifThen(constant(TypedValue::fahrenheit(85)), resolveProcedure("x")));
  ASSERT_EQ(r.errors.size(), 1u);
  EXPECT_EQ(r.errors[0].path, NodePath{Slot::Cond});
  EXPECT_EQ(r.errors[0].expected, Type::Bool);
  EXPECT_EQ(r.errors[0].actual, Type::Value);
}

TEST(Typecheck, Comparison) {
  auto e = compare(valueRef("temperature"), Comparison::GT, constant(TypedValue::fahrenheit(85)));
  EXPECT_TRUE(typecheck(e).ok());
  EXPECT_EQ(typeOf(e), Type::Bool);
  EXPECT_FALSE(typecheck(compare(boolRef("hot"), Comparison::GT, constant(TypedValue::number(1)))).ok());
}

TEST(Holes, EmptySpanRejected) { EXPECT_THROW(resolveBool(""), Error); }

TEST(Holes, DepthFirstOrder) {
  auto hs = listHoles(figureParse());
  ASSERT_EQ(hs.size(), 2u);
  EXPECT_EQ(hs[0].path, NodePath{Slot::Cond});
  EXPECT_EQ(hs[0].type, Type::Bool);
  EXPECT_EQ(hs[0].span, "it's hot");
  EXPECT_EQ(hs[1].path, NodePath{Slot::Then});
  EXPECT_EQ(hs[1].type, Type::Proc);
  EXPECT_FALSE(isExecutable(figureParse()));
  EXPECT_TRUE(listHoles(call("order_Starbucks")).empty());
  EXPECT_TRUE(isExecutable(call("order_Starbucks")));
}

TEST(Holes, TwoValueHolesLeftFirst) {
  auto hs = listHoles(compare(resolveValue("price of a Uber"), Comparison::GT, resolveValue("price of a Lyft")));
  ASSERT_EQ(hs.size(), 2u);
  EXPECT_EQ(hs[0].span, "price of a Uber");
  EXPECT_EQ(hs[1].span, "price of a Lyft");
  EXPECT_EQ(hs[0].type, Type::Value);
}

TEST(Substitute, ReplacesOnlyTheHole) {
  auto e = figureParse();
  auto before = render(e);
  auto out = substituteHole(e, {Slot::Cond}, boolRef("hot"));
  EXPECT_EQ(render(e), before);
  EXPECT_EQ(render(out), "(if (bool \"hot\") (resolve-proc \"order a cup of Iced Cappuccino\"))");
  // The untouched branch is shared, not copied.
  EXPECT_EQ(at(out, {Slot::Then}).get(), at(e, {Slot::Then}).get());
}

TEST(Substitute, Errors) {
  try {
    substituteHole(figureParse(), {Slot::Cond}, call("order_Starbucks"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TypeMismatch);
  }
  auto e = substituteHole(figureParse(), {Slot::Cond}, boolRef("hot"));
  try {
    substituteHole(e, {Slot::Cond}, boolRef("cold"));
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::PathNotAHole);
  }
}

TEST(Substitute, RemainingHolesMatchWalk) {
  auto e = ifThen(compare(resolveValue("temperature"), Comparison::GT, constant(TypedValue::fahrenheit(85))),
                  resolveProcedure("order a latte"), resolveProcedure("order tea"));
  auto out = substituteHole(e, {Slot::Cond, Slot::Lhs}, valueRef("temperature"));
  std::vector<std::string> spans;
  for (const auto& h : listHoles(out)) spans.push_back(h.span);
  EXPECT_EQ(spans, spansByWalk(out));
  EXPECT_EQ(spans, (std::vector<std::string>{"order a latte", "order tea"}));
}

TEST(Render, CanonicalTextRoundTrips) {
  const std::string s =
      "(if (> (value \"temperature\") (const 85 F)) (proc \"order_Starbucks\" (item \"Iced Cappuccino\")) "
      "(proc \"order_Starbucks\" (item \"Hot Latte\")))";
  auto e = parse(s);
  EXPECT_EQ(render(e), s);
  EXPECT_TRUE(same(parse("( if (>  (value \"temperature\")\n(const 85 F))(proc \"order_Starbucks\" (item \"Iced "
                         "Cappuccino\")) (proc \"order_Starbucks\" (item \"Hot Latte\")) )"),
                   e));
  for (std::string t : {"(bool \"a \\\"b\\\"\")", "(= (const 420 tod) (const 1170 tod))", "(< (const 2) (const 3.5))",
                        "(resolve-value \"x\")", "(proc \"p\")"})
    EXPECT_TRUE(same(parse(render(parse(t))), parse(t))) << t;
  EXPECT_THROW(parse("(if"), Error);
  EXPECT_THROW(parse("(frobnicate)"), Error);
}

class FixedRuntime : public Runtime {
 public:
  double temperature = 90;
  std::vector<std::string> reads;
  Expr booleanConcept(const std::string& name, const std::string&) override {
    if (name != "hot") throw Error(ErrorCode::UnknownConcept, name);
    return compare(valueRef("temperature"), Comparison::GT, constant(TypedValue::fahrenheit(85)));
  }
  TypedValue readValue(const std::string& name, const std::string&) override {
    reads.push_back(name);
    if (name == "commute") return TypedValue::minutes(30);
    return TypedValue::fahrenheit(temperature);
  }
  std::vector<std::string> runProcedure(const ProcedureCall& c) override {
    if (c.procedure != "order_Starbucks") throw Error(ErrorCode::UnknownProcedure, c.procedure);
    return {"click(" + c.bindings.at("item") + ")"};
  }
};

Expr coffeeRule() {
  return ifThen(boolRef("hot"), call("order_Starbucks", {{"item", "Iced Cappuccino"}}),
                call("order_Starbucks", {{"item", "Hot Latte"}}));
}

TEST(Evaluate, BranchesFollowTheCondition) {
  FixedRuntime rt;
  auto hot = evaluate(coffeeRule(), {&rt, "order a cup of Iced Cappuccino"});
  EXPECT_EQ(hot.branch, Branch::Then);
  EXPECT_EQ(hot.actions(), std::vector<std::string>{"click(Iced Cappuccino)"});
  rt.temperature = 70;
  auto mild = evaluate(coffeeRule(), {&rt, "order a cup of Iced Cappuccino"});
  EXPECT_EQ(mild.branch, Branch::Else);
  EXPECT_EQ(mild.actions(), std::vector<std::string>{"click(Hot Latte)"});
}

TEST(Evaluate, MissingElseIsNoOp) {
  FixedRuntime rt;
  rt.temperature = 70;
  auto t = evaluate(ifThen(boolRef("hot"), call("order_Starbucks", {{"item", "x"}})), {&rt, "c"});
  EXPECT_EQ(t.branch, Branch::None);
  EXPECT_TRUE(t.actions().empty());
}

TEST(Evaluate, Deterministic) {
  FixedRuntime a, b;
  EXPECT_EQ(evaluate(coffeeRule(), {&a, "c"}).render(), evaluate(coffeeRule(), {&b, "c"}).render());
}

TEST(Evaluate, Errors) {
  FixedRuntime rt;
  auto code = [&](const Expr& e, std::string ctx = "c") {
    try {
      evaluate(e, {&rt, ctx});
    } catch (const Error& err) {
      return err.code();
    }
    return ErrorCode::Io;
  };
  EXPECT_EQ(code(compare(valueRef("commute"), Comparison::GT, constant(TypedValue::usd(100)))),
            ErrorCode::DimensionMismatch);
  EXPECT_EQ(code(ifThen(boolRef("cold"), call("order_Starbucks", {{"item", "x"}}))), ErrorCode::UnknownConcept);
  EXPECT_EQ(code(call("fly")), ErrorCode::UnknownProcedure);
  EXPECT_EQ(code(figureParse()), ErrorCode::UnresolvedHole);
}

}  // namespace
}  // namespace nlteach::dsl
