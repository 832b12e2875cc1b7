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

#include <filesystem>
#include <fstream>

#include "checks.hpp"
#include "nlteach/error.hpp"
#include "nlteach/kb.hpp"

namespace nlteach::kb {
namespace {

ErrorCode codeOf(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Io;
}

dsl::Expr above(double f) {
  return dsl::compare(dsl::valueRef("temperature"), Comparison::GT, dsl::constant(TypedValue::fahrenheit(f)));
}

BooleanConceptEntry hot(const std::string& context, double threshold) {
  return {"hot", {"hot"}, {{context, above(threshold), 0}}};
}

std::string tempPath(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("nlteach_kb_test_" + name)).string();
}

TEST(Store, UpsertAppendsNewContexts) {
  KnowledgeBase k;
  k.store(hot("order a cup of Iced Cappuccino", 85));
  auto refs = k.lookupByUtterance("hot");
  ASSERT_EQ(refs.size(), 1u);
  EXPECT_EQ(refs[0].kind, EntryKind::BooleanConcept);
  k.store(hot("start the cook timer", 400));
  EXPECT_EQ(k.booleanConcept("hot")->variants.size(), 2u);
  k.store(hot("start the cook timer", 425));
  ASSERT_EQ(k.booleanConcept("hot")->variants.size(), 2u);
  EXPECT_TRUE(dsl::same(k.resolveBoolean("hot", "start the cook timer").variant.expr, above(425)));
}

TEST(Store, Validation) {
  KnowledgeBase k;
  k.store(ValueConceptEntry{"commute", {"commute"}, {{"a", TypedValue::minutes(30), 0}}});
  EXPECT_EQ(codeOf([&] { k.store(ValueConceptEntry{"commute", {"commute"}, {{"b", TypedValue::usd(5), 0}}}); }),
            ErrorCode::DimensionConflict);
  EXPECT_EQ(codeOf([&] { k.store(BooleanConceptEntry{"x", {"x"}, {}}); }), ErrorCode::InvalidEntry);
  EXPECT_EQ(codeOf([&] { k.store(BooleanConceptEntry{"x", {"x"}, {{"c", dsl::resolveBool("y"), 0}}}); }),
            ErrorCode::InvalidEntry);
  EXPECT_EQ(codeOf([&] {
              k.store(BooleanConceptEntry{"x", {"x"}, {{"c", dsl::constant(TypedValue::number(1)), 0}}});
            }),
            ErrorCode::InvalidEntry);
  EXPECT_EQ(codeOf([&] { k.store(ProcedureEntry{"p", {}, {}}); }), ErrorCode::InvalidEntry);
}

TEST(Store, VariantCountNeverDrops) {
  KnowledgeBase k;
  std::size_t last = 0;
  for (int i = 0; i < 20; ++i) {
    k.store(hot("context " + std::to_string(i % 7), 80 + i));
    auto n = k.booleanConcept("hot")->variants.size();
    EXPECT_GE(n, last);
    last = n;
  }
  EXPECT_EQ(last, 7u);
}

TEST(Lookup, LongestMatchFirst) {
  KnowledgeBase k;
  k.store(BooleanConceptEntry{"heavy traffic", {"heavy traffic"}, {{"c", above(1), 0}}});
  k.store(BooleanConceptEntry{"heavy", {"heavy"}, {{"c", above(2), 0}}});
  auto refs = k.lookupByUtterance("There is Heavy Traffic!");
  ASSERT_EQ(refs.size(), 2u);
  EXPECT_EQ(refs[0].name, "heavy traffic");
  EXPECT_EQ(refs[1].name, "heavy");
  EXPECT_EQ(k.lookupByUtterance("There is Heavy Traffic!"), refs);
  EXPECT_TRUE(k.lookupByUtterance("sunny").empty());
}

TEST(Resolve, ThreeCases) {
  KnowledgeBase k;
  k.store(hot("order a cup of Iced Cappuccino", 85));
  auto same = k.resolveBoolean("hot", "order a cup of Iced Cappuccino");
  EXPECT_FALSE(same.reuseDecisionNeeded);
  auto other = k.resolveBoolean("hot", "start the cook timer");
  EXPECT_TRUE(other.reuseDecisionNeeded);
  EXPECT_TRUE(dsl::same(other.variant.expr, above(85)));
  EXPECT_EQ(codeOf([&] { k.resolveBoolean("nonexistent", "x"); }), ErrorCode::UnknownName);
  EXPECT_EQ(codeOf([&] { k.resolveValue("nonexistent", "x"); }), ErrorCode::UnknownName);
}

TEST(Resolve, ProposesMostRecent) {
  KnowledgeBase k;
  k.store(hot("a", 80));
  k.store(hot("b", 90));
  k.store(hot("a", 70));
  EXPECT_TRUE(dsl::same(k.resolveBoolean("hot", "c").variant.expr, above(70)));
}

TEST(Persist, RoundTripAndBytes) {
  auto k = load(std::string(NLTEACH_DATA_DIR) + "/kb/task1_seed.json");
  EXPECT_NE(k.booleanConcept("hot"), nullptr);
  auto a = tempPath("a.json"), b = tempPath("b.json");
  persist(k, a);
  auto back = load(a);
  EXPECT_EQ(back, k);
  persist(back, b);
  std::ifstream fa(a), fb(b);
  std::string sa((std::istreambuf_iterator<char>(fa)), {}), sb((std::istreambuf_iterator<char>(fb)), {});
  EXPECT_EQ(sa, sb);
  EXPECT_NE(sa.find("\"version\": 1"), std::string::npos);
  EXPECT_NE(sa.find("(> (value \\\"temperature\\\") (const 85 F))"), std::string::npos);
}

TEST(Persist, CorruptInputs) {
  auto s = serialize(testing::randomKnowledgeBase(5));
  EXPECT_EQ(codeOf([&] { deserialize(s.substr(0, s.size() / 2)); }), ErrorCode::CorruptStore);
  EXPECT_EQ(codeOf([] { deserialize(R"({"version":2,"procedures":[],"booleanConcepts":[],"valueConcepts":[]})"); }),
            ErrorCode::CorruptStore);
  EXPECT_EQ(codeOf([] {
              deserialize(
                  R"({"version":1,"procedures":[],"booleanConcepts":[],"valueConcepts":[],"mood":"happy"})");
            }),
            ErrorCode::CorruptStore);
  try {
    deserialize(R"js({"version":1,"revision":2,"rules":[],"procedures":[],"valueConcepts":[],"booleanConcepts":[
      {"name":"ok","triggers":["ok"],"variants":[{"context":"c","expr":"(bool \"x\")","storedAt":1}]},
      {"name":"bad","triggers":["bad"],"variants":[{"context":"c","expr":"(if","storedAt":2}]}]})js");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::CorruptStore);
    EXPECT_NE(std::string(e.what()).find("[1]"), std::string::npos) << e.what();
  }
  EXPECT_EQ(codeOf([] { load("/nonexistent/kb.json"); }), ErrorCode::Io);
}

TEST(Persist, GrowAndReload) {
  auto k = testing::randomKnowledgeBase(99);
  auto path = tempPath("grow.json");
  persist(k, path);
  auto again = load(path);
  for (int i = 0; i < 10; ++i)
    again.store(ValueConceptEntry{"extra " + std::to_string(i), {"extra"}, {{"c", TypedValue::number(i), 0}}});
  persist(again, path);
  EXPECT_EQ(load(path), again);
}

TEST(Runtime, EvaluatesAgainstTheWorld) {
  auto k = load(std::string(NLTEACH_DATA_DIR) + "/kb/task1_seed.json");
  auto w = testing::fixtureWorld();
  KnowledgeRuntime rt(k, w);
  w.setEnv("weather.temperature", "88");
  EXPECT_EQ(rt.readValue("temperature", "turn on the air conditioner"), TypedValue::fahrenheit(88));
  EXPECT_TRUE(dsl::same(rt.booleanConcept("hot", "turn on the air conditioner"), above(85)));
  EXPECT_EQ(codeOf([&] { rt.booleanConcept("cold", "x"); }), ErrorCode::UnknownConcept);
  EXPECT_EQ(codeOf([&] { rt.runProcedure({"fly", {}, {}}); }), ErrorCode::UnknownProcedure);
}

}  // namespace
}  // namespace nlteach::kb
