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

#include <algorithm>

#include "checks.hpp"
#include "nlteach/demo.hpp"
#include "nlteach/error.hpp"

namespace nlteach::demo {
namespace {

using screen::Action;
using screen::parseActionList;
using testing::fixtureWorld;

ErrorCode codeOf(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Io;
}

RecordedScript cappuccino(screen::World& w) {
  return recordProcedure(w, "order a cup of Iced Cappuccino",
                         parseActionList("launch(Starbucks); click(iced_cappuccino); click(order)"));
}

TEST(Recording, StartsAtHomeAndRejectsSecond) {
  auto w = fixtureWorld();
  w.perform(Action::launch("Maps"));
  auto s = startRecording(w, ProcedureMode{"order a latte"});
  EXPECT_EQ(w.currentApp(), screen::kHomeApp);
  EXPECT_TRUE(w.recording());
  EXPECT_EQ(codeOf([&] { startRecording(w, ProcedureMode{"x"}); }), ErrorCode::RecordingAlreadyActive);
  s.reset();
  EXPECT_FALSE(w.recording());
}

TEST(Recording, EmptyRecording) {
  auto w = fixtureWorld();
  EXPECT_EQ(codeOf([&] { recordProcedure(w, "do it", {}); }), ErrorCode::EmptyRecording);
}

TEST(Recording, StepsCarryTheirScreen) {
  auto w = fixtureWorld();
  auto s = cappuccino(w);
  ASSERT_EQ(s.steps.size(), 3u);
  EXPECT_EQ(s.steps[0].appName, screen::kHomeApp);
  EXPECT_EQ(s.steps[1].appName, "Starbucks");
  EXPECT_EQ(s.steps[1].screenId, "menu");
  EXPECT_EQ(s.steps[2].screenId, "item");
}

TEST(Parameters, MenuItem) {
  auto w = fixtureWorld();
  auto s = cappuccino(w);
  EXPECT_EQ(s.name, "order_Starbucks");
  ASSERT_EQ(s.parameters.size(), 1u);
  const auto& p = s.parameters[0];
  EXPECT_EQ(p.name, "item");
  EXPECT_EQ(p.recordedValue, "Iced Cappuccino");
  EXPECT_EQ(p.step, 1u);
  EXPECT_NE(std::find(p.alternatives.begin(), p.alternatives.end(), "Hot Latte"), p.alternatives.end());
  EXPECT_EQ(std::find(p.alternatives.begin(), p.alternatives.end(), "Iced Cappuccino"), p.alternatives.end());
}

TEST(Parameters, AlarmTime) {
  auto w = fixtureWorld();
  auto s = recordProcedure(w, "set an alarm for 7:00 am",
                           parseActionList("launch(Clock); click(add_alarm); click(t_0700); click(save)"));
  ASSERT_EQ(s.parameters.size(), 1u);
  EXPECT_EQ(s.parameters[0].name, "time");
  EXPECT_EQ(s.parameters[0].recordedValue, "7:00 AM");
  auto t = replayProcedure(s, {{"time", "6:30 AM"}}, w);
  auto acts = t.actions();
  EXPECT_NE(std::find_if(acts.begin(), acts.end(), [](auto& a) { return a.find("t_0630") != std::string::npos; }),
            acts.end());
  EXPECT_EQ(w.currentScreen(), "alarm_set");
}

TEST(Parameters, NoOverlapNoParameter) {
  auto w = fixtureWorld();
  auto s = recordProcedure(w, "request an Uber", parseActionList("launch(Uber); click(request)"));
  EXPECT_TRUE(s.parameters.empty());
  EXPECT_EQ(s.name, "request_Uber");
}

TEST(Replay, Fidelity) {
  auto w = fixtureWorld();
  auto s = cappuccino(w);
  auto fresh = fixtureWorld();
  auto t = replayProcedure(s, {}, fresh);
  std::vector<std::string> recorded;
  for (const auto& st : s.steps) recorded.push_back(st.action.render());
  auto acts = t.actions();
  ASSERT_EQ(acts.size(), recorded.size());
  for (std::size_t i = 0; i < acts.size(); ++i) EXPECT_EQ(acts[i].rfind(recorded[i], 0), 0u) << acts[i];
  EXPECT_EQ(fresh.currentScreen(), "confirmation");
}

TEST(Replay, BindingRetargetsOnlyTheParameter) {
  auto w = fixtureWorld();
  auto s = cappuccino(w);
  auto t = replayProcedure(s, {{"item", "Hot Latte"}}, w);
  auto acts = t.actions();
  ASSERT_EQ(acts.size(), 3u);
  EXPECT_EQ(acts[0].rfind("launch(Starbucks)", 0), 0u);
  EXPECT_EQ(acts[1].rfind("click(hot_latte)", 0), 0u);
  EXPECT_EQ(acts[2].rfind("click(order)", 0), 0u);
}

TEST(Replay, Errors) {
  auto w = fixtureWorld();
  auto s = cappuccino(w);
  EXPECT_EQ(codeOf([&] { replayProcedure(s, {{"item", "Espresso Machine"}}, w); }), ErrorCode::UnknownBindingValue);
  auto broken = s;
  broken.steps[2].action = Action::click("checkout");
  EXPECT_EQ(codeOf([&] { replayProcedure(broken, {}, w); }), ErrorCode::ReplayBroken);
}

TEST(Highlight, ByDimension) {
  auto w = fixtureWorld();
  w.perform(Action::launch("Maps"));
  auto h = highlightCandidates(w.snapshot(), Dimension::Duration);
  EXPECT_EQ(h.objectIds, (std::vector<std::string>{"route_work_time", "route_gym_time", "route_school_time"}));
  EXPECT_FALSE(h.untyped);
  w.perform(Action::home());
  w.perform(Action::launch("Weather"));
  EXPECT_EQ(highlightCandidates(w.snapshot(), Dimension::Temperature).objectIds,
            std::vector<std::string>{"current_temp"});
  EXPECT_TRUE(highlightCandidates(w.snapshot(), Dimension::Money).objectIds.empty());
  auto untyped = highlightCandidates(w.snapshot(), std::nullopt);
  EXPECT_TRUE(untyped.untyped);
  EXPECT_EQ(untyped.objectIds, std::vector<std::string>{"current_temp"});
}

TEST(Highlight, NothingTyped) {
  auto w = fixtureWorld();
  w.perform(Action::launch("Uber"));
  EXPECT_TRUE(highlightCandidates(w.snapshot(), Dimension::Money).objectIds.empty());
  EXPECT_TRUE(highlightCandidates(w.snapshot(), std::nullopt).objectIds.empty());
}

TEST(ValueQuery, SelectorFromNearestLabel) {
  auto w = fixtureWorld();
  auto q = recordValueQuery(w, "commute", Dimension::Duration,
                            parseActionList("launch(Maps); longpress(route_work_time)"));
  EXPECT_EQ(q.selector.render(), "hasEntityDimension(duration) & nearLabel(\"Home to Work\")");
  EXPECT_EQ(q.navigationActions, parseActionList("launch(Maps)"));
  EXPECT_EQ(q.name, "query_Commute");
  auto t = recordValueQuery(w, "temperature", Dimension::Temperature,
                            parseActionList("launch(Weather); longpress(current_temp)"));
  EXPECT_EQ(t.selector.render(), "hasEntityDimension(temperature) & nearLabel(\"Current\")");
}

TEST(ValueQuery, SelectorResolvesToSelection) {
  auto w = fixtureWorld();
  for (auto [app, id, d] : std::vector<std::tuple<std::string, std::string, Dimension>>{
           {"Maps", "route_gym_time", Dimension::Duration},
           {"Maps", "route_school_time", Dimension::Duration},
           {"Marriott", "price", Dimension::Money},
           {"Oven", "oven_temp", Dimension::Temperature}}) {
    auto q = recordValueQuery(w, "v", d, {Action::launch(app), Action::longPress(id)});
    auto v = fixtureWorld();
    for (const auto& a : q.navigationActions) v.perform(a);
    EXPECT_EQ(screen::runQuery(q.selector, v.snapshot()).id, id);
  }
}

TEST(ValueQuery, SelectionMustBeLongPressed) {
  auto w = fixtureWorld();
  auto s = startRecording(w, ValueQueryMode{"temperature", Dimension::Temperature});
  s->perform(Action::launch("Weather"));
  EXPECT_EQ(codeOf([&] { s->finishValueQuery("current_temp"); }), ErrorCode::NoSuchObject);
  s->perform(Action::longPress("city"));
  EXPECT_EQ(codeOf([&] { s->finishValueQuery("city"); }), ErrorCode::DimensionMismatch);
}

TEST(ValueQuery, ReplayReadsEnvironment) {
  auto w = fixtureWorld();
  auto q = recordValueQuery(w, "temperature", Dimension::Temperature,
                            parseActionList("launch(Weather); longpress(current_temp)"));
  w.setEnv("weather.temperature", "90");
  EXPECT_EQ(replayValueQuery(q, w), TypedValue::fahrenheit(90));
  EXPECT_EQ(w.currentApp(), screen::kHomeApp);
  auto c = recordValueQuery(w, "commute", Dimension::Duration,
                            parseActionList("launch(Maps); longpress(route_work_time)"));
  w.setEnv("maps.commuteMinutes", "45");
  EXPECT_EQ(replayValueQuery(c, w), TypedValue::minutes(45));
}

TEST(ValueQuery, MissingValueFails) {
  auto w = fixtureWorld();
  auto q = recordValueQuery(w, "temperature", Dimension::Temperature,
                            parseActionList("launch(Weather); longpress(current_temp)"));
  w.setEnv("weather.temperature", "unavailable");
  EXPECT_EQ(codeOf([&] { replayValueQuery(q, w); }), ErrorCode::QueryFailed);
  EXPECT_EQ(w.currentApp(), screen::kHomeApp);
}

}  // namespace
}  // namespace nlteach::demo
