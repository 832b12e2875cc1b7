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

#include "nlteach/demo.hpp"

#include <algorithm>
#include <set>

#include "nlteach/error.hpp"
#include "nlteach/text.hpp"

namespace nlteach::demo {
namespace {

using screen::Action;
using screen::ActionKind;
using screen::GuiKind;
using screen::GuiObject;
using screen::UiSnapshotGraph;

bool hasDimension(const UiSnapshotGraph& g, const std::string& id, Dimension d) {
  auto it = g.entities.find(id);
  if (it == g.entities.end()) return false;
  return std::any_of(it->second.begin(), it->second.end(),
                     [&](const auto& m) { return m.value.dimension == d; });
}

std::string actionText(const Action& a, const std::string& objectText) {
  std::string out = a.render();
  if (!objectText.empty()) out += " [" + objectText + "]";
  return out;
}

struct HomeOnExit {
  screen::World& world;
  ~HomeOnExit() { world.goHome(); }
};

}  // namespace

Highlight highlightCandidates(const UiSnapshotGraph& snapshot, std::optional<Dimension> expected) {
  Highlight h;
  h.untyped = !expected.has_value();
  for (const auto& n : snapshot.nodes) {
    if (!snapshot.entities.count(n.id)) continue;
    if (expected && !hasDimension(snapshot, n.id, *expected)) continue;
    h.objectIds.push_back(n.id);
  }
  return h;
}

RecordingSession::RecordingSession(screen::World& world, RecordingMode mode)
    : world_(&world), mode_(std::move(mode)) {
  if (world.recording()) throw Error(ErrorCode::RecordingAlreadyActive, "a recording is already active");
  world.setRecording(true);
  world.goHome();
}

RecordingSession::~RecordingSession() { world_->setRecording(false); }

Highlight RecordingSession::highlight() const {
  auto* vq = std::get_if<ValueQueryMode>(&mode_);
  if (!vq) return {};
  return highlightCandidates(world_->snapshot(), vq->expectedDimension);
}

screen::ActionResult RecordingSession::perform(const Action& action) {
  UiSnapshotGraph snap = world_->snapshot();
  RecordedStep step{action, world_->currentApp(), world_->currentScreen(), {}};
  if (const GuiObject* o = snap.node(action.target)) step.objectText = o->text;
  auto result = world_->perform(action);
  if (action.kind == ActionKind::LongClickSelect) selection_ = action.target;
  steps_.push_back(std::move(step));
  before_.push_back(std::move(snap));
  return result;
}

std::string procedureName(const std::string& goalUtterance, const std::vector<RecordedStep>& steps) {
  auto goal = text::normalizedTokens(goalUtterance);
  std::string verb = goal.empty() ? "do" : text::slug(goal.front());
  if (verb.empty()) verb = "do";
  std::string app;
  for (const auto& s : steps) {
    if (s.action.kind == ActionKind::LaunchApp) app = s.action.target;
    else if (s.appName != screen::kHomeApp) app = s.appName;
    if (!app.empty()) break;
  }
  if (app.empty()) app = "Home";
  return verb + "_" + app;
}

std::string valueQueryName(const std::string& conceptName) {
  return "query_" + text::camel(conceptName);
}

RecordedScript RecordingSession::finishProcedure() const {
  if (steps_.empty()) throw Error(ErrorCode::EmptyRecording, "no actions were demonstrated");
  std::string goal;
  if (auto* p = std::get_if<ProcedureMode>(&mode_)) goal = p->goalUtterance;
  RecordedScript script;
  script.name = procedureName(goal, steps_);
  script.steps = steps_;
  if (!goal.empty()) script.triggerUtterances.push_back(goal);
  auto goalTokens = text::normalizedTokens(goal);
  // Screens are counted per visit so that revisiting a screen can bind again.
  std::set<std::size_t> boundVisits;
  std::size_t visit = 0;
  std::set<std::string> names;
  for (std::size_t i = 0; i < steps_.size(); ++i) {
    if (i > 0 && (steps_[i].appName != steps_[i - 1].appName ||
                  steps_[i].screenId != steps_[i - 1].screenId))
      ++visit;
    const RecordedStep& st = steps_[i];
    if (st.action.kind != ActionKind::Click || boundVisits.count(visit)) continue;
    const GuiObject* o = before_[i].node(st.action.target);
    if (!o || (o->kind != GuiKind::ListItem && o->kind != GuiKind::Button)) continue;
    if (st.appName == screen::kHomeApp) continue;
    auto needle = text::normalizedTokens(o->text);
    auto pos = text::findRun(goalTokens, needle);
    // A match at the start is the goal's own verb ("Order"), not an argument.
    if (needle.empty() || !pos || *pos == 0) continue;
    ScriptParameter p;
    p.name = o->parent.empty() ? text::slug(o->text) : o->parent;
    std::string base = p.name;
    for (int k = 2; names.count(p.name); ++k) p.name = base + "_" + std::to_string(k);
    names.insert(p.name);
    p.recordedValue = o->text;
    p.step = i;
    if (!o->parent.empty()) {
      for (const auto& sib : before_[i].nodes)
        if (sib.parent == o->parent && sib.id != o->id && sib.kind == o->kind &&
            !text::trim(sib.text).empty())
          p.alternatives.push_back(sib.text);
    }
    script.parameters.push_back(std::move(p));
    boundVisits.insert(visit);
  }
  return script;
}

ValueQuery RecordingSession::finishValueQuery(const std::string& selectedObjectId) const {
  if (steps_.empty()) throw Error(ErrorCode::EmptyRecording, "no actions were demonstrated");
  std::optional<std::size_t> at;
  for (std::size_t i = steps_.size(); i-- > 0;)
    if (steps_[i].action.kind == ActionKind::LongClickSelect && steps_[i].action.target == selectedObjectId) {
      at = i;
      break;
    }
  if (!at) throw Error(ErrorCode::NoSuchObject, "'" + selectedObjectId + "' was not selected");
  const UiSnapshotGraph& snap = before_[*at];
  std::optional<Dimension> expected;
  std::string conceptName;
  if (auto* vq = std::get_if<ValueQueryMode>(&mode_)) {
    expected = vq->expectedDimension;
    conceptName = vq->conceptName;
  }
  auto ents = snap.entities.find(selectedObjectId);
  if (ents == snap.entities.end() || ents->second.empty())
    throw Error(ErrorCode::DimensionMismatch, "the selected object shows no value");
  if (!expected) expected = ents->second.front().value.dimension;
  if (!hasDimension(snap, selectedObjectId, *expected))
    throw Error(ErrorCode::DimensionMismatch,
                "the selected object shows no " + std::string(dimensionName(*expected)));
  ValueQuery q;
  q.name = valueQueryName(conceptName.empty() ? selectedObjectId : conceptName);
  q.expectedDimension = expected;
  for (std::size_t i = 0; i < *at; ++i)
    if (steps_[i].action.kind != ActionKind::LongClickSelect) q.navigationActions.push_back(steps_[i].action);
  q.selector.predicates.push_back(screen::pred::HasEntityDimension{*expected});
  if (auto label = snap.nearLabelOf(selectedObjectId)) {
    q.selector.predicates.push_back(screen::pred::NearLabel{*label});
    bool selfCheck = false;
    try {
      selfCheck = screen::runQuery(q.selector, snap).id == selectedObjectId;
    } catch (const Error&) {
    }
    if (selfCheck) return q;
    q.selector.predicates.pop_back();
  }
  q.selector.predicates.push_back(screen::pred::ObjectIdIs{selectedObjectId});
  return q;
}

std::unique_ptr<RecordingSession> startRecording(screen::World& world, RecordingMode mode) {
  return std::make_unique<RecordingSession>(world, std::move(mode));
}

RecordedScript recordProcedure(screen::World& world, const std::string& goalUtterance,
                               const std::vector<Action>& actions) {
  RecordedScript script;
  {
    RecordingSession s(world, ProcedureMode{goalUtterance});
    for (const auto& a : actions) s.perform(a);
    script = s.finishProcedure();
  }
  world.goHome();
  return script;
}

ValueQuery recordValueQuery(screen::World& world, const std::string& conceptName,
                            std::optional<Dimension> expected, const std::vector<Action>& actions) {
  ValueQuery q;
  {
    RecordingSession s(world, ValueQueryMode{conceptName, expected});
    for (const auto& a : actions) s.perform(a);
    if (!s.selection()) throw Error(ErrorCode::EmptyRecording, "no value was selected");
    q = s.finishValueQuery(*s.selection());
  }
  world.goHome();
  return q;
}

dsl::ExecutionTrace replayProcedure(const RecordedScript& script,
                                    const std::map<std::string, std::string>& bindings,
                                    screen::World& world) {
  std::map<std::size_t, const ScriptParameter*> byStep;
  std::map<std::size_t, std::string> wanted;
  for (const auto& p : script.parameters) {
    std::string value = p.recordedValue;
    if (auto it = bindings.find(p.name); it != bindings.end()) value = it->second;
    auto norm = text::normalizePhrase(value);
    bool known = norm == text::normalizePhrase(p.recordedValue) ||
                 std::any_of(p.alternatives.begin(), p.alternatives.end(),
                             [&](const std::string& a) { return text::normalizePhrase(a) == norm; });
    if (!known)
      throw Error(ErrorCode::UnknownBindingValue,
                  "'" + value + "' is not a known value for " + p.name + " in " + script.name);
    byStep[p.step] = &p;
    wanted[p.step] = norm;
  }
  for (const auto& [name, _] : bindings)
    if (std::none_of(script.parameters.begin(), script.parameters.end(),
                     [&](const ScriptParameter& p) { return p.name == name; }))
      throw Error(ErrorCode::UnknownBindingValue, script.name + " has no parameter '" + name + "'");

  dsl::ExecutionTrace trace;
  world.goHome();
  for (std::size_t i = 0; i < script.steps.size(); ++i) {
    const RecordedStep& st = script.steps[i];
    if (world.currentApp() != st.appName || world.currentScreen() != st.screenId)
      throw Error(ErrorCode::ReplayBroken, script.name + " step " + std::to_string(i + 1) + " expected " +
                                               st.appName + "/" + st.screenId + " but found " +
                                               world.currentApp() + "/" + world.currentScreen());
    Action a = st.action;
    UiSnapshotGraph snap = world.snapshot();
    if (auto it = byStep.find(i); it != byStep.end()) {
      const GuiObject* recorded = snap.node(a.target);
      if (!recorded)
        throw Error(ErrorCode::ReplayBroken, script.name + ": object '" + a.target + "' is gone");
      const GuiObject* target = nullptr;
      for (const auto& n : snap.nodes)
        if ((n.id == recorded->id || (!recorded->parent.empty() && n.parent == recorded->parent)) &&
            text::normalizePhrase(n.text) == wanted[i]) {
          target = &n;
          break;
        }
      if (!target)
        throw Error(ErrorCode::ReplayBroken, script.name + ": no '" + wanted[i] + "' on " +
                                                 st.appName + "/" + st.screenId);
      a.target = target->id;
    }
    std::string objectText;
    if (const GuiObject* o = snap.node(a.target)) objectText = o->text;
    try {
      world.perform(a);
    } catch (const Error& e) {
      throw Error(ErrorCode::ReplayBroken, script.name + " step " + std::to_string(i + 1) + ": " + e.what());
    }
    trace.events.push_back({dsl::TraceEvent::Kind::Action, actionText(a, objectText)});
  }
  return trace;
}

TypedValue replayValueQuery(const ValueQuery& query, screen::World& world) {
  world.goHome();
  HomeOnExit home{world};
  for (const auto& a : query.navigationActions) {
    try {
      world.perform(a);
    } catch (const Error& e) {
      throw Error(ErrorCode::QueryFailed, query.name + ": " + e.what());
    }
  }
  UiSnapshotGraph snap = world.snapshot();
  const GuiObject& node = screen::runQuery(query.selector, snap);
  auto it = snap.entities.find(node.id);
  if (it != snap.entities.end())
    for (const auto& m : it->second)
      if (!query.expectedDimension || m.value.dimension == *query.expectedDimension)
        return normalize(m.value);
  throw Error(ErrorCode::QueryFailed, query.name + ": '" + node.text + "' shows no value");
}

}  // namespace nlteach::demo
