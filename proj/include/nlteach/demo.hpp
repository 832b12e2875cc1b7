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
#include <variant>
#include <vector>

#include "nlteach/dsl.hpp"
#include "nlteach/screen.hpp"
#include "nlteach/value.hpp"

namespace nlteach::demo {

// One captured action and the screen it was performed on.
struct RecordedStep {
  screen::Action action;
  std::string appName;
  std::string screenId;
  std::string objectText;  // text of the target object, if any
  friend bool operator==(const RecordedStep&, const RecordedStep&) = default;
};

struct ScriptParameter {
  std::string name;
  std::string recordedValue;
  std::vector<std::string> alternatives;
  std::size_t step = 0;  // index of the parameterized click
  friend bool operator==(const ScriptParameter&, const ScriptParameter&) = default;
};

struct RecordedScript {
  std::string name;
  std::vector<RecordedStep> steps;
  std::vector<ScriptParameter> parameters;
  std::vector<std::string> triggerUtterances;
  friend bool operator==(const RecordedScript&, const RecordedScript&) = default;
};

struct ValueQuery {
  std::string name;
  std::vector<screen::Action> navigationActions;
  screen::GraphQuery selector;
  std::optional<Dimension> expectedDimension;
  friend bool operator==(const ValueQuery&, const ValueQuery&) = default;
};

struct ProcedureMode {
  std::string goalUtterance;
};
struct ValueQueryMode {
  std::string conceptName;
  std::optional<Dimension> expectedDimension;
};
using RecordingMode = std::variant<ProcedureMode, ValueQueryMode>;

struct Highlight {
  std::vector<std::string> objectIds;
  bool untyped = false;  // no expected dimension: every entity-bearing node
  friend bool operator==(const Highlight&, const Highlight&) = default;
};

Highlight highlightCandidates(const screen::UiSnapshotGraph& snapshot,
                              std::optional<Dimension> expected);

// Captures every action performed through it. The world is sent home when
// the session starts and flagged as recording until it is destroyed.
class RecordingSession {
 public:
  RecordingSession(screen::World& world, RecordingMode mode);  // throws RecordingAlreadyActive
  ~RecordingSession();
  RecordingSession(const RecordingSession&) = delete;
  RecordingSession& operator=(const RecordingSession&) = delete;

  const RecordingMode& mode() const { return mode_; }
  const std::vector<RecordedStep>& steps() const { return steps_; }
  // Last long-press target, if any.
  std::optional<std::string> selection() const { return selection_; }
  Highlight highlight() const;

  screen::ActionResult perform(const screen::Action& action);

  // Throws EmptyRecording.
  RecordedScript finishProcedure() const;
  // Throws EmptyRecording or NoSuchObject when `selectedObjectId` was never
  // long-pressed, DimensionMismatch when it shows no value of the expected
  // dimension.
  ValueQuery finishValueQuery(const std::string& selectedObjectId) const;

 private:
  screen::World* world_;
  RecordingMode mode_;
  std::vector<RecordedStep> steps_;
  std::vector<screen::UiSnapshotGraph> before_;  // snapshot preceding each step
  std::optional<std::string> selection_;
};

std::unique_ptr<RecordingSession> startRecording(screen::World& world, RecordingMode mode);

// One-shot helpers over a whole action list.
RecordedScript recordProcedure(screen::World& world, const std::string& goalUtterance,
                               const std::vector<screen::Action>& actions);
// The last long-press in `actions` is the selection.
ValueQuery recordValueQuery(screen::World& world, const std::string& conceptName,
                            std::optional<Dimension> expected,
                            const std::vector<screen::Action>& actions);

std::string procedureName(const std::string& goalUtterance, const std::vector<RecordedStep>& steps);
std::string valueQueryName(const std::string& conceptName);

// Throws UnknownBindingValue or ReplayBroken. Missing bindings keep the
// recorded value.
dsl::ExecutionTrace replayProcedure(const RecordedScript& script,
                                    const std::map<std::string, std::string>& bindings,
                                    screen::World& world);

// Throws QueryFailed. The world is back home afterwards.
TypedValue replayValueQuery(const ValueQuery& query, screen::World& world);

}  // namespace nlteach::demo
