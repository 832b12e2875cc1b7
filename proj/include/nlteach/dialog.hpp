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

#include <deque>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "nlteach/demo.hpp"
#include "nlteach/dsl.hpp"
#include "nlteach/kb.hpp"
#include "nlteach/lexicon.hpp"
#include "nlteach/parser.hpp"
#include "nlteach/screen.hpp"

namespace nlteach::dialog {

enum class Phase {
  AwaitingCommand,
  AwaitingExplanation,
  AwaitingDemonstration,
  AwaitingElse,
  AwaitingReuseDecision,
  AwaitingDisambiguation,
  AwaitingConfirmation,
  Done,
};
std::string_view phaseName(Phase p);
std::optional<Phase> parsePhase(std::string_view name);

enum class FrameType { Bool, Value, Proc };

// One concept or procedure being taught.
struct Frame {
  FrameType type = FrameType::Bool;
  std::string span;         // words the user used
  std::string conceptName;  // storage name
  dsl::NodePath holePath;   // inside the owner expression
  dsl::Expr partial;        // explanation under resolution, null until given
  std::optional<Dimension> expectedDimension;
  bool redefinition = false;           // the user declined to reuse a stored variant
  std::optional<Comparison> keepOperator;
  std::optional<demo::ValueQuery> learnedQuery;
  std::optional<demo::RecordedScript> learnedScript;
};
bool operator==(const Frame& a, const Frame& b);

struct ReuseQuestion {
  FrameType type = FrameType::Bool;  // Bool or Value
  std::string name;
  std::string mention;
  dsl::NodePath path;
  std::string priorContext;
  friend bool operator==(const ReuseQuestion&, const ReuseQuestion&) = default;
};

enum class Continuation { Command, BoolExplanation, ValueExplanation, ElseAction };

struct Disambiguation {
  Continuation continuation = Continuation::Command;
  dsl::Expr candidate;
  std::vector<parser::Ambiguity> remaining;  // front is being asked
};
bool operator==(const Disambiguation& a, const Disambiguation& b);

enum class ConfirmKind { Frame, Script };

using Pending = std::variant<std::monostate, ReuseQuestion, Disambiguation, ConfirmKind>;

struct DialogState {
  Phase phase = Phase::AwaitingCommand;
  std::string command;
  std::string contextLabel;
  dsl::Expr root;
  std::vector<Frame> frameStack;  // back is the innermost
  bool elseAsked = false;
  bool elseDeclined = false;
  Pending pending;
  std::string pendingTemplate;
  std::string pendingQuestion;
  std::vector<std::string> pendingOptions;
  std::string lastRule;  // name of the rule stored by the last completed command
};
bool operator==(const DialogState& a, const DialogState& b);

namespace input {
struct Text {
  std::string text;
};
struct Demonstration {
  std::vector<screen::Action> actions;
};
struct Option {
  std::size_t index = 0;
};
struct Undo {};
}  // namespace input
using Input = std::variant<input::Text, input::Demonstration, input::Option, input::Undo>;

struct AgentMove {
  std::string templateId;
  std::string text;
  std::vector<std::string> options;
};

struct Effects {
  bool demonstrationMode = false;
  std::optional<demo::Highlight> highlight;
  bool screenChanged = false;
};

struct TurnResult {
  std::vector<AgentMove> moves;
  Effects effects;
};

enum class Speaker { User, Agent };

struct TranscriptRecord {
  std::size_t turnIndex = 0;
  Speaker speaker = Speaker::User;
  std::string text;
  std::string templateId;  // agent records only
  Phase phase = Phase::AwaitingCommand;
  bool retracted = false;
};

// Everything an undo restores.
struct SessionState {
  DialogState dialog;
  kb::KnowledgeBase knowledge;
  Lexicon lexicon;
  screen::World world;
  friend bool operator==(const SessionState&, const SessionState&) = default;
};

inline constexpr std::size_t kUndoDepth = 64;

// The seed lexicon grown with every stored concept and procedure.
Lexicon lexiconFor(const kb::KnowledgeBase& knowledge);

// Concept name for a Boolean span: "it's hot" -> "hot", "the hotel is
// cheap" -> "cheap", "there is heavy traffic" -> "heavy traffic".
std::string booleanConceptName(std::string_view span);
std::string valueConceptName(std::string_view span);
// "it's hot" -> "it's not hot".
std::string negatePhrase(std::string_view span);
std::string negatedCondition(const dsl::Expr& cond);
// Plain-words rendering used in confirmations.
std::string describe(const dsl::Expr& e);

class Session {
 public:
  Session(kb::KnowledgeBase knowledge, screen::World world);

  const AgentMove& greeting() const { return greeting_; }
  // Throws IllegalInputForPhase or NothingToUndo; unparseable text is
  // answered with a rephrase request instead.
  TurnResult handle(const Input& in);

  const DialogState& state() const { return current_.dialog; }
  const kb::KnowledgeBase& knowledge() const { return current_.knowledge; }
  const Lexicon& lexicon() const { return current_.lexicon; }
  screen::World& world() { return current_.world; }
  const screen::World& world() const { return current_.world; }
  const SessionState& snapshot() const { return current_; }
  const std::vector<TranscriptRecord>& transcript() const { return transcript_; }
  std::size_t undoDepth() const { return undo_.size(); }

 private:
  SessionState current_;
  std::deque<SessionState> undo_;
  std::vector<TranscriptRecord> transcript_;
  std::size_t turn_ = 0;
  AgentMove greeting_;
};

}  // namespace nlteach::dialog
