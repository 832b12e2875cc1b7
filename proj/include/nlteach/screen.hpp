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

#include "nlteach/entities.hpp"
#include "nlteach/value.hpp"

namespace nlteach::screen {

struct GeometryConfig {
  int width = 1080;
  int height = 1920;
  int nearLabelRadius = 300;  // px between centers
};

// Container groups list rows; it is never clicked.
enum class GuiKind { TextView, Button, Input, Image, ListItem, Container };
std::string_view kindName(GuiKind k);
std::optional<GuiKind> parseKind(std::string_view name);

struct Bounds {
  int left = 0, top = 0, right = 0, bottom = 0;
  double centerX() const { return (left + right) / 2.0; }
  double centerY() const { return (top + bottom) / 2.0; }
  friend bool operator==(const Bounds&, const Bounds&) = default;
};

struct GuiObject {
  std::string id;
  GuiKind kind = GuiKind::TextView;
  std::string text;  // may hold {{var}} placeholders in templates
  Bounds bounds;
  bool clickable = false;
  bool longClickable = false;
  std::string parent;  // empty for top-level objects
  bool visible = true;
  friend bool operator==(const GuiObject&, const GuiObject&) = default;
};

enum class ActionKind { Click, LongClickSelect, SetText, LaunchApp, GoHome };

struct Action {
  ActionKind kind = ActionKind::Click;
  std::string target;  // object id, or app name for LaunchApp
  std::string text;    // SetText only

  static Action click(std::string id) { return {ActionKind::Click, std::move(id), {}}; }
  static Action longPress(std::string id) { return {ActionKind::LongClickSelect, std::move(id), {}}; }
  static Action setText(std::string id, std::string t) {
    return {ActionKind::SetText, std::move(id), std::move(t)};
  }
  static Action launch(std::string app) { return {ActionKind::LaunchApp, std::move(app), {}}; }
  static Action home() { return {ActionKind::GoHome, {}, {}}; }

  // click(id), longpress(id), settext(id,"text"), launch(App), home
  std::string render() const;
  static Action parse(std::string_view text);  // throws MalformedDefinition
  friend bool operator==(const Action&, const Action&) = default;
};

// "launch(Weather); longpress(current_temp)"
std::vector<Action> parseActionList(std::string_view text);
std::string renderActionList(const std::vector<Action>& actions);

struct Transition {
  std::string object;
  ActionKind action = ActionKind::Click;
  std::string to;
  friend bool operator==(const Transition&, const Transition&) = default;
};

struct ScreenTemplate {
  std::string id;
  std::vector<GuiObject> objects;
  std::vector<Transition> transitions;
  friend bool operator==(const ScreenTemplate&, const ScreenTemplate&) = default;
};

struct AppDefinition {
  std::string appName;
  std::string initialScreen;
  std::vector<ScreenTemplate> screens;
  std::map<std::string, std::string> variables;  // placeholder defaults

  const ScreenTemplate* screen(std::string_view id) const;
  friend bool operator==(const AppDefinition&, const AppDefinition&) = default;
};

// Throws MalformedDefinition naming the offending field.
AppDefinition parseApp(std::string_view json, std::string_view sourceName = "<memory>");
AppDefinition loadApp(const std::string& path);
// Every *.json in `dir`, sorted by app name. Throws BadFixture.
std::vector<AppDefinition> loadAppDir(const std::string& dir);

enum class Relation { Contains, RightOf, Below, NearLabel };
std::string_view relationName(Relation r);

struct Edge {
  std::string from;
  Relation relation;
  std::string to;
  auto operator<=>(const Edge&) const = default;
  bool operator==(const Edge&) const = default;
};

inline constexpr std::string_view kRootId = "#root";

struct UiSnapshotGraph {
  std::string appName;
  std::string screenId;
  std::vector<GuiObject> nodes;  // placeholders substituted
  std::vector<Edge> edges;       // sorted
  std::map<std::string, std::vector<entities::EntityMatch>> entities;

  const GuiObject* node(std::string_view id) const;
  // Text of the label a node points to through nearLabel, if any.
  std::optional<std::string> nearLabelOf(std::string_view id) const;
  std::vector<std::string> children(std::string_view parentId) const;
  friend bool operator==(const UiSnapshotGraph&, const UiSnapshotGraph&) = default;
};

// Pure: graph of `screen` under `env`.
UiSnapshotGraph buildSnapshot(const AppDefinition& app, const ScreenTemplate& screen,
                              const std::map<std::string, std::string>& env,
                              const std::map<std::string, std::string>& inputText = {},
                              const GeometryConfig& geometry = {});

// Selector predicates.
namespace pred {
struct HasEntityDimension {
  Dimension dimension;
  friend bool operator==(const HasEntityDimension&, const HasEntityDimension&) = default;
};
struct TextEquals {
  std::string text;
  friend bool operator==(const TextEquals&, const TextEquals&) = default;
};
struct NearLabel {
  std::string text;
  friend bool operator==(const NearLabel&, const NearLabel&) = default;
};
struct KindIs {
  GuiKind kind;
  friend bool operator==(const KindIs&, const KindIs&) = default;
};
struct ObjectIdIs {
  std::string id;
  friend bool operator==(const ObjectIdIs&, const ObjectIdIs&) = default;
};
}  // namespace pred

using Predicate =
    std::variant<pred::HasEntityDimension, pred::TextEquals, pred::NearLabel, pred::KindIs, pred::ObjectIdIs>;

// Conjunction of predicates.
struct GraphQuery {
  std::vector<Predicate> predicates;

  // hasEntityDimension(duration) & nearLabel("Home to Work")
  std::string render() const;
  static GraphQuery parse(std::string_view text);  // throws MalformedDefinition
  friend bool operator==(const GraphQuery&, const GraphQuery&) = default;
};

bool matches(const GraphQuery& q, const UiSnapshotGraph& g, const GuiObject& node);
// Unique match, else the topmost-leftmost one (then smallest id). Throws
// QueryFailed when nothing matches.
const GuiObject& runQuery(const GraphQuery& q, const UiSnapshotGraph& g);

struct ActionResult {
  std::string appName;
  std::string screenId;
  bool transitioned = false;
  std::optional<GuiObject> selected;  // LongClickSelect
};

inline constexpr std::string_view kHomeApp = "Home";
inline constexpr std::string_view kHomeScreen = "home";

// One simulated phone. Copyable; the app definitions are shared read-only.
class World {
 public:
  World() = default;
  World(std::vector<AppDefinition> apps, std::map<std::string, std::string> env = {},
        GeometryConfig geometry = {});

  const std::map<std::string, std::string>& env() const { return env_; }
  void setEnv(const std::string& key, const std::string& value) { env_[key] = value; }
  void setEnv(std::map<std::string, std::string> env) { env_ = std::move(env); }

  const std::string& currentApp() const { return app_; }
  const std::string& currentScreen() const { return screen_; }
  bool hasApp(std::string_view name) const;
  std::vector<std::string> appNames() const;
  const GeometryConfig& geometry() const { return geometry_; }

  UiSnapshotGraph snapshot() const;
  // Throws NoSuchObject or NotClickable; clicks with no transition are no-ops.
  ActionResult perform(const Action& action);
  void goHome();

  bool recording() const { return recording_; }
  void setRecording(bool on) { recording_ = on; }

  friend bool operator==(const World& a, const World& b);

 private:
  std::shared_ptr<const std::vector<AppDefinition>> apps_;
  std::map<std::string, std::string> env_;
  GeometryConfig geometry_;
  std::string app_{kHomeApp};
  std::string screen_{kHomeScreen};
  std::map<std::string, std::string> inputs_;  // setText state on the current screen
  bool recording_ = false;

  const AppDefinition* findApp(std::string_view name) const;
  AppDefinition homeApp() const;
};

}  // namespace nlteach::screen
