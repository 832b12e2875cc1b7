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

#include "nlteach/screen.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "nlteach/error.hpp"
#include "nlteach/text.hpp"

namespace nlteach::screen {
namespace {

using json = nlohmann::json;

constexpr std::string_view kLaunchPrefix = "launch:";

[[noreturn]] void malformed(std::string_view source, const std::string& field, const std::string& why) {
  throw Error(ErrorCode::MalformedDefinition, std::string(source) + ": " + field + ": " + why);
}

void checkKeys(std::string_view source, const std::string& field, const json& j,
               std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) malformed(source, field, "expected an object");
  for (const auto& [k, _] : j.items())
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
      malformed(source, field, "unknown key '" + k + "'");
}

std::string getString(std::string_view source, const std::string& field, const json& j,
                      const char* key, bool required = true) {
  if (!j.contains(key)) {
    if (required) malformed(source, field + "." + key, "missing");
    return {};
  }
  if (!j[key].is_string()) malformed(source, field + "." + key, "expected a string");
  return j[key].get<std::string>();
}

bool getBool(std::string_view source, const std::string& field, const json& j, const char* key,
             bool fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_boolean()) malformed(source, field + "." + key, "expected true or false");
  return j[key].get<bool>();
}

std::optional<ActionKind> transitionAction(std::string_view name) {
  if (name == "click") return ActionKind::Click;
  if (name == "longpress") return ActionKind::LongClickSelect;
  return std::nullopt;
}

std::string substitute(std::string_view templ, const std::map<std::string, std::string>& env,
                       const std::map<std::string, std::string>& defaults) {
  std::string out;
  std::size_t i = 0;
  while (i < templ.size()) {
    auto open = templ.find("{{", i);
    if (open == std::string_view::npos) {
      out.append(templ.substr(i));
      break;
    }
    auto close = templ.find("}}", open + 2);
    if (close == std::string_view::npos) {
      out.append(templ.substr(i));
      break;
    }
    out.append(templ.substr(i, open - i));
    std::string var = text::trim(templ.substr(open + 2, close - open - 2));
    if (auto it = env.find(var); it != env.end()) out += it->second;
    else if (auto d = defaults.find(var); d != defaults.end()) out += d->second;
    i = close + 2;
  }
  return out;
}

bool overlaps(int a0, int a1, int b0, int b1) { return a0 < b1 && b0 < a1; }

double distance(const Bounds& a, const Bounds& b) {
  return std::hypot(a.centerX() - b.centerX(), a.centerY() - b.centerY());
}

// Splits on `sep` outside double quotes.
std::vector<std::string> splitOutsideQuotes(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (c == '\\' && quoted && i + 1 < s.size()) {
      cur += c;
      cur += s[++i];
      continue;
    }
    if (c == '"') quoted = !quoted;
    if (c == sep && !quoted) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::string unquote(std::string_view s, std::string_view context) {
  std::string t = text::trim(s);
  if (t.size() < 2 || t.front() != '"' || t.back() != '"')
    throw Error(ErrorCode::MalformedDefinition, "expected a quoted string in '" + std::string(context) + "'");
  std::string out;
  for (std::size_t i = 1; i + 1 < t.size(); ++i) {
    if (t[i] == '\\' && i + 2 < t.size()) ++i;
    out += t[i];
  }
  return out;
}

// name(arg) -> {name, arg}
std::pair<std::string, std::string> callForm(std::string_view s, std::string_view what) {
  std::string t = text::trim(s);
  auto open = t.find('(');
  if (open == std::string::npos || t.back() != ')')
    throw Error(ErrorCode::MalformedDefinition, "malformed " + std::string(what) + " '" + t + "'");
  return {text::trim(t.substr(0, open)), t.substr(open + 1, t.size() - open - 2)};
}

}  // namespace

std::string_view kindName(GuiKind k) {
  switch (k) {
    case GuiKind::TextView: return "textView";
    case GuiKind::Button: return "button";
    case GuiKind::Input: return "input";
    case GuiKind::Image: return "image";
    case GuiKind::ListItem: return "listItem";
    case GuiKind::Container: return "container";
  }
  return "?";
}

std::optional<GuiKind> parseKind(std::string_view name) {
  for (auto k : {GuiKind::TextView, GuiKind::Button, GuiKind::Input, GuiKind::Image,
                 GuiKind::ListItem, GuiKind::Container})
    if (kindName(k) == name) return k;
  return std::nullopt;
}

std::string_view relationName(Relation r) {
  switch (r) {
    case Relation::Contains: return "contains";
    case Relation::RightOf: return "rightOf";
    case Relation::Below: return "below";
    case Relation::NearLabel: return "nearLabel";
  }
  return "?";
}

std::string Action::render() const {
  switch (kind) {
    case ActionKind::Click: return "click(" + target + ")";
    case ActionKind::LongClickSelect: return "longpress(" + target + ")";
    case ActionKind::SetText: return "settext(" + target + "," + text::quote(text) + ")";
    case ActionKind::LaunchApp: return "launch(" + target + ")";
    case ActionKind::GoHome: return "home";
  }
  return "?";
}

Action Action::parse(std::string_view raw) {
  std::string t = text::trim(raw);
  if (t == "home" || t == "home()") return home();
  auto [name, arg] = callForm(t, "action");
  std::string a = text::trim(arg);
  std::string lname = text::toLower(name);
  if (lname == "settext") {
    auto comma = a.find(',');
    if (comma == std::string::npos)
      throw Error(ErrorCode::MalformedDefinition, "settext needs an id and a text: '" + t + "'");
    return setText(text::trim(a.substr(0, comma)), unquote(a.substr(comma + 1), t));
  }
  if (a.empty()) throw Error(ErrorCode::MalformedDefinition, "action without a target: '" + t + "'");
  if (lname == "click") return click(a);
  if (lname == "longpress" || lname == "longclickselect") return longPress(a);
  if (lname == "launch") return launch(a);
  throw Error(ErrorCode::MalformedDefinition, "unknown action '" + name + "'");
}

std::vector<Action> parseActionList(std::string_view s) {
  std::vector<Action> out;
  for (const auto& part : splitOutsideQuotes(s, ';'))
    if (!text::trim(part).empty()) out.push_back(Action::parse(part));
  return out;
}

std::string renderActionList(const std::vector<Action>& actions) {
  std::string out;
  for (const auto& a : actions) {
    if (!out.empty()) out += "; ";
    out += a.render();
  }
  return out;
}

const ScreenTemplate* AppDefinition::screen(std::string_view id) const {
  for (const auto& s : screens)
    if (s.id == id) return &s;
  return nullptr;
}

AppDefinition parseApp(std::string_view content, std::string_view source) {
  json j;
  try {
    j = json::parse(content);
  } catch (const json::parse_error& e) {
    malformed(source, "document", e.what());
  }
  checkKeys(source, "app", j, {"appName", "initialScreen", "screens", "variables"});
  AppDefinition app;
  app.appName = getString(source, "app", j, "appName");
  app.initialScreen = getString(source, "app", j, "initialScreen");
  if (app.appName.empty()) malformed(source, "app.appName", "empty");
  if (app.appName == kHomeApp) malformed(source, "app.appName", "'Home' is reserved");
  if (j.contains("variables")) {
    if (!j["variables"].is_object()) malformed(source, "app.variables", "expected an object");
    for (const auto& [k, v] : j["variables"].items()) {
      if (!v.is_string()) malformed(source, "app.variables." + k, "expected a string");
      app.variables[k] = v.get<std::string>();
    }
  }
  if (!j.contains("screens") || !j["screens"].is_array() || j["screens"].empty())
    malformed(source, "app.screens", "expected a non-empty array");
  GeometryConfig geo;
  std::set<std::string> screenIds;
  for (std::size_t si = 0; si < j["screens"].size(); ++si) {
    const json& js = j["screens"][si];
    std::string f = "screens[" + std::to_string(si) + "]";
    checkKeys(source, f, js, {"id", "objects", "transitions"});
    ScreenTemplate st;
    st.id = getString(source, f, js, "id");
    if (st.id.empty() || !screenIds.insert(st.id).second)
      malformed(source, f + ".id", "empty or duplicate screen id '" + st.id + "'");
    if (!js.contains("objects") || !js["objects"].is_array())
      malformed(source, f + ".objects", "expected an array");
    std::set<std::string> ids;
    for (std::size_t oi = 0; oi < js["objects"].size(); ++oi) {
      const json& jo = js["objects"][oi];
      std::string of = f + ".objects[" + std::to_string(oi) + "]";
      checkKeys(source, of, jo,
                {"id", "kind", "text", "bounds", "clickable", "longClickable", "parent", "visible"});
      GuiObject o;
      o.id = getString(source, of, jo, "id");
      if (o.id.empty() || o.id == kRootId || !ids.insert(o.id).second)
        malformed(source, of + ".id", "empty, reserved or duplicate id '" + o.id + "'");
      auto kind = parseKind(getString(source, of, jo, "kind"));
      if (!kind) malformed(source, of + ".kind", "unknown kind");
      o.kind = *kind;
      o.text = getString(source, of, jo, "text", false);
      if (!jo.contains("bounds") || !jo["bounds"].is_array() || jo["bounds"].size() != 4)
        malformed(source, of + ".bounds", "expected [left, top, right, bottom]");
      for (const auto& b : jo["bounds"])
        if (!b.is_number_integer()) malformed(source, of + ".bounds", "expected integers");
      o.bounds = {jo["bounds"][0].get<int>(), jo["bounds"][1].get<int>(), jo["bounds"][2].get<int>(),
                  jo["bounds"][3].get<int>()};
      if (o.bounds.right <= o.bounds.left || o.bounds.bottom <= o.bounds.top)
        malformed(source, of + ".bounds", "degenerate rectangle");
      if (o.bounds.left < 0 || o.bounds.top < 0 || o.bounds.right > geo.width ||
          o.bounds.bottom > geo.height)
        malformed(source, of + ".bounds", "outside the screen");
      o.clickable = getBool(source, of, jo, "clickable", false);
      o.longClickable = getBool(source, of, jo, "longClickable", false);
      o.visible = getBool(source, of, jo, "visible", true);
      o.parent = getString(source, of, jo, "parent", false);
      st.objects.push_back(std::move(o));
    }
    for (const auto& o : st.objects) {
      if (o.parent.empty()) continue;
      if (o.parent == o.id || !ids.count(o.parent))
        malformed(source, f + ".objects." + o.id + ".parent", "unknown parent '" + o.parent + "'");
    }
    // Parent chains must end at the root.
    for (const auto& o : st.objects) {
      std::string cur = o.parent;
      std::size_t steps = 0;
      while (!cur.empty()) {
        if (++steps > st.objects.size())
          malformed(source, f + ".objects." + o.id + ".parent", "cycle in parent chain");
        auto it = std::find_if(st.objects.begin(), st.objects.end(),
                               [&](const GuiObject& x) { return x.id == cur; });
        cur = it->parent;
      }
    }
    if (js.contains("transitions")) {
      if (!js["transitions"].is_array()) malformed(source, f + ".transitions", "expected an array");
      for (std::size_t ti = 0; ti < js["transitions"].size(); ++ti) {
        const json& jt = js["transitions"][ti];
        std::string tf = f + ".transitions[" + std::to_string(ti) + "]";
        checkKeys(source, tf, jt, {"object", "action", "to"});
        Transition t;
        t.object = getString(source, tf, jt, "object");
        auto act = transitionAction(getString(source, tf, jt, "action", false).empty()
                                        ? "click"
                                        : getString(source, tf, jt, "action"));
        if (!act) malformed(source, tf + ".action", "expected click or longpress");
        t.action = *act;
        t.to = getString(source, tf, jt, "to");
        if (!ids.count(t.object)) malformed(source, tf + ".object", "unknown object '" + t.object + "'");
        st.transitions.push_back(std::move(t));
      }
    }
    app.screens.push_back(std::move(st));
  }
  for (const auto& st : app.screens)
    for (std::size_t ti = 0; ti < st.transitions.size(); ++ti)
      if (!app.screen(st.transitions[ti].to))
        malformed(source, "screens." + st.id + ".transitions[" + std::to_string(ti) + "].to",
                  "missing screen '" + st.transitions[ti].to + "'");
  if (!app.screen(app.initialScreen))
    malformed(source, "app.initialScreen", "missing screen '" + app.initialScreen + "'");
  return app;
}

AppDefinition loadApp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MalformedDefinition, path + ": cannot read file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parseApp(ss.str(), path);
}

std::vector<AppDefinition> loadAppDir(const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw Error(ErrorCode::BadFixture, "no app directory '" + dir + "'");
  std::vector<std::string> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path().string());
  std::sort(files.begin(), files.end());
  std::vector<AppDefinition> apps;
  std::set<std::string> names;
  for (const auto& f : files) {
    try {
      apps.push_back(loadApp(f));
    } catch (const Error& e) {
      throw Error(ErrorCode::BadFixture, e.what());
    }
    if (!names.insert(apps.back().appName).second)
      throw Error(ErrorCode::BadFixture, "duplicate app '" + apps.back().appName + "' in " + dir);
  }
  if (apps.empty()) throw Error(ErrorCode::BadFixture, "no app definitions in '" + dir + "'");
  std::sort(apps.begin(), apps.end(),
            [](const AppDefinition& a, const AppDefinition& b) { return a.appName < b.appName; });
  return apps;
}

const GuiObject* UiSnapshotGraph::node(std::string_view id) const {
  for (const auto& n : nodes)
    if (n.id == id) return &n;
  return nullptr;
}

std::optional<std::string> UiSnapshotGraph::nearLabelOf(std::string_view id) const {
  for (const auto& e : edges)
    if (e.relation == Relation::NearLabel && e.from == id)
      if (const auto* l = node(e.to)) return l->text;
  return std::nullopt;
}

std::vector<std::string> UiSnapshotGraph::children(std::string_view parentId) const {
  std::vector<std::string> out;
  for (const auto& n : nodes)
    if (n.parent == parentId) out.push_back(n.id);
  return out;
}

UiSnapshotGraph buildSnapshot(const AppDefinition& app, const ScreenTemplate& screen,
                              const std::map<std::string, std::string>& env,
                              const std::map<std::string, std::string>& inputText,
                              const GeometryConfig& geometry) {
  UiSnapshotGraph g;
  g.appName = app.appName;
  g.screenId = screen.id;
  for (const auto& o : screen.objects) {
    GuiObject n = o;
    n.text = substitute(o.text, env, app.variables);
    if (auto it = inputText.find(o.id); it != inputText.end() && o.kind == GuiKind::Input)
      n.text = it->second;
    g.nodes.push_back(std::move(n));
  }
  for (const auto& n : g.nodes) {
    auto found = entities::extractEntities(n.text);
    if (!found.empty()) g.entities[n.id] = std::move(found);
  }
  std::set<Edge> edges;
  for (const auto& n : g.nodes)
    edges.insert({n.parent.empty() ? std::string(kRootId) : n.parent, Relation::Contains, n.id});
  for (const auto& a : g.nodes) {
    for (const auto& b : g.nodes) {
      if (a.id == b.id) continue;
      if (a.bounds.left >= b.bounds.right &&
          overlaps(a.bounds.top, a.bounds.bottom, b.bounds.top, b.bounds.bottom))
        edges.insert({a.id, Relation::RightOf, b.id});
      if (a.bounds.top >= b.bounds.bottom &&
          overlaps(a.bounds.left, a.bounds.right, b.bounds.left, b.bounds.right))
        edges.insert({a.id, Relation::Below, b.id});
    }
  }
  for (const auto& v : g.nodes) {
    const GuiObject* best = nullptr;
    double bestD = 0;
    for (const auto& l : g.nodes) {
      if (l.id == v.id || l.kind != GuiKind::TextView || text::trim(l.text).empty() ||
          g.entities.count(l.id))
        continue;
      double d = distance(v.bounds, l.bounds);
      if (d > geometry.nearLabelRadius) continue;
      auto key = [&](const GuiObject& x, double dist) {
        return std::make_tuple(dist, x.bounds.centerX(), x.bounds.centerY(), x.id);
      };
      if (!best || key(l, d) < key(*best, bestD)) {
        best = &l;
        bestD = d;
      }
    }
    if (best) edges.insert({v.id, Relation::NearLabel, best->id});
  }
  g.edges.assign(edges.begin(), edges.end());
  return g;
}

std::string GraphQuery::render() const {
  std::string out;
  for (const auto& p : predicates) {
    if (!out.empty()) out += " & ";
    std::visit(
        [&](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, pred::HasEntityDimension>)
            out += "hasEntityDimension(" + std::string(dimensionName(x.dimension)) + ")";
          else if constexpr (std::is_same_v<T, pred::TextEquals>)
            out += "textEquals(" + text::quote(x.text) + ")";
          else if constexpr (std::is_same_v<T, pred::NearLabel>)
            out += "nearLabel(" + text::quote(x.text) + ")";
          else if constexpr (std::is_same_v<T, pred::KindIs>)
            out += "kindIs(" + std::string(kindName(x.kind)) + ")";
          else
            out += "objectIdIs(" + text::quote(x.id) + ")";
        },
        p);
  }
  return out;
}

GraphQuery GraphQuery::parse(std::string_view s) {
  GraphQuery q;
  for (const auto& part : splitOutsideQuotes(s, '&')) {
    if (text::trim(part).empty())
      throw Error(ErrorCode::MalformedDefinition, "empty predicate in '" + std::string(s) + "'");
    auto [name, arg] = callForm(part, "predicate");
    if (name == "hasEntityDimension") {
      auto d = parseDimension(text::trim(arg));
      if (!d) throw Error(ErrorCode::MalformedDefinition, "unknown dimension '" + arg + "'");
      q.predicates.push_back(pred::HasEntityDimension{*d});
    } else if (name == "textEquals") {
      q.predicates.push_back(pred::TextEquals{unquote(arg, part)});
    } else if (name == "nearLabel") {
      q.predicates.push_back(pred::NearLabel{unquote(arg, part)});
    } else if (name == "kindIs") {
      auto k = parseKind(text::trim(arg));
      if (!k) throw Error(ErrorCode::MalformedDefinition, "unknown kind '" + arg + "'");
      q.predicates.push_back(pred::KindIs{*k});
    } else if (name == "objectIdIs") {
      q.predicates.push_back(pred::ObjectIdIs{unquote(arg, part)});
    } else {
      throw Error(ErrorCode::MalformedDefinition, "unknown predicate '" + name + "'");
    }
  }
  if (q.predicates.empty()) throw Error(ErrorCode::MalformedDefinition, "empty query");
  return q;
}

bool matches(const GraphQuery& q, const UiSnapshotGraph& g, const GuiObject& node) {
  for (const auto& p : q.predicates) {
    bool ok = std::visit(
        [&](const auto& x) -> bool {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, pred::HasEntityDimension>) {
            auto it = g.entities.find(node.id);
            if (it == g.entities.end()) return false;
            return std::any_of(it->second.begin(), it->second.end(),
                               [&](const auto& m) { return m.value.dimension == x.dimension; });
          } else if constexpr (std::is_same_v<T, pred::TextEquals>) {
            return text::normalizePhrase(node.text) == text::normalizePhrase(x.text);
          } else if constexpr (std::is_same_v<T, pred::NearLabel>) {
            auto l = g.nearLabelOf(node.id);
            return l && text::normalizePhrase(*l) == text::normalizePhrase(x.text);
          } else if constexpr (std::is_same_v<T, pred::KindIs>) {
            return node.kind == x.kind;
          } else {
            return node.id == x.id;
          }
        },
        p);
    if (!ok) return false;
  }
  return true;
}

const GuiObject& runQuery(const GraphQuery& q, const UiSnapshotGraph& g) {
  const GuiObject* best = nullptr;
  for (const auto& n : g.nodes) {
    if (!matches(q, g, n)) continue;
    auto key = [](const GuiObject& o) { return std::tie(o.bounds.top, o.bounds.left, o.id); };
    if (!best || key(n) < key(*best)) best = &n;
  }
  if (!best)
    throw Error(ErrorCode::QueryFailed,
                "no object matches " + q.render() + " on " + g.appName + "/" + g.screenId);
  return *best;
}

World::World(std::vector<AppDefinition> apps, std::map<std::string, std::string> env,
             GeometryConfig geometry)
    : apps_(std::make_shared<const std::vector<AppDefinition>>(std::move(apps))),
      env_(std::move(env)),
      geometry_(geometry) {}

const AppDefinition* World::findApp(std::string_view name) const {
  if (!apps_) return nullptr;
  for (const auto& a : *apps_)
    if (a.appName == name) return &a;
  return nullptr;
}

bool World::hasApp(std::string_view name) const { return findApp(name) != nullptr; }

std::vector<std::string> World::appNames() const {
  std::vector<std::string> out;
  if (apps_)
    for (const auto& a : *apps_) out.push_back(a.appName);
  return out;
}

AppDefinition World::homeApp() const {
  AppDefinition home;
  home.appName = std::string(kHomeApp);
  home.initialScreen = std::string(kHomeScreen);
  ScreenTemplate s;
  s.id = std::string(kHomeScreen);
  int i = 0;
  for (const auto& name : appNames()) {
    int col = i % 4, row = i / 4;
    GuiObject b;
    b.id = std::string(kLaunchPrefix) + name;
    b.kind = GuiKind::Button;
    b.text = name;
    b.bounds = {30 + col * 262, 200 + row * 300, 30 + col * 262 + 232, 200 + row * 300 + 232};
    b.clickable = true;
    s.objects.push_back(std::move(b));
    ++i;
  }
  home.screens.push_back(std::move(s));
  return home;
}

UiSnapshotGraph World::snapshot() const {
  if (app_ == kHomeApp) {
    AppDefinition home = homeApp();
    return buildSnapshot(home, home.screens.front(), env_, inputs_, geometry_);
  }
  const AppDefinition* app = findApp(app_);
  return buildSnapshot(*app, *app->screen(screen_), env_, inputs_, geometry_);
}

void World::goHome() {
  app_ = std::string(kHomeApp);
  screen_ = std::string(kHomeScreen);
  inputs_.clear();
}

ActionResult World::perform(const Action& action) {
  auto moveTo = [&](const std::string& app, const std::string& screen) {
    app_ = app;
    screen_ = screen;
    inputs_.clear();
    return ActionResult{app_, screen_, true, std::nullopt};
  };
  switch (action.kind) {
    case ActionKind::GoHome:
      goHome();
      return {app_, screen_, true, std::nullopt};
    case ActionKind::LaunchApp: {
      const AppDefinition* app = findApp(action.target);
      if (!app) throw Error(ErrorCode::NoSuchObject, "no app named '" + action.target + "'");
      return moveTo(app->appName, app->initialScreen);
    }
    default:
      break;
  }
  UiSnapshotGraph g = snapshot();
  const GuiObject* obj = g.node(action.target);
  if (!obj)
    throw Error(ErrorCode::NoSuchObject,
                "no object '" + action.target + "' on " + app_ + "/" + screen_);
  if (!obj->visible)
    throw Error(ErrorCode::NotClickable, "object '" + obj->id + "' is not visible");
  switch (action.kind) {
    case ActionKind::Click: {
      if (!obj->clickable) throw Error(ErrorCode::NotClickable, "object '" + obj->id + "' is not clickable");
      if (app_ == kHomeApp) {
        std::string name = obj->id.substr(kLaunchPrefix.size());
        return moveTo(name, findApp(name)->initialScreen);
      }
      const ScreenTemplate* st = findApp(app_)->screen(screen_);
      for (const auto& t : st->transitions)
        if (t.object == obj->id && t.action == ActionKind::Click) return moveTo(app_, t.to);
      return {app_, screen_, false, std::nullopt};
    }
    case ActionKind::LongClickSelect: {
      if (!obj->longClickable && obj->kind != GuiKind::TextView)
        throw Error(ErrorCode::NotClickable, "object '" + obj->id + "' cannot be long-pressed");
      GuiObject selected = *obj;
      if (app_ != kHomeApp) {
        const ScreenTemplate* st = findApp(app_)->screen(screen_);
        for (const auto& t : st->transitions)
          if (t.object == obj->id && t.action == ActionKind::LongClickSelect) {
            auto r = moveTo(app_, t.to);
            r.selected = selected;
            return r;
          }
      }
      return {app_, screen_, false, selected};
    }
    case ActionKind::SetText: {
      if (obj->kind != GuiKind::Input)
        throw Error(ErrorCode::NotClickable, "object '" + obj->id + "' does not take text");
      inputs_[obj->id] = action.text;
      return {app_, screen_, false, std::nullopt};
    }
    default:
      break;
  }
  return {app_, screen_, false, std::nullopt};
}

bool operator==(const World& a, const World& b) {
  bool sameApps = a.apps_ == b.apps_ || (a.apps_ && b.apps_ && *a.apps_ == *b.apps_);
  return sameApps && a.env_ == b.env_ && a.app_ == b.app_ && a.screen_ == b.screen_ &&
         a.inputs_ == b.inputs_ && a.recording_ == b.recording_ &&
         a.geometry_.width == b.geometry_.width && a.geometry_.height == b.geometry_.height &&
         a.geometry_.nearLabelRadius == b.geometry_.nearLabelRadius;
}

}  // namespace nlteach::screen
