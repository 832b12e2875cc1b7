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

#include "nlteach/gateway.hpp"

#include <deque>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "nlteach/error.hpp"
#include "nlteach/text.hpp"

namespace nlteach::gateway {

using nlohmann::json;
namespace fs = std::filesystem;

json Message::toJson() const {
  return json{{"seq", seq}, {"sessionId", sessionId}, {"kind", kind}, {"payload", payload}};
}

Message Message::fromJson(const json& j) {
  Message m;
  if (!j.is_object()) throw Error(ErrorCode::InvalidValue, "message must be a JSON object");
  if (j.contains("seq") && j["seq"].is_number_unsigned()) m.seq = j["seq"].get<std::uint64_t>();
  if (j.contains("sessionId") && j["sessionId"].is_string()) m.sessionId = j["sessionId"].get<std::string>();
  if (!j.contains("kind") || !j["kind"].is_string()) throw Error(ErrorCode::InvalidValue, "message without kind");
  m.kind = j["kind"].get<std::string>();
  m.payload = j.value("payload", json::object());
  return m;
}

std::pair<std::string, std::string> parseEnvAssignment(std::string_view kv) {
  auto eq = kv.find('=');
  if (eq == std::string_view::npos || eq == 0)
    throw Error(ErrorCode::InvalidValue, "expected key=value, got '" + std::string(kv) + "'");
  return {text::trim(kv.substr(0, eq)), text::trim(kv.substr(eq + 1))};
}

std::string defaultAppDir() { return std::string(NLTEACH_DATA_DIR) + "/apps"; }

json screenPayload(const screen::UiSnapshotGraph& g) {
  json objects = json::array();
  for (const auto& n : g.nodes) {
    json o{{"id", n.id},
           {"kind", screen::kindName(n.kind)},
           {"text", n.text},
           {"bounds", {n.bounds.left, n.bounds.top, n.bounds.right, n.bounds.bottom}},
           {"clickable", n.clickable},
           {"longClickable", n.longClickable},
           {"parent", n.parent}};
    if (auto it = g.entities.find(n.id); it != g.entities.end()) {
      json ents = json::array();
      for (const auto& e : it->second)
        ents.push_back({{"dimension", dimensionName(e.value.dimension)}, {"value", display(e.value)}});
      o["entities"] = ents;
    }
    objects.push_back(std::move(o));
  }
  return {{"app", g.appName}, {"screen", g.screenId}, {"objects", objects}};
}

json tracePayload(const std::string& name, const dsl::ExecutionTrace& t) {
  json events = json::array();
  for (const auto& e : t.events) {
    static constexpr const char* kinds[] = {"valueRead", "concept", "comparison", "branch", "call", "action"};
    events.push_back({{"kind", kinds[static_cast<int>(e.kind)]}, {"text", e.text}});
  }
  return {{"name", name},
          {"branch", t.branch ? std::string(dsl::branchName(*t.branch)) : std::string("none")},
          {"actions", t.actions()},
          {"events", events}};
}

namespace {

json errorPayload(const Error& e) { return {{"code", to_string(e.code())}, {"message", e.what()}}; }

bool isConfirmation(const std::string& templateId) { return templateId.rfind("confirm_", 0) == 0; }

Env envFromJson(const json& j) {
  Env env;
  if (j.is_null()) return env;
  if (!j.is_object()) throw Error(ErrorCode::InvalidValue, "env must be an object");
  for (const auto& [k, v] : j.items()) env[k] = v.is_string() ? v.get<std::string>() : v.dump();
  return env;
}

std::string payloadString(const json& p, const char* key) {
  if (!p.contains(key) || !p[key].is_string())
    throw Error(ErrorCode::InvalidValue, std::string("payload needs string field '") + key + "'");
  return p[key].get<std::string>();
}

}  // namespace

std::string SessionManager::createSession(const std::string& kbPath, const std::string& appDir, const Env& env,
                                          std::vector<Message>* greeting) {
  kb::KnowledgeBase knowledge;
  if (!kbPath.empty()) {
    if (!fs::exists(kbPath)) throw Error(ErrorCode::BadFixture, "no knowledge base at " + kbPath);
    knowledge = kb::load(kbPath);
  }
  auto apps = screen::loadAppDir(appDir.empty() ? defaultAppDir() : appDir);
  auto live = std::make_shared<Live>(std::move(knowledge), screen::World(std::move(apps), env));
  std::string id;
  {
    std::lock_guard lock(mutex_);
    id = "s" + std::to_string(nextId_++);
    sessions_[id] = live;
  }
  if (greeting) {
    std::lock_guard lock(live->mutex);
    dialog::TurnResult r;
    r.moves.push_back(live->session.greeting());
    r.effects.screenChanged = true;
    *greeting = render(*live, id, r);
  }
  return id;
}

std::shared_ptr<SessionManager::Live> SessionManager::find(const std::string& sessionId) {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(sessionId);
  if (it == sessions_.end()) throw Error(ErrorCode::UnknownSession, "no session '" + sessionId + "'");
  return it->second;
}

Message SessionManager::make(Live& s, const std::string& id, std::string kind, json payload) {
  return Message{++s.seq, id, std::move(kind), std::move(payload)};
}

std::vector<Message> SessionManager::render(Live& s, const std::string& id, const dialog::TurnResult& r) {
  std::vector<Message> out;
  for (const auto& m : r.moves) {
    out.push_back(make(s, id, "agentText", {{"templateId", m.templateId}, {"text", m.text}, {"options", m.options}}));
    if (isConfirmation(m.templateId))
      out.push_back(make(s, id, "confirmation", {{"templateId", m.templateId}, {"text", m.text}}));
    else if (!m.options.empty())
      out.push_back(make(s, id, "optionPrompt", {{"templateId", m.templateId}, {"options", m.options}}));
  }
  if (r.effects.demonstrationMode) {
    s.preview = s.session.world();
    s.preview.goHome();
    s.pendingDemo.clear();
    out.push_back(make(s, id, "demonstrationMode", {{"on", true}}));
  } else if (s.session.state().phase != dialog::Phase::AwaitingDemonstration && !s.pendingDemo.empty()) {
    s.pendingDemo.clear();
  }
  if (r.effects.demonstrationMode || r.effects.screenChanged) {
    const auto& w = r.effects.demonstrationMode ? s.preview : s.session.world();
    out.push_back(make(s, id, "screenUpdate", screenPayload(w.snapshot())));
  }
  if (r.effects.highlight)
    out.push_back(make(s, id, "highlight",
                       {{"objectIds", r.effects.highlight->objectIds}, {"untyped", r.effects.highlight->untyped}}));
  return out;
}

std::vector<Message> SessionManager::sendTurn(const std::string& sessionId, const dialog::Input& input) {
  auto s = find(sessionId);
  std::lock_guard lock(s->mutex);
  std::vector<Message> out;
  if (auto* t = std::get_if<dialog::input::Text>(&input))
    out.push_back(make(*s, sessionId, "userText", {{"text", t->text}}));
  else if (auto* d = std::get_if<dialog::input::Demonstration>(&input))
    out.push_back(make(*s, sessionId, "userText", {{"demonstration", screen::renderActionList(d->actions)}}));
  else if (auto* o = std::get_if<dialog::input::Option>(&input))
    out.push_back(make(*s, sessionId, "userText", {{"option", o->index}}));
  else
    out.push_back(make(*s, sessionId, "userText", {{"undo", true}}));
  try {
    auto r = s->session.handle(input);
    for (auto& m : render(*s, sessionId, r)) out.push_back(std::move(m));
  } catch (const Error& e) {
    out.push_back(make(*s, sessionId, "error", errorPayload(e)));
  }
  return out;
}

std::vector<Message> SessionManager::demoAction(const std::string& sessionId, const screen::Action& action) {
  auto s = find(sessionId);
  std::lock_guard lock(s->mutex);
  std::vector<Message> out;
  if (s->session.state().phase != dialog::Phase::AwaitingDemonstration) {
    out.push_back(make(*s, sessionId, "error",
                       errorPayload(Error(ErrorCode::IllegalInputForPhase, "no demonstration is in progress"))));
    return out;
  }
  try {
    auto res = s->preview.perform(action);
    s->pendingDemo.push_back(action);
    auto snap = s->preview.snapshot();
    out.push_back(make(*s, sessionId, "screenUpdate", screenPayload(snap)));
    if (!s->session.state().frameStack.empty() &&
        s->session.state().frameStack.back().type == dialog::FrameType::Value) {
      auto h = demo::highlightCandidates(snap, s->session.state().frameStack.back().expectedDimension);
      out.push_back(make(*s, sessionId, "highlight", {{"objectIds", h.objectIds}, {"untyped", h.untyped}}));
    }
    if (res.selected)
      out.push_back(make(*s, sessionId, "highlight", {{"objectIds", {res.selected->id}}, {"selected", true}}));
  } catch (const Error& e) {
    out.push_back(make(*s, sessionId, "error", errorPayload(e)));
  }
  return out;
}

std::vector<Message> SessionManager::demoDone(const std::string& sessionId) {
  std::vector<screen::Action> actions;
  {
    auto s = find(sessionId);
    std::lock_guard lock(s->mutex);
    actions = std::move(s->pendingDemo);
    s->pendingDemo.clear();
  }
  return sendTurn(sessionId, dialog::input::Demonstration{std::move(actions)});
}

dsl::ExecutionTrace SessionManager::runScript(const std::string& sessionId, const std::string& scriptName,
                                              const Env& env) {
  auto s = find(sessionId);
  std::lock_guard lock(s->mutex);
  const auto& knowledge = s->session.knowledge();
  const auto* rule = knowledge.rule(scriptName);
  if (!rule) throw Error(ErrorCode::UnknownScript, "no script named '" + scriptName + "'");
  screen::World world = s->session.world();
  for (const auto& [k, v] : env) world.setEnv(k, v);
  world.goHome();
  kb::KnowledgeRuntime runtime(knowledge, world);
  return dsl::evaluate(rule->script, {&runtime, rule->context});
}

std::vector<Message> SessionManager::handleRequest(const json& request) {
  Message req = Message::fromJson(request);
  const auto& p = req.payload;
  if (req.kind == "create") {
    std::vector<Message> out;
    createSession(p.value("kb", std::string()), p.value("apps", std::string()), envFromJson(p.value("env", json())),
                  &out);
    return out;
  }
  if (req.kind == "turn") return sendTurn(req.sessionId, dialog::input::Text{payloadString(p, "text")});
  if (req.kind == "demo")
    return sendTurn(req.sessionId, dialog::input::Demonstration{screen::parseActionList(payloadString(p, "actions"))});
  if (req.kind == "option") {
    if (!p.contains("index") || !p["index"].is_number_integer() || p["index"].get<long long>() < 0)
      throw Error(ErrorCode::InvalidValue, "option needs a non-negative index");
    return sendTurn(req.sessionId, dialog::input::Option{static_cast<std::size_t>(p["index"].get<long long>())});
  }
  if (req.kind == "undo") return sendTurn(req.sessionId, dialog::input::Undo{});
  if (req.kind == "demoAction") return demoAction(req.sessionId, screen::Action::parse(payloadString(p, "action")));
  if (req.kind == "demoDone") return demoDone(req.sessionId);
  if (req.kind == "run") {
    std::string name = p.value("name", std::string());
    if (name.empty()) name = withSession(req.sessionId, [](const dialog::Session& s) { return s.state().lastRule; });
    auto trace = runScript(req.sessionId, name, envFromJson(p.value("env", json())));
    auto s = find(req.sessionId);
    std::lock_guard lock(s->mutex);
    return {make(*s, req.sessionId, "scriptResult", tracePayload(name, trace))};
  }
  throw Error(ErrorCode::InvalidValue, "unknown request kind '" + req.kind + "'");
}

void serve(std::istream& in, std::ostream& out, SessionManager& manager) {
  std::string line;
  while (std::getline(in, line)) {
    if (text::trim(line).empty()) continue;
    std::vector<Message> replies;
    std::string sessionId;
    try {
      auto request = json::parse(line);
      if (request.is_object() && request.contains("sessionId") && request["sessionId"].is_string())
        sessionId = request["sessionId"].get<std::string>();
      replies = manager.handleRequest(request);
    } catch (const Error& e) {
      replies.push_back(Message{0, sessionId, "error", errorPayload(e)});
    } catch (const json::exception& e) {
      replies.push_back(Message{0, sessionId, "error", {{"code", "InvalidValue"}, {"message", e.what()}}});
    }
    for (const auto& m : replies) out << m.toJson().dump() << '\n';
    out.flush();
  }
}

// ---------------------------------------------------------------------------
// Transcript replay.

namespace {

struct Mismatch {
  std::string message;
};

// Whitespace-separated words; "double quoted" words keep their spaces.
std::vector<std::string> words(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  bool inQuote = false, any = false;
  for (char c : s) {
    if (c == '"') {
      inQuote = !inQuote;
      any = true;
      continue;
    }
    if (!inQuote && (c == ' ' || c == '\t')) {
      if (any) out.push_back(cur);
      cur.clear();
      any = false;
      continue;
    }
    cur += c;
    any = true;
  }
  if (inQuote) throw Error(ErrorCode::MalformedTranscript, "unterminated quote");
  if (any) out.push_back(cur);
  return out;
}

std::string resolvePath(const std::string& p, const std::string& baseDir) {
  if (p.empty() || fs::path(p).is_absolute() || baseDir.empty()) return p;
  auto candidate = fs::path(baseDir) / p;
  if (fs::exists(candidate)) return candidate.string();
  auto fromData = fs::path(NLTEACH_DATA_DIR) / p;
  if (fs::exists(fromData)) return fromData.string();
  return candidate.string();
}

class Replayer {
 public:
  explicit Replayer(TranscriptOptions o) : opts_(std::move(o)) {}

  void line(std::size_t no, const std::string& raw, TranscriptReport& rep) {
    std::string l = text::trim(raw);
    if (l.empty() || l[0] == '#') return;
    auto colon = l.find(':');
    std::string tag = colon == std::string::npos ? l : l.substr(0, colon);
    std::string rest = colon == std::string::npos ? "" : text::trim(std::string_view(l).substr(colon + 1));
    (void)no;

    if (tag == "KB" || tag == "APPS") {
      if (id_) throw Error(ErrorCode::MalformedTranscript, tag + ": must come before the first turn");
      (tag == "KB" ? opts_.kbPath : opts_.appDir) = resolvePath(rest, opts_.baseDir);
      return;
    }
    if (tag == "ENV") {
      auto [k, v] = parseEnvAssignment(rest);
      if (id_)
        runEnv_[k] = v;
      else
        opts_.env[k] = v;
      return;
    }
    if (tag == "A") {
      auto sp = rest.find(' ');
      std::string id = rest.substr(0, sp);
      std::string sub = sp == std::string::npos ? "" : text::trim(std::string_view(rest).substr(sp + 1));
      if (id.empty()) throw Error(ErrorCode::MalformedTranscript, "A: needs a template id");
      ensure(rep);
      if (moves_.empty()) throw Mismatch{"expected agent move '" + id + "' but the agent said nothing more"};
      auto got = moves_.front();
      moves_.pop_front();
      if (got.first != id) throw Mismatch{"expected agent move '" + id + "', got '" + got.first + "': " + got.second};
      if (!sub.empty() && got.second.find(sub) == std::string::npos)
        throw Mismatch{"agent move '" + id + "' does not contain \"" + sub + "\": " + got.second};
      return;
    }
    if (tag == "U" || tag == "DEMO" || tag == "OPTION" || tag == "UNDO") {
      ensure(rep);
      drained();
      dialog::Input in;
      if (tag == "U") {
        in = dialog::input::Text{rest};
      } else if (tag == "DEMO") {
        in = dialog::input::Demonstration{screen::parseActionList(rest)};
      } else if (tag == "OPTION") {
        std::size_t idx = 0;
        try {
          idx = std::stoul(rest);
        } catch (const std::exception&) {
          throw Error(ErrorCode::MalformedTranscript, "OPTION: needs an index");
        }
        in = dialog::input::Option{idx};
      } else {
        in = dialog::input::Undo{};
      }
      for (const auto& m : manager_.sendTurn(*id_, in)) collect(m, rep);
      rep.log.push_back(tag + ": " + rest);
      return;
    }
    if (tag == "RUN") {
      ensure(rep);
      drained();
      std::string name = rest;
      if (name.empty())
        name = manager_.withSession(*id_, [](const dialog::Session& s) { return s.state().lastRule; });
      trace_.reset();
      runError_.clear();
      try {
        trace_ = manager_.runScript(*id_, name, runEnv_);
        rep.log.push_back("RUN " + name + ": " + trace_->render());
      } catch (const Error& e) {
        runError_ = e.what();
        rep.log.push_back("RUN " + name + " failed: " + runError_);
      }
      ran_ = true;
      return;
    }
    if (tag == "ASSERT-BRANCH") {
      if (!ran_) throw Error(ErrorCode::MalformedTranscript, "ASSERT-BRANCH: without a preceding RUN:");
      if (!trace_) throw Mismatch{"script failed: " + runError_};
      std::string got = trace_->branch ? std::string(dsl::branchName(*trace_->branch)) : "none";
      if (text::toLower(got) != text::toLower(rest)) throw Mismatch{"expected branch " + rest + ", got " + got};
      return;
    }
    if (tag == "ASSERT-TRACE") {
      if (!ran_) throw Error(ErrorCode::MalformedTranscript, "ASSERT-TRACE: without a preceding RUN:");
      bool negate = !rest.empty() && rest[0] == '!';
      std::string needle = negate ? text::trim(std::string_view(rest).substr(1)) : rest;
      std::string hay = trace_ ? trace_->render() : "error: " + runError_;
      bool found = hay.find(needle) != std::string::npos;
      if (found == negate)
        throw Mismatch{std::string(negate ? "trace unexpectedly contains \"" : "trace lacks \"") + needle + "\": " +
                       hay};
      return;
    }
    if (tag == "ASSERT-PHASE") {
      ensure(rep);
      drained();
      auto want = dialog::parsePhase(rest);
      if (!want) throw Error(ErrorCode::MalformedTranscript, "unknown phase '" + rest + "'");
      auto got = manager_.withSession(*id_, [](const dialog::Session& s) { return s.state().phase; });
      if (got != *want)
        throw Mismatch{"expected phase " + rest + ", got " + std::string(dialog::phaseName(got))};
      return;
    }
    if (tag == "ASSERT-KB") {
      ensure(rep);
      drained();
      manager_.withSession(*id_, [&](const dialog::Session& s) {
        assertKb(rest, s.knowledge());
        return 0;
      });
      return;
    }
    throw Error(ErrorCode::MalformedTranscript, "unknown line tag '" + tag + "'");
  }

  void finish(TranscriptReport& rep) {
    if (!id_) return;
    drained();
    rep.finalKb = manager_.withSession(*id_, [](const dialog::Session& s) { return kb::serialize(s.knowledge()); });
  }

 private:
  void ensure(TranscriptReport& rep) {
    if (id_) return;
    std::vector<Message> greeting;
    id_ = manager_.createSession(opts_.kbPath, opts_.appDir, opts_.env, &greeting);
    for (const auto& m : greeting) collect(m, rep);
    rep.log.push_back("session " + *id_);
  }

  void collect(const Message& m, TranscriptReport& rep) {
    if (m.kind == "agentText")
      moves_.emplace_back(m.payload["templateId"].get<std::string>(), m.payload["text"].get<std::string>());
    else if (m.kind == "error")
      moves_.emplace_back("error", m.payload["message"].get<std::string>());
    else
      return;
    rep.moves.push_back(moves_.back().first);
  }

  void drained() {
    if (!moves_.empty())
      throw Mismatch{"unconsumed agent move '" + moves_.front().first + "': " + moves_.front().second};
  }

  static std::size_t toCount(const std::string& s) {
    try {
      return std::stoul(s);
    } catch (const std::exception&) {
      throw Error(ErrorCode::MalformedTranscript, "expected a count, got '" + s + "'");
    }
  }

  void assertKb(const std::string& spec, const kb::KnowledgeBase& k) {
    std::string head = spec, expr;
    if (auto e = spec.find("expr="); e != std::string::npos) {
      head = spec.substr(0, e);
      expr = text::trim(std::string_view(spec).substr(e + 5));
    }
    auto w = words(head);
    if (w.size() < 2) throw Error(ErrorCode::MalformedTranscript, "ASSERT-KB: needs a kind and a name");
    const std::string kind = w[0], name = w[1];
    bool absent = false;
    std::optional<std::size_t> variants;
    std::optional<std::string> context, query, param, trigger;
    for (std::size_t i = 2; i < w.size(); ++i) {
      const auto& opt = w[i];
      auto eq = opt.find('=');
      std::string key = opt.substr(0, eq), val = eq == std::string::npos ? "" : opt.substr(eq + 1);
      if (opt == "absent") absent = true;
      else if (key == "variants") variants = toCount(val);
      else if (key == "context") context = val;
      else if (key == "query") query = val;
      else if (key == "param") param = val;
      else if (key == "trigger") trigger = val;
      else throw Error(ErrorCode::MalformedTranscript, "unknown ASSERT-KB option '" + opt + "'");
    }
    auto hasTrigger = [&](const std::vector<std::string>& ts) {
      for (const auto& t : ts)
        if (text::normalizePhrase(t) == text::normalizePhrase(*trigger)) return true;
      return false;
    };
    const std::string what = kind + " '" + name + "'";

    if (kind == "bool") {
      const auto* e = k.booleanConcept(name);
      if (absent) {
        if (e) throw Mismatch{what + " should be absent"};
        return;
      }
      if (!e) throw Mismatch{what + " is not stored"};
      if (variants && e->variants.size() != *variants)
        throw Mismatch{what + " has " + std::to_string(e->variants.size()) + " variants, expected " +
                       std::to_string(*variants)};
      if (trigger && !hasTrigger(e->triggerUtterances)) throw Mismatch{what + " lacks trigger \"" + *trigger + "\""};
      bool ok = !context && expr.empty();
      std::string seen;
      for (const auto& v : e->variants) {
        if (context && !kb::sameContext(v.context, *context)) continue;
        seen += " [" + v.context + "] " + dsl::render(v.expr);
        if (expr.empty() || dsl::same(v.expr, dsl::parse(expr))) ok = true;
      }
      if (!ok) throw Mismatch{what + " has no matching variant; stored:" + seen};
      return;
    }
    if (kind == "value") {
      const auto* e = k.valueConcept(name);
      if (absent) {
        if (e) throw Mismatch{what + " should be absent"};
        return;
      }
      if (!e) throw Mismatch{what + " is not stored"};
      if (variants && e->variants.size() != *variants)
        throw Mismatch{what + " has " + std::to_string(e->variants.size()) + " variants, expected " +
                       std::to_string(*variants)};
      if (trigger && !hasTrigger(e->triggerUtterances)) throw Mismatch{what + " lacks trigger \"" + *trigger + "\""};
      bool ok = !context && expr.empty() && !query;
      std::string seen;
      for (const auto& v : e->variants) {
        if (context && !kb::sameContext(v.context, *context)) continue;
        const auto* q = std::get_if<demo::ValueQuery>(&v.source);
        const auto* c = std::get_if<TypedValue>(&v.source);
        seen += " [" + v.context + "] " + (q ? "query " + q->name : dsl::render(dsl::constant(*c)));
        if (query && !(q && q->name == *query)) continue;
        if (!expr.empty() && !(c && dsl::same(dsl::constant(*c), dsl::parse(expr)))) continue;
        ok = true;
      }
      if (!ok) throw Mismatch{what + " has no matching variant; stored:" + seen};
      return;
    }
    if (kind == "procedure") {
      const auto* e = k.procedure(name);
      if (absent) {
        if (e) throw Mismatch{what + " should be absent"};
        return;
      }
      if (!e) throw Mismatch{what + " is not stored"};
      if (trigger && !hasTrigger(e->triggerUtterances)) throw Mismatch{what + " lacks trigger \"" + *trigger + "\""};
      if (param) {
        bool ok = false;
        for (const auto& p : e->script.parameters) ok = ok || p.name == *param;
        if (!ok) throw Mismatch{what + " has no parameter '" + *param + "'"};
      }
      return;
    }
    if (kind == "rule") {
      const auto* e = k.rule(name);
      if (absent) {
        if (e) throw Mismatch{what + " should be absent"};
        return;
      }
      if (!e) throw Mismatch{what + " is not stored"};
      if (context && !kb::sameContext(e->context, *context))
        throw Mismatch{what + " has context \"" + e->context + "\""};
      if (!expr.empty() && !dsl::same(e->script, dsl::parse(expr)))
        throw Mismatch{what + " is " + dsl::render(e->script)};
      return;
    }
    throw Error(ErrorCode::MalformedTranscript, "unknown ASSERT-KB kind '" + kind + "'");
  }

  TranscriptOptions opts_;
  SessionManager manager_;
  std::optional<std::string> id_;
  std::deque<std::pair<std::string, std::string>> moves_;
  Env runEnv_;
  std::optional<dsl::ExecutionTrace> trace_;
  std::string runError_;
  bool ran_ = false;
};

}  // namespace

TranscriptReport replayTranscript(std::string_view content, const TranscriptOptions& options) {
  TranscriptReport rep;
  Replayer r(options);
  std::istringstream in{std::string(content)};
  std::string raw;
  std::size_t no = 0;
  try {
    while (std::getline(in, raw)) {
      ++no;
      try {
        r.line(no, raw, rep);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::MalformedTranscript)
          throw Error(ErrorCode::MalformedTranscript, "line " + std::to_string(no) + ": " + e.what());
        throw;
      }
    }
    r.finish(rep);
  } catch (const Mismatch& m) {
    rep.passed = false;
    rep.failedLine = no == 0 ? 1 : no;
    rep.message = "line " + std::to_string(rep.failedLine) + ": " + m.message;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::MalformedTranscript) throw;
    rep.passed = false;
    rep.failedLine = no;
    rep.message = "line " + std::to_string(no) + ": " + e.what();
  }
  return rep;
}

TranscriptReport replayTranscriptFile(const std::string& path, TranscriptOptions options) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::Io, "cannot read transcript " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  if (options.baseDir.empty()) options.baseDir = fs::path(path).parent_path().string();
  return replayTranscript(ss.str(), options);
}

}  // namespace nlteach::gateway
