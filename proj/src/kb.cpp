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

#include "nlteach/kb.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "nlteach/error.hpp"
#include "nlteach/text.hpp"

namespace nlteach::kb {
namespace {

using json = nlohmann::json;

constexpr int kFormatVersion = 1;

[[noreturn]] void invalid(const std::string& why) { throw Error(ErrorCode::InvalidEntry, why); }

void mergeTriggers(std::vector<std::string>& into, const std::vector<std::string>& more) {
  for (const auto& t : more) {
    if (text::normalizePhrase(t).empty()) continue;
    bool dup = std::any_of(into.begin(), into.end(), [&](const std::string& x) {
      return text::normalizePhrase(x) == text::normalizePhrase(t);
    });
    if (!dup) into.push_back(t);
  }
}

template <typename V>
void checkContexts(const std::string& name, const std::vector<V>& variants) {
  if (variants.empty()) invalid("'" + name + "' has no variants");
  for (std::size_t i = 0; i < variants.size(); ++i)
    for (std::size_t j = i + 1; j < variants.size(); ++j)
      if (sameContext(variants[i].context, variants[j].context))
        invalid("'" + name + "' has two variants for context '" + variants[i].context + "'");
}

template <typename V>
void mergeVariants(std::vector<V>& into, std::vector<V> incoming, long& revision) {
  for (auto& v : incoming) {
    v.storedAt = ++revision;
    auto it = std::find_if(into.begin(), into.end(),
                           [&](const V& x) { return sameContext(x.context, v.context); });
    if (it != into.end()) *it = std::move(v);
    else into.push_back(std::move(v));
  }
}

template <typename V>
Resolution<V> resolveIn(const std::vector<V>& variants, std::string_view context) {
  for (const auto& v : variants)
    if (sameContext(v.context, context)) return {v, false};
  auto latest = std::max_element(variants.begin(), variants.end(),
                                 [](const V& a, const V& b) { return a.storedAt < b.storedAt; });
  return {*latest, true};
}

void validateBoolExpr(const std::string& name, const dsl::Expr& e) {
  if (!e) invalid("'" + name + "' has an empty expression");
  if (!dsl::typecheck(e).ok() || dsl::typeOf(e) != dsl::Type::Bool)
    invalid("'" + name + "' needs a well-typed Boolean expression");
  if (!dsl::listHoles(e).empty()) invalid("'" + name + "' still has unresolved parts");
}

// Serialization helpers.

json stepsToJson(const std::vector<demo::RecordedStep>& steps) {
  json a = json::array();
  for (const auto& s : steps)
    a.push_back({{"action", s.action.render()}, {"app", s.appName}, {"screen", s.screenId}, {"text", s.objectText}});
  return a;
}

json queryToJson(const demo::ValueQuery& q) {
  json j = {{"name", q.name},
            {"navigation", screen::renderActionList(q.navigationActions)},
            {"selector", q.selector.render()}};
  j["dimension"] = q.expectedDimension ? json(std::string(dimensionName(*q.expectedDimension))) : json();
  return j;
}

class Reader {
 public:
  Reader(std::string section, std::size_t index) : where_(section + "[" + std::to_string(index) + "]") {}

  [[noreturn]] void fail(const std::string& why) const {
    throw Error(ErrorCode::CorruptStore, "record " + where_ + ": " + why);
  }
  void keys(const json& j, std::initializer_list<std::string_view> allowed) const {
    if (!j.is_object()) fail("expected an object");
    for (const auto& [k, _] : j.items())
      if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) fail("unknown field '" + k + "'");
    for (auto k : allowed)
      if (!j.contains(std::string(k))) fail("missing field '" + std::string(k) + "'");
  }
  std::string str(const json& j, const char* key) const {
    if (!j.at(key).is_string()) fail(std::string(key) + " must be a string");
    return j.at(key).get<std::string>();
  }
  long integer(const json& j, const char* key) const {
    if (!j.at(key).is_number_integer()) fail(std::string(key) + " must be an integer");
    return j.at(key).get<long>();
  }
  std::vector<std::string> strings(const json& j, const char* key) const {
    if (!j.at(key).is_array()) fail(std::string(key) + " must be an array");
    std::vector<std::string> out;
    for (const auto& x : j.at(key)) {
      if (!x.is_string()) fail(std::string(key) + " must hold strings");
      out.push_back(x.get<std::string>());
    }
    return out;
  }
  const json& array(const json& j, const char* key) const {
    if (!j.at(key).is_array()) fail(std::string(key) + " must be an array");
    return j.at(key);
  }
  template <typename F>
  auto guard(F&& f) const -> decltype(f()) {
    try {
      return f();
    } catch (const Error& e) {
      if (e.code() == ErrorCode::CorruptStore) throw;
      fail(e.what());
    }
  }

 private:
  std::string where_;
};

demo::ValueQuery queryFromJson(const Reader& r, const json& j) {
  r.keys(j, {"name", "navigation", "selector", "dimension"});
  demo::ValueQuery q;
  q.name = r.str(j, "name");
  q.navigationActions = r.guard([&] { return screen::parseActionList(r.str(j, "navigation")); });
  q.selector = r.guard([&] { return screen::GraphQuery::parse(r.str(j, "selector")); });
  if (!j["dimension"].is_null()) {
    auto d = parseDimension(r.str(j, "dimension"));
    if (!d) r.fail("unknown dimension");
    q.expectedDimension = d;
  }
  return q;
}

TypedValue constantFromText(const Reader& r, const std::string& s) {
  dsl::Expr e = r.guard([&] { return dsl::parse(s); });
  auto* c = std::get_if<dsl::ValueConstant>(&e->v);
  if (!c) r.fail("constant expected, found '" + s + "'");
  return c->value;
}

}  // namespace

bool operator==(const BooleanVariant& a, const BooleanVariant& b) {
  return a.context == b.context && a.storedAt == b.storedAt && dsl::same(a.expr, b.expr);
}

bool operator==(const RuleEntry& a, const RuleEntry& b) {
  return a.name == b.name && a.utterance == b.utterance && a.context == b.context &&
         dsl::same(a.script, b.script);
}

Dimension ValueVariant::dimension() const {
  if (auto* q = std::get_if<demo::ValueQuery>(&source))
    return q->expectedDimension.value_or(Dimension::Number);
  return std::get<TypedValue>(source).dimension;
}

std::optional<Dimension> ValueConceptEntry::dimension() const {
  if (variants.empty()) return std::nullopt;
  return variants.front().dimension();
}

std::string_view entryKindName(EntryKind k) {
  switch (k) {
    case EntryKind::Procedure: return "procedure";
    case EntryKind::BooleanConcept: return "bool";
    case EntryKind::ValueConcept: return "value";
    case EntryKind::Rule: return "rule";
  }
  return "?";
}

bool sameContext(std::string_view a, std::string_view b) {
  return text::normalizePhrase(a) == text::normalizePhrase(b);
}

void KnowledgeBase::store(Entry entry) {
  if (auto* p = std::get_if<ProcedureEntry>(&entry)) {
    if (p->name.empty()) invalid("procedure without a name");
    if (p->triggerUtterances.empty()) invalid("procedure '" + p->name + "' has no trigger utterance");
    if (p->script.steps.empty()) invalid("procedure '" + p->name + "' has no actions");
    p->script.name = p->name;
    p->script.triggerUtterances = p->triggerUtterances;
    ++revision_;
    procedures_[p->name] = std::move(*p);
  } else if (auto* b = std::get_if<BooleanConceptEntry>(&entry)) {
    if (b->name.empty()) invalid("Boolean concept without a name");
    checkContexts(b->name, b->variants);
    for (const auto& v : b->variants) validateBoolExpr(b->name, v.expr);
    auto& slot = booleanConcepts_[b->name];
    slot.name = b->name;
    mergeTriggers(slot.triggerUtterances, b->triggerUtterances);
    mergeVariants(slot.variants, std::move(b->variants), revision_);
  } else if (auto* v = std::get_if<ValueConceptEntry>(&entry)) {
    if (v->name.empty()) invalid("value concept without a name");
    checkContexts(v->name, v->variants);
    for (const auto& var : v->variants) {
      if (auto* q = std::get_if<demo::ValueQuery>(&var.source)) {
        if (!q->expectedDimension) invalid("value query for '" + v->name + "' has no dimension");
        if (q->selector.predicates.empty()) invalid("value query for '" + v->name + "' has no selector");
      }
      if (var.dimension() != v->variants.front().dimension())
        throw Error(ErrorCode::DimensionConflict, "'" + v->name + "' mixes dimensions");
    }
    if (auto it = valueConcepts_.find(v->name); it != valueConcepts_.end()) {
      auto have = it->second.dimension();
      if (have && *have != v->variants.front().dimension())
        throw Error(ErrorCode::DimensionConflict,
                    "'" + v->name + "' holds " + std::string(dimensionName(*have)) + ", not " +
                        std::string(dimensionName(v->variants.front().dimension())));
    }
    auto& slot = valueConcepts_[v->name];
    slot.name = v->name;
    mergeTriggers(slot.triggerUtterances, v->triggerUtterances);
    mergeVariants(slot.variants, std::move(v->variants), revision_);
  } else if (auto* r = std::get_if<RuleEntry>(&entry)) {
    if (r->name.empty()) invalid("rule without a name");
    if (!r->script || !dsl::typecheck(r->script).ok() || !dsl::isExecutable(r->script))
      invalid("rule '" + r->name + "' is not executable");
    ++revision_;
    rules_[r->name] = std::move(*r);
  }
}

const ProcedureEntry* KnowledgeBase::procedure(std::string_view name) const {
  auto it = procedures_.find(name);
  return it == procedures_.end() ? nullptr : &it->second;
}
const BooleanConceptEntry* KnowledgeBase::booleanConcept(std::string_view name) const {
  auto it = booleanConcepts_.find(name);
  return it == booleanConcepts_.end() ? nullptr : &it->second;
}
const ValueConceptEntry* KnowledgeBase::valueConcept(std::string_view name) const {
  auto it = valueConcepts_.find(name);
  return it == valueConcepts_.end() ? nullptr : &it->second;
}
const RuleEntry* KnowledgeBase::rule(std::string_view name) const {
  auto it = rules_.find(name);
  return it == rules_.end() ? nullptr : &it->second;
}

std::size_t KnowledgeBase::size() const {
  return procedures_.size() + booleanConcepts_.size() + valueConcepts_.size() + rules_.size();
}

std::vector<EntryRef> KnowledgeBase::lookupByUtterance(std::string_view phrase) const {
  auto hay = text::normalizedTokens(phrase);
  std::vector<EntryRef> out;
  auto consider = [&](EntryKind kind, const std::string& name, std::vector<std::string> triggers) {
    triggers.push_back(name);
    std::size_t best = 0;
    for (const auto& t : triggers) {
      auto needle = text::normalizedTokens(t);
      if (!needle.empty() && needle.size() > best && text::findRun(hay, needle)) best = needle.size();
    }
    if (best) out.push_back({kind, name, best});
  };
  for (const auto& [n, e] : procedures_) consider(EntryKind::Procedure, n, e.triggerUtterances);
  for (const auto& [n, e] : booleanConcepts_) consider(EntryKind::BooleanConcept, n, e.triggerUtterances);
  for (const auto& [n, e] : valueConcepts_) consider(EntryKind::ValueConcept, n, e.triggerUtterances);
  for (const auto& [n, e] : rules_) consider(EntryKind::Rule, n, {e.utterance});
  std::stable_sort(out.begin(), out.end(), [](const EntryRef& a, const EntryRef& b) {
    if (a.matchedTokens != b.matchedTokens) return a.matchedTokens > b.matchedTokens;
    if (a.kind != b.kind) return a.kind < b.kind;
    return a.name < b.name;
  });
  return out;
}

Resolution<BooleanVariant> KnowledgeBase::resolveBoolean(std::string_view name,
                                                         std::string_view context) const {
  const auto* e = booleanConcept(name);
  if (!e) throw Error(ErrorCode::UnknownName, "no Boolean concept named '" + std::string(name) + "'");
  return resolveIn(e->variants, context);
}

Resolution<ValueVariant> KnowledgeBase::resolveValue(std::string_view name, std::string_view context) const {
  const auto* e = valueConcept(name);
  if (!e) throw Error(ErrorCode::UnknownName, "no value concept named '" + std::string(name) + "'");
  return resolveIn(e->variants, context);
}

std::string serialize(const KnowledgeBase& kb) {
  json root;
  root["version"] = kFormatVersion;
  root["revision"] = kb.revision();
  json procs = json::array();
  for (const auto& [_, p] : kb.procedures()) {
    json params = json::array();
    for (const auto& par : p.script.parameters)
      params.push_back({{"name", par.name},
                        {"recordedValue", par.recordedValue},
                        {"alternatives", par.alternatives},
                        {"step", par.step}});
    procs.push_back({{"name", p.name},
                     {"triggers", p.triggerUtterances},
                     {"steps", stepsToJson(p.script.steps)},
                     {"parameters", params}});
  }
  root["procedures"] = procs;
  json bools = json::array();
  for (const auto& [_, b] : kb.booleanConcepts()) {
    json vars = json::array();
    for (const auto& v : b.variants)
      vars.push_back({{"context", v.context}, {"expr", dsl::render(v.expr)}, {"storedAt", v.storedAt}});
    bools.push_back({{"name", b.name}, {"triggers", b.triggerUtterances}, {"variants", vars}});
  }
  root["booleanConcepts"] = bools;
  json values = json::array();
  for (const auto& [_, e] : kb.valueConcepts()) {
    json vars = json::array();
    for (const auto& v : e.variants) {
      json jv = {{"context", v.context}, {"storedAt", v.storedAt}};
      if (auto* q = std::get_if<demo::ValueQuery>(&v.source)) jv["query"] = queryToJson(*q);
      else jv["constant"] = dsl::render(dsl::constant(std::get<TypedValue>(v.source)));
      vars.push_back(jv);
    }
    values.push_back({{"name", e.name}, {"triggers", e.triggerUtterances}, {"variants", vars}});
  }
  root["valueConcepts"] = values;
  json rules = json::array();
  for (const auto& [_, r] : kb.rules())
    rules.push_back({{"name", r.name},
                     {"utterance", r.utterance},
                     {"context", r.context},
                     {"script", dsl::render(r.script)}});
  root["rules"] = rules;
  return root.dump(2) + "\n";
}

KnowledgeBase deserialize(std::string_view content) {
  json root;
  try {
    root = json::parse(content);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::CorruptStore, std::string("unreadable knowledge base: ") + e.what());
  }
  Reader top("document", 0);
  top.keys(root, {"version", "revision", "procedures", "booleanConcepts", "valueConcepts", "rules"});
  if (top.integer(root, "version") != kFormatVersion)
    throw Error(ErrorCode::CorruptStore,
                "unsupported knowledge base version " + root["version"].dump());
  KnowledgeBase kb;
  const json& procs = top.array(root, "procedures");
  for (std::size_t i = 0; i < procs.size(); ++i) {
    Reader r("procedures", i);
    const json& j = procs[i];
    r.keys(j, {"name", "triggers", "steps", "parameters"});
    ProcedureEntry p;
    p.name = r.str(j, "name");
    p.triggerUtterances = r.strings(j, "triggers");
    for (const auto& s : r.array(j, "steps")) {
      r.keys(s, {"action", "app", "screen", "text"});
      demo::RecordedStep st;
      st.action = r.guard([&] { return screen::Action::parse(r.str(s, "action")); });
      st.appName = r.str(s, "app");
      st.screenId = r.str(s, "screen");
      st.objectText = r.str(s, "text");
      p.script.steps.push_back(std::move(st));
    }
    for (const auto& s : r.array(j, "parameters")) {
      r.keys(s, {"name", "recordedValue", "alternatives", "step"});
      demo::ScriptParameter par;
      par.name = r.str(s, "name");
      par.recordedValue = r.str(s, "recordedValue");
      par.alternatives = r.strings(s, "alternatives");
      long step = r.integer(s, "step");
      if (step < 0 || static_cast<std::size_t>(step) >= p.script.steps.size()) r.fail("parameter step out of range");
      par.step = static_cast<std::size_t>(step);
      p.script.parameters.push_back(std::move(par));
    }
    r.guard([&] { kb.store(p); return 0; });
  }
  const json& bools = top.array(root, "booleanConcepts");
  for (std::size_t i = 0; i < bools.size(); ++i) {
    Reader r("booleanConcepts", i);
    const json& j = bools[i];
    r.keys(j, {"name", "triggers", "variants"});
    BooleanConceptEntry b;
    b.name = r.str(j, "name");
    b.triggerUtterances = r.strings(j, "triggers");
    for (const auto& v : r.array(j, "variants")) {
      r.keys(v, {"context", "expr", "storedAt"});
      b.variants.push_back({r.str(v, "context"), r.guard([&] { return dsl::parse(r.str(v, "expr")); }),
                            r.integer(v, "storedAt")});
    }
    auto stamps = b.variants;
    r.guard([&] { kb.store(b); return 0; });
    auto& stored = kb.booleanConcepts_[b.name].variants;
    for (std::size_t k = 0; k < stored.size(); ++k) stored[k].storedAt = stamps[k].storedAt;
  }
  const json& values = top.array(root, "valueConcepts");
  for (std::size_t i = 0; i < values.size(); ++i) {
    Reader r("valueConcepts", i);
    const json& j = values[i];
    r.keys(j, {"name", "triggers", "variants"});
    ValueConceptEntry e;
    e.name = r.str(j, "name");
    e.triggerUtterances = r.strings(j, "triggers");
    for (const auto& v : r.array(j, "variants")) {
      ValueVariant var;
      if (v.is_object() && v.contains("query")) {
        r.keys(v, {"context", "query", "storedAt"});
        var.source = queryFromJson(r, v["query"]);
      } else {
        r.keys(v, {"context", "constant", "storedAt"});
        var.source = constantFromText(r, r.str(v, "constant"));
      }
      var.context = r.str(v, "context");
      var.storedAt = r.integer(v, "storedAt");
      e.variants.push_back(std::move(var));
    }
    auto stamps = e.variants;
    r.guard([&] { kb.store(e); return 0; });
    auto& stored = kb.valueConcepts_[e.name].variants;
    for (std::size_t k = 0; k < stored.size(); ++k) stored[k].storedAt = stamps[k].storedAt;
  }
  const json& rules = top.array(root, "rules");
  for (std::size_t i = 0; i < rules.size(); ++i) {
    Reader r("rules", i);
    const json& j = rules[i];
    r.keys(j, {"name", "utterance", "context", "script"});
    RuleEntry rule{r.str(j, "name"), r.str(j, "utterance"), r.str(j, "context"),
                   r.guard([&] { return dsl::parse(r.str(j, "script")); })};
    r.guard([&] { kb.store(rule); return 0; });
  }
  kb.revision_ = top.integer(root, "revision");
  return kb;
}

void persist(const KnowledgeBase& kb, const std::string& path) {
  std::string bytes = serialize(kb);
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write '" + tmp + "'");
    out << bytes;
    if (!out) throw Error(ErrorCode::Io, "write to '" + tmp + "' failed");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw Error(ErrorCode::Io, "cannot replace '" + path + "'");
}

KnowledgeBase load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read knowledge base '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return deserialize(ss.str());
}

dsl::Expr KnowledgeRuntime::booleanConcept(const std::string& name, const std::string& context) {
  if (!kb_.booleanConcept(name)) throw Error(ErrorCode::UnknownConcept, "no Boolean concept '" + name + "'");
  return kb_.resolveBoolean(name, context).variant.expr;
}

TypedValue KnowledgeRuntime::readValue(const std::string& name, const std::string& context) {
  if (!kb_.valueConcept(name)) throw Error(ErrorCode::UnknownConcept, "no value concept '" + name + "'");
  auto r = kb_.resolveValue(name, context);
  if (auto* q = std::get_if<demo::ValueQuery>(&r.variant.source)) return demo::replayValueQuery(*q, world_);
  return normalize(std::get<TypedValue>(r.variant.source));
}

std::vector<std::string> KnowledgeRuntime::runProcedure(const dsl::ProcedureCall& call) {
  const ProcedureEntry* p = kb_.procedure(call.procedure);
  if (!p) throw Error(ErrorCode::UnknownProcedure, "no procedure '" + call.procedure + "'");
  auto trace = demo::replayProcedure(p->script, call.bindings, world_);
  world_.goHome();
  return trace.actions();
}

}  // namespace nlteach::kb
