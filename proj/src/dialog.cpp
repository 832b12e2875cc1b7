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

#include "nlteach/dialog.hpp"

#include <algorithm>
#include <set>

#include "nlteach/error.hpp"
#include "nlteach/text.hpp"

namespace nlteach::dialog {
namespace {

using dsl::Expr;
using dsl::NodePath;

const std::set<std::string, std::less<>> kYes = {"yes", "y", "yeah", "yep", "sure", "correct",
                                                  "right", "ok", "okay", "that's right", "yes please"};
const std::set<std::string, std::less<>> kNo = {"no", "n", "nope", "wrong", "incorrect", "not really"};
const std::set<std::string, std::less<>> kDecline = {"nothing", "no", "skip"};
const std::set<std::string, std::less<>> kDeterminers = {"the", "my", "a", "an", "our", "your"};

constexpr std::string_view kGreeting = "Hi! What would you like me to do?";
constexpr std::string_view kRephrase = "Sorry, I didn't get that. Could you say it another way?";

bool sameExpr(const Expr& a, const Expr& b) {
  if (!a || !b) return !a && !b;
  return dsl::same(a, b);
}

std::string lcfirst(std::string s) {
  if (!s.empty() && s[0] >= 'A' && s[0] <= 'Z' && !(s.size() > 1 && s[1] >= 'A' && s[1] <= 'Z'))
    s[0] = static_cast<char>(s[0] - 'A' + 'a');
  return s;
}

std::string stripTrailingPunct(std::string s) {
  s = text::trim(s);
  while (!s.empty() && std::string_view(".,;:!?").find(s.back()) != std::string_view::npos) s.pop_back();
  return s;
}

std::string squote(const std::string& s) { return "'" + s + "'"; }

std::string valueNamePhrase(const std::string& name) {
  auto toks = text::normalizedTokens(name);
  if (!toks.empty() && kDeterminers.count(toks.front())) return name;
  return "the " + name;
}

std::string words(Comparison op) {
  switch (op) {
    case Comparison::GT: return "greater than";
    case Comparison::LT: return "less than";
    case Comparison::EQ: return "equal to";
  }
  return "?";
}

std::string invertedWords(Comparison op) {
  switch (op) {
    case Comparison::GT: return "at most";
    case Comparison::LT: return "at least";
    case Comparison::EQ: return "not equal to";
  }
  return "?";
}

// Short name of an operand, as quoted in clarification questions.
std::string operandName(const Expr& e) {
  if (auto* v = std::get_if<dsl::ResolveValue>(&e->v)) return v->span;
  if (auto* v = std::get_if<dsl::ValueConceptRef>(&e->v)) return v->mention.empty() ? v->name : v->mention;
  if (auto* c = std::get_if<dsl::ValueConstant>(&e->v)) {
    if (c->value.dimension == Dimension::Number) return formatMagnitude(c->value.magnitude);
    return display(c->value);
  }
  return describe(e);
}

std::string actionLabel(const Expr& e) {
  if (!e) return {};
  if (auto* p = std::get_if<dsl::ProcedureCall>(&e->v))
    return stripTrailingPunct(p->mention.empty() ? p->procedure : p->mention);
  if (auto* r = std::get_if<dsl::ResolveProcedure>(&e->v)) return stripTrailingPunct(r->span);
  return {};
}

std::string contextOf(const Expr& root) {
  if (auto* c = std::get_if<dsl::Conditional>(&root->v)) return actionLabel(c->then);
  return actionLabel(root);
}

std::string launchedApp(const std::vector<screen::Action>& actions) {
  for (const auto& a : actions) {
    if (a.kind == screen::ActionKind::LaunchApp) return a.target;
    if (a.kind == screen::ActionKind::Click && a.target.rfind("launch:", 0) == 0) return a.target.substr(7);
  }
  return {};
}

std::optional<bool> yesNo(const Input& in) {
  if (auto* o = std::get_if<input::Option>(&in)) {
    if (o->index == 0) return true;
    if (o->index == 1) return false;
    return std::nullopt;
  }
  if (auto* t = std::get_if<input::Text>(&in)) {
    std::string n = text::normalizePhrase(t->text);
    if (kYes.count(n)) return true;
    if (kNo.count(n)) return false;
  }
  return std::nullopt;
}

const std::string& inputText(const Input& in) {
  static const std::string empty;
  if (auto* t = std::get_if<input::Text>(&in)) return t->text;
  return empty;
}

std::string renderInput(const Input& in) {
  if (auto* t = std::get_if<input::Text>(&in)) return t->text;
  if (auto* d = std::get_if<input::Demonstration>(&in)) return "DEMO: " + screen::renderActionList(d->actions);
  if (auto* o = std::get_if<input::Option>(&in)) return "option " + std::to_string(o->index);
  return "undo";
}

bool isUndo(const Input& in) {
  if (std::holds_alternative<input::Undo>(in)) return true;
  if (auto* t = std::get_if<input::Text>(&in)) return text::normalizePhrase(t->text) == "undo";
  return false;
}

bool validPath(const Expr& e, const NodePath& p) {
  try {
    return dsl::at(e, p) != nullptr;
  } catch (const Error&) {
    return false;
  }
}

struct Item {
  enum Kind { Hole, ReuseBool, ReuseValue } kind;
  NodePath path;
  dsl::Type type = dsl::Type::Bool;
  std::string span;  // hole span or reference mention
  std::string name;
};

class Engine {
 public:
  Engine(SessionState& s, TurnResult& out)
      : d(s.dialog), kb(s.knowledge), lex(s.lexicon), world(s.world), out(out) {}

  void handle(const Input& in) {
    if (std::holds_alternative<input::Demonstration>(in) && d.phase != Phase::AwaitingDemonstration)
      throw Error(ErrorCode::IllegalInputForPhase,
                  "a demonstration is not expected while " + std::string(phaseName(d.phase)));
    if (std::holds_alternative<input::Option>(in) && d.pendingOptions.empty())
      throw Error(ErrorCode::IllegalInputForPhase,
                  "no options are offered while " + std::string(phaseName(d.phase)));
    switch (d.phase) {
      case Phase::AwaitingCommand:
      case Phase::Done: return onCommand(inputText(in));
      case Phase::AwaitingExplanation: return onExplanation(inputText(in));
      case Phase::AwaitingDemonstration: return onDemonstration(in);
      case Phase::AwaitingElse: return onElse(inputText(in));
      case Phase::AwaitingReuseDecision: return onReuse(in);
      case Phase::AwaitingDisambiguation: return onDisambiguation(in);
      case Phase::AwaitingConfirmation: return onConfirmation(in);
    }
  }

 private:
  DialogState& d;
  kb::KnowledgeBase& kb;
  Lexicon& lex;
  screen::World& world;
  TurnResult& out;

  // --- output -------------------------------------------------------------

  void say(std::string id, std::string textOut, std::vector<std::string> options = {}) {
    out.moves.push_back({std::move(id), std::move(textOut), std::move(options)});
  }

  void ask(Phase phase, Pending pending, std::string id, std::string question,
           std::vector<std::string> options = {}) {
    d.phase = phase;
    d.pending = std::move(pending);
    d.pendingTemplate = id;
    d.pendingQuestion = question;
    d.pendingOptions = options;
    say(std::move(id), std::move(question), std::move(options));
  }

  void rephrase() {
    say("rephrase", std::string(kRephrase), d.pendingOptions);
  }

  // --- owner expression ---------------------------------------------------

  Expr owner() const { return d.frameStack.empty() ? d.root : d.frameStack.back().partial; }
  void setOwner(Expr e) {
    if (d.frameStack.empty()) d.root = std::move(e);
    else d.frameStack.back().partial = std::move(e);
  }
  Frame& top() { return d.frameStack.back(); }

  bool needsReuse(const Item& it) const {
    if (it.kind == Item::ReuseBool) {
      const auto* e = kb.booleanConcept(it.name);
      return e && kb.resolveBoolean(it.name, d.contextLabel).reuseDecisionNeeded;
    }
    const auto* e = kb.valueConcept(it.name);
    return e && kb.resolveValue(it.name, d.contextLabel).reuseDecisionNeeded;
  }

  std::optional<Item> firstItem(const Expr& e, NodePath& path) const {
    if (!e) return std::nullopt;
    if (auto* c = std::get_if<dsl::Conditional>(&e->v)) {
      for (auto [slot, child] : {std::pair{dsl::Slot::Cond, c->cond}, std::pair{dsl::Slot::Then, c->then},
                                 std::pair{dsl::Slot::Else, c->otherwise}}) {
        if (!child) continue;
        path.push_back(slot);
        if (auto r = firstItem(child, path)) return r;
        path.pop_back();
      }
      return std::nullopt;
    }
    if (auto* c = std::get_if<dsl::BoolComparison>(&e->v)) {
      for (auto [slot, child] : {std::pair{dsl::Slot::Lhs, c->lhs}, std::pair{dsl::Slot::Rhs, c->rhs}}) {
        path.push_back(slot);
        if (auto r = firstItem(child, path)) return r;
        path.pop_back();
      }
      return std::nullopt;
    }
    if (auto* h = std::get_if<dsl::ResolveBool>(&e->v)) return Item{Item::Hole, path, dsl::Type::Bool, h->span, {}};
    if (auto* h = std::get_if<dsl::ResolveValue>(&e->v)) return Item{Item::Hole, path, dsl::Type::Value, h->span, {}};
    if (auto* h = std::get_if<dsl::ResolveProcedure>(&e->v))
      return Item{Item::Hole, path, dsl::Type::Proc, h->span, {}};
    if (auto* r = std::get_if<dsl::BoolConceptRef>(&e->v)) {
      Item it{Item::ReuseBool, path, dsl::Type::Bool, r->mention.empty() ? r->name : r->mention, r->name};
      if (!definedHere(FrameType::Bool, r->name) && needsReuse(it)) return it;
    }
    if (auto* r = std::get_if<dsl::ValueConceptRef>(&e->v)) {
      Item it{Item::ReuseValue, path, dsl::Type::Value, r->mention.empty() ? r->name : r->mention, r->name};
      if (!definedHere(FrameType::Value, r->name) && needsReuse(it)) return it;
    }
    return std::nullopt;
  }

  // A frame's own result refers to the concept it is teaching.
  bool definedHere(FrameType type, const std::string& name) const {
    return !d.frameStack.empty() && d.frameStack.back().type == type && d.frameStack.back().conceptName == name;
  }

  std::optional<Dimension> valueDimension(const Expr& e) const {
    if (auto* c = std::get_if<dsl::ValueConstant>(&e->v)) return c->value.dimension;
    if (auto* r = std::get_if<dsl::ValueConceptRef>(&e->v))
      if (const auto* entry = kb.valueConcept(r->name)) return entry->dimension();
    return std::nullopt;
  }

  std::optional<Dimension> siblingDimension(const Expr& o, const NodePath& path) const {
    if (path.empty() || (path.back() != dsl::Slot::Lhs && path.back() != dsl::Slot::Rhs)) return std::nullopt;
    NodePath parentPath(path.begin(), path.end() - 1);
    auto* cmp = std::get_if<dsl::BoolComparison>(&dsl::at(o, parentPath)->v);
    if (!cmp) return std::nullopt;
    auto dim = valueDimension(path.back() == dsl::Slot::Lhs ? cmp->rhs : cmp->lhs);
    if (dim == Dimension::Number) return std::nullopt;
    return dim;
  }

  // --- the driver ---------------------------------------------------------

  void advance() {
    for (int guard = 0; guard < 10000; ++guard) {
      if (!d.frameStack.empty() && !top().partial) return askFrameQuestion();
      Expr o = owner();
      NodePath path;
      if (auto item = firstItem(o, path)) {
        if (item->kind == Item::Hole) {
          if (bindKnownHole(o, *item)) continue;
          pushFrame(o, *item);
          continue;
        }
        return askReuse(*item);
      }
      if (!d.frameStack.empty()) return askConfirmFrame();
      auto* c = std::get_if<dsl::Conditional>(&d.root->v);
      if (c && !c->otherwise && !d.elseAsked) return askElse();
      return askConfirmScript();
    }
    throw Error(ErrorCode::InvalidValue, "dialog made no progress");
  }

  // A hole naming a stored concept becomes a reference to it.
  bool bindKnownHole(const Expr& o, const Item& it) {
    if (it.type == dsl::Type::Bool) {
      std::string name = booleanConceptName(it.span);
      if (!kb.booleanConcept(name)) return false;
      setOwner(dsl::replaceAt(o, it.path, dsl::boolRef(name, it.span)));
      return true;
    }
    if (it.type == dsl::Type::Value) {
      std::string name = valueConceptName(it.span);
      if (!kb.valueConcept(name)) return false;
      setOwner(dsl::replaceAt(o, it.path, dsl::valueRef(name, it.span)));
      return true;
    }
    return false;
  }

  void pushFrame(const Expr& o, const Item& it) {
    Frame f;
    f.span = stripTrailingPunct(it.span);
    f.holePath = it.path;
    switch (it.type) {
      case dsl::Type::Bool:
        f.type = FrameType::Bool;
        f.conceptName = booleanConceptName(f.span);
        break;
      case dsl::Type::Value:
        f.type = FrameType::Value;
        f.conceptName = valueConceptName(f.span);
        f.expectedDimension = siblingDimension(o, it.path);
        break;
      default:
        f.type = FrameType::Proc;
        break;
    }
    d.frameStack.push_back(std::move(f));
  }

  void askFrameQuestion() {
    const Frame& f = top();
    switch (f.type) {
      case FrameType::Bool:
        return ask(Phase::AwaitingExplanation, {}, "ask_bool", "How do I know whether " + lcfirst(f.span) + "?");
      case FrameType::Value:
        return ask(Phase::AwaitingExplanation, {}, "ask_value",
                   "How do I find out the value for " + f.conceptName + "?");
      case FrameType::Proc:
        return ask(Phase::AwaitingExplanation, {}, "ask_proc", "How do I " + lcfirst(f.span) + "?");
    }
  }

  std::string reuseTarget() const {
    if (!d.frameStack.empty() && top_const().type == FrameType::Bool)
      return "whether " + lcfirst(top_const().span);
    return "whether to " + lcfirst(d.contextLabel);
  }
  const Frame& top_const() const { return d.frameStack.back(); }

  void askReuse(const Item& it) {
    ReuseQuestion q{it.kind == Item::ReuseBool ? FrameType::Bool : FrameType::Value, it.name, it.span, it.path, {}};
    if (q.type == FrameType::Bool) {
      auto prior = kb.resolveBoolean(it.name, d.contextLabel).variant;
      q.priorContext = prior.context;
      const auto* e = kb.booleanConcept(it.name);
      std::string phrase = "it is " + it.name;
      for (const auto& t : e->triggerUtterances)
        if (text::normalizedTokens(t).size() > 1 && text::normalizePhrase(t) != text::normalizePhrase(it.name)) {
          phrase = t;
          break;
        }
      return ask(Phase::AwaitingReuseDecision, q, "ask_reuse_bool",
                 "I already know how to tell whether " + lcfirst(phrase) + " when determining whether to " +
                     lcfirst(prior.context) + ". Is it the same here when determining whether to " +
                     lcfirst(d.contextLabel) + "?",
                 {"yes", "no"});
    }
    auto prior = kb.resolveValue(it.name, d.contextLabel).variant;
    q.priorContext = prior.context;
    std::string how;
    if (auto* vq = std::get_if<demo::ValueQuery>(&prior.source)) {
      std::string app = launchedApp(vq->navigationActions);
      how = app.empty() ? "" : " using the " + app + " app";
    } else {
      how = " (it is " + display(std::get<TypedValue>(prior.source)) + ")";
    }
    ask(Phase::AwaitingReuseDecision, q, "ask_reuse_value",
        "I already know how to find out the value for " + it.name + how +
            ". Should I use that for determining " + reuseTarget() + "?",
        {"yes", "no"});
  }

  void askConfirmFrame() {
    const Frame& f = top();
    std::string q;
    std::string id;
    switch (f.type) {
      case FrameType::Bool:
        id = "confirm_bool";
        q = "OK, " + lcfirst(f.span) + " when " + describe(f.partial) + ". Is that right?";
        break;
      case FrameType::Value: {
        id = "confirm_value";
        if (f.learnedQuery) {
          std::string now;
          try {
            screen::World probe = world;
            now = " It shows " + display(demo::replayValueQuery(*f.learnedQuery, probe)) + " right now.";
          } catch (const Error&) {
          }
          std::string app = launchedApp(f.learnedQuery->navigationActions);
          q = "I'll find the value for " + f.conceptName + (app.empty() ? "" : " in " + app) + " by reading " +
              f.learnedQuery->selector.render() + "." + now + " Is that right?";
        } else {
          q = "OK, the value for " + f.conceptName + " is " + describe(f.partial) + ". Is that right?";
        }
        break;
      }
      case FrameType::Proc: {
        id = "confirm_proc";
        if (f.learnedScript) {
          const auto& s = *f.learnedScript;
          std::string app = launchedApp([&] {
            std::vector<screen::Action> acts;
            for (const auto& st : s.steps) acts.push_back(st.action);
            return acts;
          }());
          q = "I learned how to " + lcfirst(f.span) + (app.empty() ? "" : " using " + app) + " in " +
              std::to_string(s.steps.size()) + " steps.";
          for (const auto& p : s.parameters) {
            q += " " + p.recordedValue + " can be replaced";
            if (!p.alternatives.empty()) q += ", for example with " + p.alternatives.back();
            q += ".";
          }
          q += " Is that right?";
        } else {
          q = "OK, to " + lcfirst(f.span) + " I will " + lcfirst(describe(f.partial)) + ". Is that right?";
        }
        break;
      }
    }
    ask(Phase::AwaitingConfirmation, ConfirmKind::Frame, id, q, {"yes", "no"});
  }

  void askElse() {
    d.elseAsked = true;
    auto* c = std::get_if<dsl::Conditional>(&d.root->v);
    ask(Phase::AwaitingElse, {}, "ask_else", "What should I do if " + negatedCondition(c->cond) + "?");
  }

  void askConfirmScript() {
    std::string q = "Here is what I learned: " + describe(d.root);
    if (d.elseDeclined) q += ", otherwise do nothing";
    q += ". Should I save it?";
    ask(Phase::AwaitingConfirmation, ConfirmKind::Script, "confirm_script", q, {"yes", "no"});
  }

  void enterDemonstration() {
    world.goHome();
    out.effects.demonstrationMode = true;
    out.effects.screenChanged = true;
    const Frame& f = top();
    if (f.type == FrameType::Value) {
      out.effects.highlight = demo::highlightCandidates(world.snapshot(), f.expectedDimension);
      return ask(Phase::AwaitingDemonstration, {}, "ask_demo_value",
                 "OK, please show me where to find the value for " + f.conceptName +
                     ". I'm going to the home screen; long press the value when you see it.");
    }
    ask(Phase::AwaitingDemonstration, {}, "ask_demo_proc",
        "OK, please show me how to " + lcfirst(f.span) + ". I'm going to the home screen.");
  }

  // --- disambiguation -----------------------------------------------------

  void startDisambiguation(Continuation cont, Expr candidate, std::vector<parser::Ambiguity> ambs) {
    d.pending = Disambiguation{cont, std::move(candidate), std::move(ambs)};
    askAmbiguity();
  }

  void askAmbiguity() {
    auto& dis = std::get<Disambiguation>(d.pending);
    while (!dis.remaining.empty() && !validPath(dis.candidate, dis.remaining.front().path))
      dis.remaining.erase(dis.remaining.begin());
    if (dis.remaining.empty()) {
      Continuation cont = dis.continuation;
      Expr e = dis.candidate;
      d.pending = {};
      return apply(cont, std::move(e));
    }
    const auto& a = dis.remaining.front();
    std::vector<std::string> options;
    std::string q;
    std::string id;
    if (a.kind == parser::AmbiguityKind::Operator) {
      id = "disambiguate_op";
      auto* cmp = std::get_if<dsl::BoolComparison>(&a.alternatives.front()->v);
      for (const auto& alt : a.alternatives) options.push_back(words(std::get<dsl::BoolComparison>(alt->v).op));
      q = "Should " + squote(operandName(cmp->lhs)) + " be " + text::join(options, ", or ") + " " +
          squote(operandName(cmp->rhs)) + "?";
    } else if (a.kind == parser::AmbiguityKind::Unit) {
      id = "disambiguate_unit";
      auto n = formatMagnitude(std::get<dsl::ValueConstant>(a.alternatives.front()->v).value.magnitude);
      options = {n + " degrees Fahrenheit", n + " degrees Celsius"};
      q = "Do you mean " + options[0] + " or " + options[1] + "?";
    } else {
      id = "disambiguate_parse";
      for (const auto& alt : a.alternatives) options.push_back(describe(alt));
      q = "Which did you mean: " + text::join(options, ", or ") + "?";
    }
    Pending keep = d.pending;
    ask(Phase::AwaitingDisambiguation, std::move(keep), id, q, options);
  }

  void apply(Continuation cont, Expr e) {
    switch (cont) {
      case Continuation::Command:
        d.root = std::move(e);
        d.contextLabel = contextOf(d.root);
        break;
      case Continuation::BoolExplanation:
      case Continuation::ValueExplanation:
        top().partial = std::move(e);
        break;
      case Continuation::ElseAction: {
        auto* c = std::get_if<dsl::Conditional>(&d.root->v);
        d.root = dsl::ifThen(c->cond, c->then, std::move(e));
        break;
      }
    }
    advance();
  }

  void onDisambiguation(const Input& in) {
    auto& dis = std::get<Disambiguation>(d.pending);
    std::optional<std::size_t> choice;
    if (auto* o = std::get_if<input::Option>(&in)) {
      if (o->index < d.pendingOptions.size()) choice = o->index;
    } else if (auto* t = std::get_if<input::Text>(&in)) {
      std::string n = text::normalizePhrase(t->text);
      for (std::size_t i = 0; i < d.pendingOptions.size() && !choice; ++i)
        if (text::normalizePhrase(d.pendingOptions[i]) == n) choice = i;
      for (std::size_t i = 0; i < d.pendingOptions.size() && !choice && !n.empty(); ++i) {
        auto opt = text::normalizedTokens(d.pendingOptions[i]);
        auto said = text::normalizedTokens(t->text);
        if (text::findRun(opt, said)) choice = i;
      }
    }
    if (!choice) return rephrase();
    const auto& a = dis.remaining.front();
    dis.candidate = dsl::replaceAt(dis.candidate, a.path, a.alternatives[*choice]);
    dis.remaining.erase(dis.remaining.begin());
    askAmbiguity();
  }

  // --- turns --------------------------------------------------------------

  void onCommand(const std::string& utterance) {
    std::vector<parser::ParseCandidate> cands;
    try {
      cands = parser::parseCommand(utterance, lex);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoParse) throw;
      return rephrase();
    }
    std::string lastRule = d.lastRule;
    d = DialogState{};
    d.lastRule = lastRule;
    d.command = stripTrailingPunct(utterance);
    const auto& best = cands.front();
    if (!best.ambiguousNodes.empty())
      return startDisambiguation(Continuation::Command, best.expr, best.ambiguousNodes);
    apply(Continuation::Command, best.expr);
  }

  void onExplanation(const std::string& utterance) {
    Frame& f = top();
    try {
      switch (f.type) {
        case FrameType::Bool: return explainBool(utterance);
        case FrameType::Value: return explainValue(utterance);
        case FrameType::Proc: return explainProc(utterance);
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoParse) throw;
      rephrase();
    }
  }

  void explainBool(const std::string& utterance) {
    Frame& f = top();
    auto cands = parser::parseBooleanExplanation(utterance, lex);
    const auto& best = cands.front();
    Expr e = best.expr;
    if (auto* h = std::get_if<dsl::ResolveBool>(&e->v))
      if (text::normalizePhrase(h->span) == text::normalizePhrase(f.span)) return rephrase();
    if (auto* r = std::get_if<dsl::BoolConceptRef>(&e->v))
      if (r->name == f.conceptName) return rephrase();
    auto ambs = best.ambiguousNodes;
    if (f.keepOperator) {
      if (auto* cmp = std::get_if<dsl::BoolComparison>(&e->v); cmp && cmp->op != *f.keepOperator)
        e = dsl::compare(cmp->lhs, *f.keepOperator, cmp->rhs);
      ambs.erase(std::remove_if(ambs.begin(), ambs.end(),
                                [](const parser::Ambiguity& a) {
                                  return a.kind == parser::AmbiguityKind::Operator && a.path.empty();
                                }),
                 ambs.end());
    }
    if (!ambs.empty()) return startDisambiguation(Continuation::BoolExplanation, e, ambs);
    apply(Continuation::BoolExplanation, e);
  }

  void explainValue(const std::string& utterance) {
    Frame& f = top();
    auto r = parser::parseValueExplanation(utterance, lex);
    if (std::holds_alternative<parser::DemonstrationRequested>(r)) return enterDemonstration();
    const auto& best = std::get<std::vector<parser::ParseCandidate>>(r).front();
    const Expr& e = best.expr;
    if (auto* h = std::get_if<dsl::ResolveValue>(&e->v))
      if (text::normalizePhrase(h->span) == text::normalizePhrase(f.span) ||
          valueConceptName(h->span) == f.conceptName)
        return rephrase();
    if (auto* v = std::get_if<dsl::ValueConceptRef>(&e->v))
      if (v->name == f.conceptName) return rephrase();
    if (auto dim = valueDimension(e)) {
      const auto* entry = kb.valueConcept(f.conceptName);
      auto have = entry ? entry->dimension() : std::nullopt;
      if (have && *have != *dim) return rephrase();
    }
    if (!best.ambiguousNodes.empty())
      return startDisambiguation(Continuation::ValueExplanation, e, best.ambiguousNodes);
    apply(Continuation::ValueExplanation, e);
  }

  void explainProc(const std::string& utterance) {
    if (parser::requestsDemonstration(utterance)) return enterDemonstration();
    std::vector<parser::ParseCandidate> cands;
    try {
      cands = parser::parseAction(utterance, lex);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoParse) throw;
      return enterDemonstration();
    }
    const Expr& e = cands.front().expr;
    if (!std::holds_alternative<dsl::ProcedureCall>(e->v)) return enterDemonstration();
    top().partial = e;
    advance();
  }

  void onDemonstration(const Input& in) {
    auto* demoIn = std::get_if<input::Demonstration>(&in);
    if (!demoIn) {
      // Still waiting for the user to act on the phone.
      return say(d.pendingTemplate, d.pendingQuestion, d.pendingOptions);
    }
    Frame& f = top();
    out.effects.screenChanged = true;
    if (f.type == FrameType::Value) {
      demo::ValueQuery q;
      try {
        q = demo::recordValueQuery(world, f.conceptName, f.expectedDimension, demoIn->actions);
      } catch (const Error& e) {
        world.goHome();
        if (e.code() == ErrorCode::DimensionMismatch) {
          std::string dim = f.expectedDimension ? std::string(dimensionName(*f.expectedDimension)) : "value";
          return say("demo_value_mismatch", "That doesn't look like a " + dim + ". Please select a " + dim +
                                                " value by long pressing it.");
        }
        return say("demo_failed", std::string("I couldn't learn from that demonstration (") + e.what() +
                                      "). Please try again.");
      }
      const auto* entry = kb.valueConcept(f.conceptName);
      if (entry && entry->dimension() && *entry->dimension() != *q.expectedDimension)
        return say("demo_value_mismatch", "That doesn't look like a " +
                                              std::string(dimensionName(*entry->dimension())) +
                                              ". Please select the right value by long pressing it.");
      f.learnedQuery = q;
      f.expectedDimension = q.expectedDimension;
      f.partial = dsl::valueRef(f.conceptName, f.span);
      return advance();
    }
    if (f.type == FrameType::Proc) {
      demo::RecordedScript s;
      try {
        s = demo::recordProcedure(world, f.span, demoIn->actions);
      } catch (const Error& e) {
        world.goHome();
        return say("demo_failed", std::string("I couldn't learn from that demonstration (") + e.what() +
                                      "). Please try again.");
      }
      std::map<std::string, std::string> bindings;
      for (const auto& p : s.parameters) bindings[p.name] = p.recordedValue;
      f.partial = dsl::call(s.name, bindings, f.span);
      f.learnedScript = std::move(s);
      return advance();
    }
    throw Error(ErrorCode::IllegalInputForPhase, "Boolean concepts are explained, not demonstrated");
  }

  void onElse(const std::string& utterance) {
    if (kDecline.count(text::normalizePhrase(utterance))) {
      d.elseDeclined = true;
      return advance();
    }
    std::vector<parser::ParseCandidate> cands;
    try {
      cands = parser::parseAction(utterance, lex);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoParse) throw;
      return rephrase();
    }
    const auto& best = cands.front();
    if (!best.ambiguousNodes.empty())
      return startDisambiguation(Continuation::ElseAction, best.expr, best.ambiguousNodes);
    apply(Continuation::ElseAction, best.expr);
  }

  void onReuse(const Input& in) {
    auto answer = yesNo(in);
    if (!answer) return rephrase();
    ReuseQuestion q = std::get<ReuseQuestion>(d.pending);
    d.pending = {};
    if (*answer) {
      if (q.type == FrameType::Bool) copyBool(q.name, 0);
      else copyValue(q.name);
      return advance();
    }
    Frame f;
    f.type = q.type;
    f.span = stripTrailingPunct(q.mention);
    f.conceptName = q.name;
    f.holePath = q.path;
    f.redefinition = true;
    if (q.type == FrameType::Bool) {
      auto prior = kb.resolveBoolean(q.name, d.contextLabel).variant;
      if (auto* cmp = std::get_if<dsl::BoolComparison>(&prior.expr->v)) f.keepOperator = cmp->op;
    } else {
      f.expectedDimension = kb.valueConcept(q.name)->dimension();
    }
    d.frameStack.push_back(std::move(f));
    advance();
  }

  // Binds the proposed variant (and whatever it reads) to this context.
  void copyBool(const std::string& name, int depth) {
    if (depth > 32) return;
    auto r = kb.resolveBoolean(name, d.contextLabel);
    if (!r.reuseDecisionNeeded) return;
    kb.store(kb::BooleanConceptEntry{name, {}, {{d.contextLabel, r.variant.expr, 0}}});
    std::vector<Expr> stack{r.variant.expr};
    while (!stack.empty()) {
      Expr e = stack.back();
      stack.pop_back();
      if (auto* c = std::get_if<dsl::BoolComparison>(&e->v)) {
        stack.push_back(c->lhs);
        stack.push_back(c->rhs);
      } else if (auto* v = std::get_if<dsl::ValueConceptRef>(&e->v)) {
        if (kb.valueConcept(v->name)) copyValue(v->name);
      } else if (auto* b = std::get_if<dsl::BoolConceptRef>(&e->v)) {
        if (kb.booleanConcept(b->name)) copyBool(b->name, depth + 1);
      }
    }
  }

  void copyValue(const std::string& name) {
    auto r = kb.resolveValue(name, d.contextLabel);
    if (!r.reuseDecisionNeeded) return;
    kb.store(kb::ValueConceptEntry{name, {}, {{d.contextLabel, r.variant.source, 0}}});
  }

  void onConfirmation(const Input& in) {
    auto answer = yesNo(in);
    if (!answer) return rephrase();
    ConfirmKind kind = std::get<ConfirmKind>(d.pending);
    d.pending = {};
    if (kind == ConfirmKind::Frame) {
      if (!*answer) {
        Frame& f = top();
        f.partial = nullptr;
        f.learnedQuery.reset();
        f.learnedScript.reset();
        return askFrameQuestion();
      }
      return commitFrame();
    }
    if (!*answer) {
      std::string lastRule = d.lastRule;
      d = DialogState{};
      d.lastRule = lastRule;
      return ask(Phase::AwaitingCommand, {}, "greet", "OK, let's start over. What would you like me to do?");
    }
    kb::RuleEntry rule{text::slug(d.command), d.command, d.contextLabel, d.root};
    if (rule.name.empty()) rule.name = "rule";
    kb.store(rule);
    d.lastRule = rule.name;
    d.frameStack.clear();
    ask(Phase::Done, {}, "done", "Great, I saved this as \"" + rule.name + "\". What else can I do for you?");
  }

  void commitFrame() {
    Frame f = top();
    d.frameStack.pop_back();
    Expr replacement;
    switch (f.type) {
      case FrameType::Bool:
        kb.store(kb::BooleanConceptEntry{f.conceptName, {f.span}, {{d.contextLabel, f.partial, 0}}});
        lex = growLexicon(std::move(lex), lexsource::BoolConcept{f.conceptName, {f.span}});
        replacement = dsl::boolRef(f.conceptName, f.span);
        break;
      case FrameType::Value: {
        kb::ValueSource source;
        if (f.learnedQuery) {
          source = *f.learnedQuery;
        } else if (auto* c = std::get_if<dsl::ValueConstant>(&f.partial->v)) {
          source = normalize(c->value);
        } else if (auto* v = std::get_if<dsl::ValueConceptRef>(&f.partial->v)) {
          source = kb.resolveValue(v->name, d.contextLabel).variant.source;
        } else {
          throw Error(ErrorCode::InvalidValue, "value explanation is neither a query nor a constant");
        }
        kb.store(kb::ValueConceptEntry{f.conceptName, {f.span}, {{d.contextLabel, source, 0}}});
        lex = growLexicon(std::move(lex), lexsource::ValueConcept{f.conceptName, {f.span}});
        replacement = dsl::valueRef(f.conceptName, f.span);
        break;
      }
      case FrameType::Proc:
        if (f.learnedScript) {
          kb::ProcedureEntry p{f.learnedScript->name, {f.span}, *f.learnedScript};
          if (const auto* old = kb.procedure(p.name)) {
            std::vector<std::string> triggers = old->triggerUtterances;
            bool dup = std::any_of(triggers.begin(), triggers.end(), [&](const std::string& t) {
              return text::normalizePhrase(t) == text::normalizePhrase(f.span);
            });
            if (!dup) triggers.push_back(f.span);
            p.triggerUtterances = triggers;
          }
          kb.store(p);
          lexsource::Procedure src{p.name, p.triggerUtterances, {}};
          for (const auto& par : f.learnedScript->parameters)
            src.parameters.push_back({par.name, par.recordedValue, par.alternatives});
          lex = growLexicon(std::move(lex), src);
        }
        replacement = f.partial;
        break;
    }
    setOwner(dsl::replaceAt(owner(), f.holePath, replacement));
    advance();
  }
};

}  // namespace

std::string_view phaseName(Phase p) {
  switch (p) {
    case Phase::AwaitingCommand: return "AwaitingCommand";
    case Phase::AwaitingExplanation: return "AwaitingExplanation";
    case Phase::AwaitingDemonstration: return "AwaitingDemonstration";
    case Phase::AwaitingElse: return "AwaitingElse";
    case Phase::AwaitingReuseDecision: return "AwaitingReuseDecision";
    case Phase::AwaitingDisambiguation: return "AwaitingDisambiguation";
    case Phase::AwaitingConfirmation: return "AwaitingConfirmation";
    case Phase::Done: return "Done";
  }
  return "?";
}

std::optional<Phase> parsePhase(std::string_view name) {
  for (auto p : {Phase::AwaitingCommand, Phase::AwaitingExplanation, Phase::AwaitingDemonstration,
                 Phase::AwaitingElse, Phase::AwaitingReuseDecision, Phase::AwaitingDisambiguation,
                 Phase::AwaitingConfirmation, Phase::Done})
    if (phaseName(p) == name) return p;
  return std::nullopt;
}

bool operator==(const Frame& a, const Frame& b) {
  return a.type == b.type && a.span == b.span && a.conceptName == b.conceptName && a.holePath == b.holePath &&
         sameExpr(a.partial, b.partial) && a.expectedDimension == b.expectedDimension &&
         a.redefinition == b.redefinition && a.keepOperator == b.keepOperator &&
         a.learnedQuery == b.learnedQuery && a.learnedScript == b.learnedScript;
}

bool operator==(const Disambiguation& a, const Disambiguation& b) {
  if (a.continuation != b.continuation || !sameExpr(a.candidate, b.candidate) ||
      a.remaining.size() != b.remaining.size())
    return false;
  for (std::size_t i = 0; i < a.remaining.size(); ++i) {
    const auto& x = a.remaining[i];
    const auto& y = b.remaining[i];
    if (x.path != y.path || x.kind != y.kind || x.alternatives.size() != y.alternatives.size()) return false;
    for (std::size_t k = 0; k < x.alternatives.size(); ++k)
      if (!sameExpr(x.alternatives[k], y.alternatives[k])) return false;
  }
  return true;
}

bool operator==(const DialogState& a, const DialogState& b) {
  return a.phase == b.phase && a.command == b.command && a.contextLabel == b.contextLabel &&
         sameExpr(a.root, b.root) && a.frameStack == b.frameStack && a.elseAsked == b.elseAsked &&
         a.elseDeclined == b.elseDeclined && a.pending == b.pending && a.pendingTemplate == b.pendingTemplate &&
         a.pendingQuestion == b.pendingQuestion && a.pendingOptions == b.pendingOptions &&
         a.lastRule == b.lastRule;
}

Lexicon lexiconFor(const kb::KnowledgeBase& knowledge) {
  Lexicon lex = defaultLexicon();
  for (const auto& [name, e] : knowledge.booleanConcepts())
    lex = growLexicon(std::move(lex), lexsource::BoolConcept{name, e.triggerUtterances});
  for (const auto& [name, e] : knowledge.valueConcepts())
    lex = growLexicon(std::move(lex), lexsource::ValueConcept{name, e.triggerUtterances});
  for (const auto& [name, p] : knowledge.procedures()) {
    lexsource::Procedure src{name, p.triggerUtterances, {}};
    for (const auto& par : p.script.parameters) src.parameters.push_back({par.name, par.recordedValue, par.alternatives});
    lex = growLexicon(std::move(lex), src);
  }
  return lex;
}

std::string booleanConceptName(std::string_view span) {
  auto toks = text::normalizedTokens(span);
  auto starts = [&](std::initializer_list<std::string_view> prefix) {
    if (toks.size() <= prefix.size()) return false;
    return std::equal(prefix.begin(), prefix.end(), toks.begin());
  };
  std::size_t drop = 0;
  if (starts({"it's"}) || starts({"its"}) || starts({"there's"})) drop = 1;
  else if (starts({"it", "is"}) || starts({"there", "is"}) || starts({"there", "are"})) drop = 2;
  toks.erase(toks.begin(), toks.begin() + static_cast<long>(drop));
  if (drop == 0) {
    for (std::size_t i = 1; i + 1 < toks.size(); ++i)
      if (toks[i] == "is" || toks[i] == "are") {
        toks.erase(toks.begin(), toks.begin() + static_cast<long>(i + 1));
        break;
      }
  }
  return text::join(toks, " ");
}

std::string valueConceptName(std::string_view span) {
  auto toks = text::normalizedTokens(span);
  while (toks.size() > 1 && kDeterminers.count(toks.front())) toks.erase(toks.begin());
  return text::join(toks, " ");
}

std::string negatePhrase(std::string_view span) {
  std::vector<std::string> toks;
  for (const auto& w : text::split(text::trim(span), ' '))
    if (!w.empty()) toks.push_back(w);
  for (std::size_t i = 0; i < toks.size(); ++i) {
    std::string low = text::toLower(toks[i]);
    bool contracted = low.size() > 2 && (low.ends_with("'s") || low.ends_with("\xE2\x80\x99s"));
    if (low == "is" || low == "are" || low == "was" || low == "were" || (contracted && i == 0)) {
      toks.insert(toks.begin() + static_cast<long>(i + 1), "not");
      return text::join(toks, " ");
    }
  }
  return "not " + std::string(text::trim(span));
}

std::string negatedCondition(const Expr& cond) {
  if (auto* r = std::get_if<dsl::BoolConceptRef>(&cond->v))
    return r->mention.empty() ? "it's not " + r->name : negatePhrase(stripTrailingPunct(r->mention));
  if (auto* h = std::get_if<dsl::ResolveBool>(&cond->v)) return negatePhrase(stripTrailingPunct(h->span));
  if (auto* c = std::get_if<dsl::BoolComparison>(&cond->v))
    return describe(c->lhs) + " is " + invertedWords(c->op) + " " + describe(c->rhs);
  return "not " + describe(cond);
}

std::string describe(const Expr& e) {
  if (!e) return "nothing";
  return std::visit(
      [](const auto& n) -> std::string {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, dsl::Conditional>) {
          std::string s = "if " + describe(n.cond) + ", " + lcfirst(describe(n.then));
          if (n.otherwise) s += ", otherwise " + lcfirst(describe(n.otherwise));
          return s;
        } else if constexpr (std::is_same_v<T, dsl::BoolComparison>) {
          return describe(n.lhs) + " is " + words(n.op) + " " + describe(n.rhs);
        } else if constexpr (std::is_same_v<T, dsl::BoolConceptRef>) {
          return stripTrailingPunct(n.mention.empty() ? "it is " + n.name : n.mention);
        } else if constexpr (std::is_same_v<T, dsl::ValueConstant>) {
          return display(n.value);
        } else if constexpr (std::is_same_v<T, dsl::ValueConceptRef>) {
          return valueNamePhrase(n.name);
        } else if constexpr (std::is_same_v<T, dsl::ProcedureCall>) {
          if (!n.mention.empty()) return stripTrailingPunct(n.mention);
          std::string s = n.procedure;
          for (const auto& [k, v] : n.bindings) s += " " + k + "=" + v;
          return s;
        } else {
          return stripTrailingPunct(n.span);
        }
      },
      e->v);
}

Session::Session(kb::KnowledgeBase knowledge, screen::World world) {
  current_.lexicon = lexiconFor(knowledge);
  current_.knowledge = std::move(knowledge);
  current_.world = std::move(world);
  current_.world.goHome();
  greeting_ = {"greet", std::string(kGreeting), {}};
  current_.dialog.pendingTemplate = greeting_.templateId;
  current_.dialog.pendingQuestion = greeting_.text;
  transcript_.push_back({0, Speaker::Agent, greeting_.text, greeting_.templateId, current_.dialog.phase, false});
}

TurnResult Session::handle(const Input& in) {
  TurnResult out;
  if (isUndo(in)) {
    if (undo_.empty()) throw Error(ErrorCode::NothingToUndo, "nothing to undo");
    current_ = std::move(undo_.back());
    undo_.pop_back();
    for (auto it = transcript_.rbegin(); it != transcript_.rend(); ++it) {
      if (it->speaker != Speaker::User || it->retracted || it->text == "undo") continue;
      std::size_t turn = it->turnIndex;
      for (auto& r : transcript_)
        if (r.turnIndex == turn) r.retracted = true;
      break;
    }
    ++turn_;
    transcript_.push_back({turn_, Speaker::User, "undo", {}, current_.dialog.phase, false});
    const auto& d = current_.dialog;
    out.moves.push_back({d.pendingTemplate, d.pendingQuestion, d.pendingOptions});
    out.effects.screenChanged = true;
    if (d.phase == Phase::AwaitingDemonstration) {
      out.effects.demonstrationMode = true;
      if (!d.frameStack.empty() && d.frameStack.back().type == FrameType::Value)
        out.effects.highlight =
            demo::highlightCandidates(current_.world.snapshot(), d.frameStack.back().expectedDimension);
    }
    transcript_.push_back({turn_, Speaker::Agent, d.pendingQuestion, d.pendingTemplate, d.phase, false});
    return out;
  }
  SessionState before = current_;
  try {
    Engine(current_, out).handle(in);
  } catch (...) {
    current_ = std::move(before);
    throw;
  }
  undo_.push_back(std::move(before));
  if (undo_.size() > kUndoDepth) undo_.pop_front();
  ++turn_;
  transcript_.push_back({turn_, Speaker::User, renderInput(in), {}, undo_.back().dialog.phase, false});
  for (const auto& m : out.moves)
    transcript_.push_back({turn_, Speaker::Agent, m.text, m.templateId, current_.dialog.phase, false});
  return out;
}

}  // namespace nlteach::dialog
