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

#include "checks.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>

#include "nlteach/demo.hpp"
#include "nlteach/dialog.hpp"
#include "nlteach/error.hpp"
#include "nlteach/gateway.hpp"
#include "nlteach/parser.hpp"
#include "nlteach/text.hpp"
#include "parse_oracle.hpp"

namespace nlteach::testing {
namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

CheckResult fail(std::string why) { return {false, std::move(why), 0}; }

std::vector<std::string> fileLines(const std::string& path) {
  std::ifstream f(path);
  std::vector<std::string> out;
  for (std::string l; std::getline(f, l);) out.push_back(l);
  return out;
}

// Runs a stored rule on a copy of the fixtures with `env` applied.
dsl::ExecutionTrace runRule(const kb::KnowledgeBase& k, const std::string& name,
                            const std::map<std::string, std::string>& env) {
  const auto* rule = k.rule(name);
  if (!rule) throw Error(ErrorCode::UnknownScript, name);
  auto world = fixtureWorld();
  for (const auto& [key, v] : env) world.setEnv(key, v);
  kb::KnowledgeRuntime rt(k, world);
  return dsl::evaluate(rule->script, {&rt, rule->context});
}

std::string branchOf(const dsl::ExecutionTrace& t) {
  return t.branch ? std::string(dsl::branchName(*t.branch)) : "none";
}

bool contains(const std::vector<std::string>& xs, const std::string& needle) {
  for (const auto& x : xs)
    if (x.find(needle) != std::string::npos) return true;
  return false;
}

std::size_t countPrefix(const std::vector<std::string>& lines, const std::string& prefix) {
  std::size_t n = 0;
  for (const auto& l : lines) n += l.rfind(prefix, 0) == 0;
  return n;
}

struct Replay {
  gateway::TranscriptReport report;
  kb::KnowledgeBase knowledge;
  std::string rule;
  double seconds = 0;
};

Replay replay(const std::string& name) {
  Replay r;
  auto t0 = Clock::now();
  r.report = gateway::replayTranscriptFile(transcriptPath(name));
  r.seconds = since(t0);
  if (!r.report.finalKb.empty()) r.knowledge = kb::deserialize(r.report.finalKb);
  if (!r.knowledge.rules().empty()) r.rule = r.knowledge.rules().begin()->first;
  return r;
}

// A value check for one rule run: expected branch and text that must or
// must not appear among the performed actions.
struct Run {
  std::map<std::string, std::string> env;
  std::string branch;
  std::string mustDo;
  std::string mustNotDo;
};

std::optional<std::string> checkRuns(const Replay& r, const std::vector<Run>& runs) {
  for (const auto& run : runs) {
    auto t = runRule(r.knowledge, r.rule, run.env);
    std::string where = run.env.begin()->first + "=" + run.env.begin()->second;
    if (branchOf(t) != run.branch) return where + ": branch " + branchOf(t) + ", expected " + run.branch;
    auto acts = t.actions();
    if (!run.mustDo.empty() && !contains(acts, run.mustDo)) return where + ": no action " + run.mustDo;
    if (!run.mustNotDo.empty() && contains(acts, run.mustNotDo))
      return where + ": unexpected action " + run.mustNotDo;
    if (run.branch == "none" && !acts.empty()) return where + ": acted although no branch applies";
  }
  return std::nullopt;
}

CheckResult taskCheck(const std::string& name, const std::vector<Run>& runs,
                      const std::function<std::optional<std::string>(const Replay&)>& extra = {}) {
  Replay r = replay(name);
  CheckResult res{true, {}, r.seconds};
  auto bad = [&](std::string why) {
    res.passed = false;
    res.detail = why;
    return res;
  };
  if (!r.report.passed) return bad(r.report.message);
  if (r.rule.empty()) return bad("no rule was stored");
  if (auto why = checkRuns(r, runs)) return bad(*why);
  if (extra)
    if (auto why = extra(r)) return bad(*why);
  if (r.seconds >= 5.0) return bad("took " + std::to_string(r.seconds) + " s");
  res.detail = "rule " + r.rule;
  return res;
}

// Drives a dialog session directly.
class Teacher {
 public:
  explicit Teacher(kb::KnowledgeBase k) : session_(std::move(k), fixtureWorld()) {}
  std::vector<std::string> say(const std::string& t) { return ids(session_.handle(dialog::input::Text{t})); }
  std::vector<std::string> show(const std::string& actions) {
    return ids(session_.handle(dialog::input::Demonstration{screen::parseActionList(actions)}));
  }
  std::vector<std::string> pick(std::size_t i) { return ids(session_.handle(dialog::input::Option{i})); }
  const dialog::AgentMove& last() const { return last_; }
  dialog::Session& session() { return session_; }

 private:
  std::vector<std::string> ids(const dialog::TurnResult& r) {
    std::vector<std::string> out;
    for (const auto& m : r.moves) out.push_back(m.templateId);
    if (!r.moves.empty()) last_ = r.moves.back();
    return out;
  }
  dialog::Session session_;
  dialog::AgentMove last_;
};

std::string joinIds(const std::vector<std::string>& ids) { return text::join(ids, ","); }

std::optional<Comparison> operatorOf(const dsl::Expr& e) {
  if (auto* c = std::get_if<dsl::BoolComparison>(&e->v)) return c->op;
  return std::nullopt;
}

// The stored weather query for "temperature".
demo::ValueQuery weatherTemperatureQuery() {
  auto w = fixtureWorld();
  return demo::recordValueQuery(w, "temperature", Dimension::Temperature,
                                screen::parseActionList("launch(Weather); longpress(current_temp)"));
}

// A KB where `name` was taught for the air conditioner or the heater.
kb::KnowledgeBase taughtConcept(const std::string& name, Comparison op, double threshold,
                                const std::string& context) {
  kb::KnowledgeBase k;
  k.store(kb::ValueConceptEntry{"temperature", {"temperature"}, {{context, weatherTemperatureQuery(), 0}}});
  k.store(kb::BooleanConceptEntry{
      name,
      {"it's " + name},
      {{context, dsl::compare(dsl::valueRef("temperature"), op, dsl::constant(TypedValue::fahrenheit(threshold))), 0}}});
  return k;
}

}  // namespace

std::string transcriptPath(const std::string& name) {
  return std::string(NLTEACH_DATA_DIR) + "/transcripts/" + name + ".transcript";
}
std::string appDir() { return std::string(NLTEACH_DATA_DIR) + "/apps"; }
screen::World fixtureWorld() { return screen::World(screen::loadAppDir(appDir())); }

CheckResult checkTranscript(const std::string& name) {
  Replay r = replay(name);
  return {r.report.passed, r.report.passed ? std::to_string(r.report.moves.size()) + " agent moves" : r.report.message,
          r.seconds};
}

CheckResult checkTask1() {
  return taskCheck("task1",
                   {{{{"weather.temperature", "90"}}, "then", "click(iced_coffee)", "click(hot_coffee)"},
                    {{{"weather.temperature", "60"}}, "else", "click(hot_coffee)", "click(iced_coffee)"}},
                   [](const Replay& r) -> std::optional<std::string> {
                     auto lines = fileLines(transcriptPath("task1"));
                     const std::string reuse =
                         "A: ask_reuse_bool I already know how to tell whether it is hot when determining whether "
                         "to turn on the air conditioner. Is it the same here when determining whether to order "
                         "iced coffee?";
                     if (std::find(lines.begin(), lines.end(), reuse) == lines.end())
                       return "reuse question is not asked verbatim";
                     if (countPrefix(lines, "DEMO:") != 1) return "expected exactly one demonstration";
                     const auto& m = r.report.moves;
                     auto e = std::find(m.begin(), m.end(), "ask_else");
                     if (e == m.end() || e + 1 == m.end() || *(e + 1) != "confirm_script")
                       return "the else answer was not accepted without further questions";
                     if (std::count(m.begin(), m.end(), "ask_demo_proc") != 1) return "asked for two demonstrations";
                     return std::nullopt;
                   });
}

CheckResult checkTask2() {
  return taskCheck("task2", {{{{"maps.commuteMinutes", "45"}}, "then", "click(t_0700) [7:00 AM]", ""},
                             {{{"maps.commuteMinutes", "20"}}, "none", "", "launch(Clock)"}});
}

CheckResult checkTask3() {
  return taskCheck("task3", {{{{"hotel.price", "89"}}, "then", "click(book)", "click(request)"},
                             {{{"hotel.price", "120"}}, "else", "click(request)", "click(book)"}});
}

CheckResult checkTask4() {
  return taskCheck("task4", {{{{"budget.balance", "35"}}, "then", "click(pepperoni) [Pepperoni]", ""},
                             {{{"budget.balance", "12"}}, "none", "", "launch(PapaJohns)"}});
}

CheckResult checkQuestionOrder() {
  Replay r = replay("fig1");
  if (!r.report.passed) return fail(r.report.message);
  static const std::set<std::string> questions = {"ask_bool", "ask_value", "ask_demo_value", "ask_proc",
                                                  "ask_demo_proc", "ask_else"};
  std::vector<std::string> asked;
  for (const auto& id : r.report.moves)
    if (questions.count(id)) asked.push_back(id);
  std::vector<std::string> want = {"ask_bool", "ask_value", "ask_demo_value", "ask_proc", "ask_demo_proc", "ask_else"};
  if (asked != want) return fail("asked " + joinIds(asked));
  return {true, joinIds(asked), r.seconds};
}

CheckResult checkDisambiguation() {
  auto t0 = Clock::now();
  // As an explanation, answered by option index and by words.
  struct Answer {
    std::optional<std::size_t> option;
    std::string words;
    Comparison expect;
  };
  std::vector<Answer> answers = {{0, "", Comparison::GT},
                                 {1, "", Comparison::LT},
                                 {std::nullopt, "greater than", Comparison::GT},
                                 {std::nullopt, "less than", Comparison::LT}};
  for (const auto& a : answers) {
    Teacher t{kb::KnowledgeBase{}};
    t.say("Book a room if the hotel is good.");
    auto ids = t.say("the rating is better than 2");
    if (ids != std::vector<std::string>{"disambiguate_op"}) return fail("explanation answered with " + joinIds(ids));
    const auto& opts = t.last().options;
    if (opts.size() < 2 || opts[0] != "greater than" || opts[1] != "less than")
      return fail("options were " + text::join(opts, "/"));
    ids = a.option ? t.pick(*a.option) : t.say(a.words);
    if (ids != std::vector<std::string>{"ask_value"}) return fail("after choosing: " + joinIds(ids));
    t.say("let me demonstrate");
    t.show("launch(Marriott); longpress(rating)");
    t.say("yes");
    t.say("yes");
    const auto* good = t.session().knowledge().booleanConcept("good");
    if (!good) return fail("name not stored");
    if (operatorOf(good->variants.front().expr) != a.expect)
      return fail("stored " + dsl::render(good->variants.front().expr));
  }
  // Inside a command, either order of clauses.
  for (std::string cmd : {"If the rating is better than 2, book a room.", "Book a room if the rating is better than 2"}) {
    for (std::size_t opt : {0u, 1u}) {
      Teacher t{kb::KnowledgeBase{}};
      auto ids = t.say(cmd);
      if (ids != std::vector<std::string>{"disambiguate_op"}) return fail(cmd + " answered with " + joinIds(ids));
      t.pick(opt);
      auto op = operatorOf(std::get<dsl::Conditional>(t.session().state().root->v).cond);
      if (op != (opt == 0 ? Comparison::GT : Comparison::LT)) return fail(cmd + ": wrong operator kept");
    }
  }
  // A wrong answer taken back.
  Replay r = replay("worse");
  if (!r.report.passed) return fail("correction: " + r.report.message);
  auto d = since(t0);
  return {true, "explanations, commands and the undo correction", d};
}

CheckResult checkGeneralization() {
  auto t0 = Clock::now();
  struct Original {
    std::string name;
    Comparison op;
    double threshold;
    std::string context;
  };
  std::vector<Original> originals = {{"hot", Comparison::GT, 85, "turn on the air conditioner"},
                                     {"cold", Comparison::LT, 50, "turn on the heater"}};
  std::vector<std::string> words;
  for (const auto* e : defaultLexicon().byCategory(Category::ComparisonWord)) words.push_back(e->phrase);
  const std::string oven = "start the cook timer";
  int dialogs = 0;
  for (const auto& o : originals) {
    auto original = taughtConcept(o.name, o.op, o.threshold, o.context);
    const auto oldExpr = original.booleanConcept(o.name)->variants.front().expr;
    const std::string command = "If the oven is " + o.name + ", start the cook timer.";
    for (int level = 2; level <= 3; ++level) {
      for (const auto& w : words) {
        ++dialogs;
        std::string label = o.name + "/L" + std::to_string(level) + "/" + w + ": ";
        Teacher t{original};
        auto ids = t.say(command);
        if (ids != std::vector<std::string>{"ask_reuse_bool"}) return fail(label + "first move " + joinIds(ids));
        t.say("no");
        ids = t.say("The temperature is " + w + " 400 degrees Fahrenheit.");
        if (ids != std::vector<std::string>{"ask_reuse_value"}) return fail(label + "explanation gave " + joinIds(ids));
        if (level == 2) {
          ids = t.say("yes");
        } else {
          t.say("no");
          t.say("let me demonstrate");
          ids = t.show("launch(Oven); longpress(oven_temp)");
          if (ids != std::vector<std::string>{"confirm_value"}) return fail(label + "demonstration gave " + joinIds(ids));
          ids = t.say("yes");
        }
        if (ids != std::vector<std::string>{"confirm_bool"}) return fail(label + "no name confirmation");
        t.say("yes");
        const auto& k = t.session().knowledge();
        auto fresh = k.resolveBoolean(o.name, oven);
        auto kept = k.resolveBoolean(o.name, o.context);
        if (fresh.reuseDecisionNeeded) return fail(label + "no variant for the oven");
        if (!dsl::same(kept.variant.expr, oldExpr)) return fail(label + "original variant changed");
        auto want = dsl::compare(dsl::valueRef("temperature"), o.op, dsl::constant(TypedValue::fahrenheit(400)));
        if (!dsl::same(fresh.variant.expr, want)) return fail(label + "stored " + dsl::render(fresh.variant.expr));
        auto value = k.resolveValue("temperature", oven);
        const auto* q = std::get_if<demo::ValueQuery>(&value.variant.source);
        if (!q) return fail(label + "temperature is no longer a query");
        bool ovenQuery = !q->navigationActions.empty() && q->navigationActions.front().target == "Oven";
        if (level == 2 && ovenQuery) return fail(label + "threshold-only change got a new query");
        if (level == 3 && (value.reuseDecisionNeeded || !ovenQuery)) return fail(label + "no oven query variant");
        if (level == 3 && k.valueConcept("temperature")->variants.size() != 2)
          return fail(label + "weather query lost");

        // Same name, same context: no questions about the name at all.
        if (w == words.front()) {
          ++dialogs;
          Teacher again{k};
          ids = again.say(command);
          if (ids.empty() || ids.front() == "ask_reuse_bool" || ids.front() == "ask_bool")
            return fail(label + "known context asked " + joinIds(ids));
          if (!dsl::same(k.resolveBoolean(o.name, oven).variant.expr, fresh.variant.expr))
            return fail(label + "known context resolved differently");
        }
      }
    }
  }
  return {true, std::to_string(dialogs) + " dialogs", since(t0)};
}

CheckResult checkParserOracle(int maxTokens) {
  auto t0 = Clock::now();
  const auto lex = oracleLexicon();
  struct Family {
    OracleEntry entry;
    std::vector<std::string> chunks;
  };
  // Multi-word chunks count by their tokens.
  const std::vector<Family> families = {
      {OracleEntry::Command, {"if", "hot", "order", "latte"}},
      {OracleEntry::Command, {"if", "it's hot", "otherwise", "order", "iced coffee"}},
      {OracleEntry::Command, {"then", "hot", "order latte", "if", "x"}},
      {OracleEntry::BoolExplanation, {"the temperature", "is", "better", "than", "85 degrees"}},
      {OracleEntry::BoolExplanation, {"when", "temperature", "less than", "above", "85"}},
      {OracleEntry::ValueExplanation, {"it", "is", "the temperature", "85"}},
      {OracleEntry::Action, {"order", "iced coffee", "latte", "x"}},
  };
  auto chart = [&](OracleEntry e, const std::string& u) {
    std::vector<OracleCandidate> got;
    std::vector<parser::ParseCandidate> cs;
    try {
      switch (e) {
        case OracleEntry::Command: cs = parser::parseCommand(u, lex); break;
        case OracleEntry::Action: cs = parser::parseAction(u, lex); break;
        case OracleEntry::BoolExplanation: cs = parser::parseBooleanExplanation(u, lex); break;
        case OracleEntry::ValueExplanation: {
          auto v = parser::parseValueExplanation(u, lex);
          if (auto* p = std::get_if<std::vector<parser::ParseCandidate>>(&v)) cs = *p;
          break;
        }
      }
    } catch (const Error& err) {
      if (err.code() != ErrorCode::NoParse) throw;
    }
    for (const auto& c : cs) got.push_back({c.canonical, c.score, c.holes, c.holeTokens});
    return got;
  };
  long checked = 0;
  std::string firstBad;
  for (const auto& f : families) {
    std::vector<int> sizes;
    for (const auto& c : f.chunks) sizes.push_back(static_cast<int>(text::split(c, ' ').size()));
    std::function<void(const std::string&, int)> walk = [&](const std::string& u, int len) {
      if (!firstBad.empty()) return;
      if (len > 0) {
        ++checked;
        if (chart(f.entry, u) != oracleParse(f.entry, u, lex)) firstBad = u;
      }
      for (std::size_t k = 0; k < f.chunks.size(); ++k)
        if (len + sizes[k] <= maxTokens) walk(u.empty() ? f.chunks[k] : u + " " + f.chunks[k], len + sizes[k]);
    };
    walk("", 0);
  }
  if (!firstBad.empty()) return fail("parser and reference disagree on '" + firstBad + "'");
  return {true, std::to_string(checked) + " utterances", since(t0)};
}

kb::KnowledgeBase randomKnowledgeBase(std::uint32_t seed) {
  std::mt19937 rng(seed);
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  static const std::vector<std::string> words = {"alpha", "beta", "Gamma", "delta \"q\"", "éclair", "x\\y",
                                                 "tab\there", "7:00 AM", "$5", "the oven"};
  auto word = [&] { return words[pick(0, static_cast<int>(words.size()) - 1)]; };
  auto phrase = [&] {
    std::string s = word();
    for (int k = pick(0, 2); k > 0; --k) s += " " + word();
    return s;
  };
  auto randomValue = [&](Dimension d) {
    switch (d) {
      case Dimension::Temperature: return TypedValue::fahrenheit(pick(-40, 500));
      case Dimension::Duration: return TypedValue::minutes(pick(0, 600));
      case Dimension::Money: return TypedValue::usd(pick(0, 100000) / 4.0);
      case Dimension::TimeOfDay: return TypedValue::clock(pick(0, 23), pick(0, 59));
      case Dimension::Number: return TypedValue::number(pick(-1000, 1000) / 8.0);
    }
    return TypedValue::number(0);
  };
  auto randomDim = [&] { return static_cast<Dimension>(pick(0, 4)); };
  auto randomAction = [&]() -> screen::Action {
    switch (pick(0, 4)) {
      case 0: return screen::Action::click("obj_" + std::to_string(pick(0, 9)));
      case 1: return screen::Action::longPress("obj_" + std::to_string(pick(0, 9)));
      case 2: return screen::Action::setText("field", word());
      case 3: return screen::Action::launch("App" + std::to_string(pick(0, 3)));
      default: return screen::Action::home();
    }
  };
  auto contexts = [&](int n) {
    std::vector<std::string> cs;
    while (static_cast<int>(cs.size()) < n) {
      std::string c = "context " + std::to_string(cs.size()) + " " + word();
      cs.push_back(c);
    }
    return cs;
  };

  kb::KnowledgeBase k;
  std::vector<std::string> procs, bools, values;
  for (int p = pick(0, 3); p > 0; --p) {
    kb::ProcedureEntry e;
    e.name = "proc_" + std::to_string(p) + "_" + text::slug(word());
    e.triggerUtterances = {phrase()};
    for (int s = pick(1, 4); s > 0; --s) e.script.steps.push_back({randomAction(), "App", "screen", word()});
    if (pick(0, 1))
      e.script.parameters.push_back({"param", word(), {word(), word()}, static_cast<std::size_t>(pick(0, static_cast<int>(e.script.steps.size()) - 1))});
    procs.push_back(e.name);
    k.store(e);
  }
  for (int v = pick(0, 3); v > 0; --v) {
    kb::ValueConceptEntry e;
    e.name = "value " + std::to_string(v);
    e.triggerUtterances = {phrase()};
    Dimension d = randomDim();
    for (const auto& c : contexts(pick(1, 3))) {
      if (pick(0, 1)) {
        demo::ValueQuery q;
        q.name = "query_" + text::camel(e.name);
        for (int a = pick(0, 2); a > 0; --a) q.navigationActions.push_back(randomAction());
        q.selector.predicates.push_back(screen::pred::HasEntityDimension{d});
        if (pick(0, 1)) q.selector.predicates.push_back(screen::pred::NearLabel{word()});
        if (pick(0, 1)) q.selector.predicates.push_back(screen::pred::ObjectIdIs{"obj_1"});
        q.expectedDimension = d;
        e.variants.push_back({c, q, 0});
      } else {
        e.variants.push_back({c, randomValue(d), 0});
      }
    }
    values.push_back(e.name);
    k.store(e);
    // A later, separate store merges into the same entry.
    if (pick(0, 3) == 0) k.store(kb::ValueConceptEntry{e.name, {phrase()}, {{"late " + word(), randomValue(d), 0}}});
  }
  for (int b = pick(0, 3); b > 0; --b) {
    kb::BooleanConceptEntry e;
    e.name = "bool " + std::to_string(b);
    e.triggerUtterances = {phrase(), phrase()};
    for (const auto& c : contexts(pick(1, 3))) {
      dsl::Expr ex;
      auto op = static_cast<Comparison>(pick(0, 2));
      if (!values.empty() && pick(0, 2)) {
        const auto& vn = values[pick(0, static_cast<int>(values.size()) - 1)];
        Dimension d = k.valueConcept(vn)->dimension().value();
        ex = dsl::compare(dsl::valueRef(vn, word()), op, dsl::constant(randomValue(d)));
      } else if (!bools.empty() && pick(0, 1)) {
        ex = dsl::boolRef(bools.front(), word());
      } else {
        Dimension d = randomDim();
        ex = dsl::compare(dsl::constant(randomValue(d)), op, dsl::constant(randomValue(d)));
      }
      e.variants.push_back({c, ex, 0});
    }
    bools.push_back(e.name);
    k.store(e);
  }
  for (int r = pick(0, 2); r > 0 && !procs.empty(); --r) {
    auto call = [&] {
      std::map<std::string, std::string> b;
      if (pick(0, 1)) b["param"] = word();
      return dsl::call(procs[pick(0, static_cast<int>(procs.size()) - 1)], b, word());
    };
    dsl::Expr cond = bools.empty() ? dsl::compare(dsl::constant(TypedValue::number(1)), Comparison::GT,
                                                  dsl::constant(TypedValue::number(0)))
                                   : dsl::boolRef(bools.back(), word());
    dsl::Expr script = pick(0, 2) ? dsl::ifThen(cond, call(), pick(0, 1) ? call() : nullptr) : call();
    k.store(kb::RuleEntry{"rule_" + std::to_string(r), phrase(), "context " + word(), script});
  }
  return k;
}

CheckResult checkKbRoundTrip(int cases, std::uint32_t seed) {
  auto t0 = Clock::now();
  auto dir = std::filesystem::temp_directory_path() / ("nlteach_roundtrip_" + std::to_string(seed));
  std::filesystem::create_directories(dir);
  auto readAll = [](const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
  };
  std::size_t entries = 0;
  for (int i = 0; i < cases; ++i) {
    auto k = randomKnowledgeBase(seed + static_cast<std::uint32_t>(i));
    entries += k.size();
    auto a = (dir / "a.json").string(), b = (dir / "b.json").string();
    kb::persist(k, a);
    auto loaded = kb::load(a);
    if (!(loaded == k)) return fail("case " + std::to_string(i) + ": reloaded knowledge base differs");
    kb::persist(loaded, b);
    if (readAll(a) != readAll(b)) return fail("case " + std::to_string(i) + ": bytes differ after reload");
    auto copy = k;
    if (kb::serialize(copy) != kb::serialize(k)) return fail("case " + std::to_string(i) + ": copies serialize apart");
  }
  std::filesystem::remove_all(dir);
  return {true, std::to_string(cases) + " knowledge bases, " + std::to_string(entries) + " entries", since(t0)};
}

CheckResult checkValueQueries(int perFixture, std::uint32_t seed) {
  auto t0 = Clock::now();
  std::mt19937 rng(seed);
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  struct Fixture {
    std::string app, object, variable;
    Dimension dim;
    std::function<std::pair<std::string, TypedValue>()> draw;
  };
  auto cents = [&](int hi) {
    int c = pick(0, hi * 100);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%d.%02d", c / 100, c % 100);
    return std::pair<std::string, TypedValue>{buf, TypedValue::usd(c / 100.0)};
  };
  std::vector<Fixture> fixtures = {
      {"Weather", "current_temp", "weather.temperature", Dimension::Temperature,
       [&] { int v = pick(-20, 120); return std::pair{std::to_string(v), TypedValue::fahrenheit(v)}; }},
      {"Maps", "route_work_time", "maps.commuteMinutes", Dimension::Duration,
       [&] { int v = pick(1, 240); return std::pair{std::to_string(v), TypedValue::minutes(v)}; }},
      {"Maps", "route_gym_time", "maps.gymMinutes", Dimension::Duration,
       [&] { int v = pick(1, 240); return std::pair{std::to_string(v), TypedValue::minutes(v)}; }},
      {"Maps", "route_school_time", "maps.schoolMinutes", Dimension::Duration,
       [&] { int v = pick(1, 240); return std::pair{std::to_string(v), TypedValue::minutes(v)}; }},
      {"Marriott", "price", "hotel.price", Dimension::Money, [&] { return cents(999); }},
      {"Marriott", "rating", "hotel.rating", Dimension::Number,
       [&] {
         int v = pick(10, 50);
         return std::pair{std::to_string(v / 10) + "." + std::to_string(v % 10), TypedValue::number(v / 10.0)};
       }},
      {"SpendingTracker", "balance", "budget.balance", Dimension::Money, [&] { return cents(2000); }},
      {"Oven", "oven_temp", "oven.temperature", Dimension::Temperature,
       [&] { int v = pick(100, 550); return std::pair{std::to_string(v), TypedValue::fahrenheit(v)}; }},
  };
  int runs = 0;
  for (const auto& f : fixtures) {
    auto world = fixtureWorld();
    auto q = demo::recordValueQuery(world, f.object, f.dim,
                                    {screen::Action::launch(f.app), screen::Action::longPress(f.object)});
    for (int i = 0; i < perFixture; ++i, ++runs) {
      auto [text, expected] = f.draw();
      world.setEnv(f.variable, text);
      TypedValue got;
      try {
        got = demo::replayValueQuery(q, world);
      } catch (const Error& e) {
        return fail(f.app + " " + f.variable + "=" + text + ": " + e.what());
      }
      if (!(got == normalize(expected)))
        return fail(f.app + " " + f.variable + "=" + text + ": read " + display(got) + ", expected " +
                    display(expected));
      if (world.currentApp() != screen::kHomeApp) return fail(f.app + ": not back home after the query");
    }
  }
  return {true, std::to_string(runs) + " queries over " + std::to_string(fixtures.size()) + " values", since(t0)};
}

CheckResult checkUndoSoundness(int cases, int maxTurns, std::uint32_t seed) {
  auto t0 = Clock::now();
  std::mt19937 rng(seed);
  auto chance = [&](double p) { return std::uniform_real_distribution<double>(0, 1)(rng) < p; };
  auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
  auto demoOf = [](const std::string& s) { return dialog::Input{dialog::input::Demonstration{screen::parseActionList(s)}}; };
  auto say = [](const std::string& s) { return dialog::Input{dialog::input::Text{s}}; };

  const auto seedKb = kb::load(std::string(NLTEACH_DATA_DIR) + "/kb/task1_seed.json");
  struct Scenario {
    bool seeded;
    std::vector<dialog::Input> script;
  };
  const std::vector<Scenario> scenarios = {
      {false,
       {say("If it's hot, order a cup of Iced Cappuccino."),
        say("It is hot when the temperature is above 85 degrees Fahrenheit."), say("Let me demonstrate"),
        demoOf("launch(Weather); longpress(current_temp)"), say("yes"), say("yes"), say("I can demonstrate"),
        demoOf("launch(Starbucks); click(iced_cappuccino); click(order)"), say("yes"), say("order a cup of Hot Latte"),
        say("yes")}},
      {true,
       {say("Order iced coffee if it's hot."), say("yes"), say("I can demonstrate"),
        demoOf("launch(Starbucks); click(iced_coffee); click(order)"), say("yes"), say("order hot coffee"),
        say("yes")}},
      {true,
       {say("If the oven is hot, start the cook timer."), say("no"), say("The temperature is above 400 degrees."),
        dialog::input::Option{0}, say("no"), say("let me demonstrate"), demoOf("launch(Oven); longpress(oven_temp)"),
        say("yes"), say("yes")}},
      {false,
       {say("Book a room if the hotel is good."), say("The hotel is good if the rating is worse than 2."),
        dialog::input::Option{1}, say("let me demonstrate"), demoOf("launch(Marriott); longpress(rating)"),
        say("no"), say("yes")}},
  };
  const std::vector<dialog::Input> noise = {
      say("yes"), say("no"), say("nothing"), say("blue dishwasher"), say("let me demonstrate"), dialog::input::Option{0},
      dialog::input::Option{5}, demoOf("launch(Clock)"), demoOf("launch(Weather); longpress(current_temp)"),
      say("it is hot when the temperature is below 3 degrees"), say("order a latte if it is cold")};

  long turns = 0, undos = 0, replays = 0;
  for (int c = 0; c < cases; ++c) {
    const auto& sc = scenarios[pick(scenarios.size())];
    const auto startKb = sc.seeded ? seedKb : kb::KnowledgeBase{};
    dialog::Session live(startKb, fixtureWorld());
    std::vector<dialog::Input> history;  // accepted turns that are still in effect
    std::size_t cursor = 0;              // position in the scenario script
    const int n = 1 + static_cast<int>(pick(static_cast<std::size_t>(maxTurns)));
    for (int step = 0; step < n; ++step, ++turns) {
      dialog::Input in;
      bool isUndo = chance(0.25);
      if (isUndo) {
        in = dialog::input::Undo{};
      } else if (cursor < sc.script.size() && chance(0.8)) {
        in = sc.script[cursor];
      } else {
        in = noise[pick(noise.size())];
      }
      const auto before = live.snapshot();
      bool accepted = true;
      try {
        live.handle(in);
      } catch (const Error&) {
        accepted = false;
      }
      if (!accepted) {
        if (!(live.snapshot() == before))
          return fail("case " + std::to_string(c) + " step " + std::to_string(step) + ": rejected turn changed state");
        continue;
      }
      if (isUndo) {
        ++undos;
        history.pop_back();
        if (cursor > 0) --cursor;
      } else {
        history.push_back(in);
        if (cursor < sc.script.size() && in.index() == sc.script[cursor].index()) ++cursor;
      }
      // The state must equal a fresh session fed only the turns in effect.
      if (isUndo || step + 1 == n) {
        ++replays;
        dialog::Session fresh(startKb, fixtureWorld());
        for (const auto& h : history) {
          try {
            fresh.handle(h);
          } catch (const Error& e) {
            return fail("case " + std::to_string(c) + ": replaying accepted turn failed: " + e.what());
          }
        }
        const auto& a = live.snapshot();
        const auto& b = fresh.snapshot();
        std::string what;
        if (!(a.dialog == b.dialog)) what = "dialog state";
        else if (!(a.knowledge == b.knowledge)) what = "knowledge base";
        else if (!(a.lexicon == b.lexicon)) what = "lexicon";
        else if (!(a.world == b.world)) what = "phone";
        if (!what.empty())
          return fail("case " + std::to_string(c) + " step " + std::to_string(step) + ": " + what +
                      " differs from the replayed prefix");
      }
    }
  }
  return {true,
          std::to_string(cases) + " cases, " + std::to_string(turns) + " turns, " + std::to_string(undos) +
              " undos, " + std::to_string(replays) + " prefix replays",
          since(t0)};
}

}  // namespace nlteach::testing
