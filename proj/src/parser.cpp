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

#include "nlteach/parser.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <optional>
#include <set>

#include "nlteach/entities.hpp"
#include "nlteach/error.hpp"
#include "nlteach/text.hpp"

namespace nlteach::parser {
namespace {

using dsl::Expr;

const std::set<std::string, std::less<>> kDeterminers = {"the", "my"};
const std::set<std::string, std::less<>> kCopulas = {"is",   "are", "was", "takes", "take",
                                                     "costs", "cost", "gets", "get",  "be"};
const std::set<std::string, std::less<>> kThan = {"than", "to"};
const std::set<std::string, std::less<>> kValueExplainers = {"is", "means", "equals"};
const std::vector<std::vector<std::string>> kBoolExplainers = {
    {"when"}, {"if"}, {"means"}, {"means", "that"}, {"is", "when"}};

struct Item {
  Expr expr;
  int score = 0;
  int holes = 0;
  int holeTokens = 0;
  std::string canon;
};

Item leaf(Expr e, int score, int holes = 0, int holeTokens = 0) {
  std::string c = dsl::render(e);
  return {std::move(e), score, holes, holeTokens, std::move(c)};
}

// Keeps the best-scoring item per canonical text, first one on ties.
class Bag {
 public:
  void add(Item it) {
    auto [pos, fresh] = index_.emplace(it.canon, items_.size());
    if (fresh) {
      items_.push_back(std::move(it));
    } else if (it.score > items_[pos->second].score) {
      items_[pos->second] = std::move(it);
    }
  }
  std::vector<Item>& items() { return items_; }
  bool empty() const { return items_.empty(); }

 private:
  std::vector<Item> items_;
  std::map<std::string, std::size_t> index_;
};

struct Template {
  std::vector<std::string> tokens;
  std::string procedure;
};

struct Argument {
  std::string procedure;
  std::string parameter;
  std::string value;
};

class Chart {
 public:
  Chart(std::string_view utterance, const Lexicon& lex) : lex_(lex) {
    toks_ = text::tokenize(utterance);
    n_ = static_cast<int>(toks_.size());
    for (auto& t : toks_) norms_.push_back(t.norm);
    for (const auto* e : lex.byCategory(Category::Procedure)) {
      if (auto a = parseArgumentPayload(e->payload)) {
        args_[e->phrase].push_back({a->procedure, a->parameter, a->value});
      } else {
        templates_.push_back({text::split(e->phrase, ' '), e->payload});
      }
    }
    markerEnd_.assign(n_, {});
    for (int k = 0; k < n_; ++k) {
      for (int len = 1; k + len <= n_ && len <= static_cast<int>(lex.longestPhraseTokens()); ++len) {
        std::string ph = phrase(k, k + len);
        for (const auto* e : lex.lookup(ph)) {
          if (e->category == Category::ConditionalMarker || e->category == Category::ElseMarker) {
            markerEnd_[k].push_back(k + len);
            if (e->category == Category::ElseMarker) elseM_[k].insert(len);
            else if (e->payload == "cond") condM_[k].insert(len);
            else thenM_[k].insert(len);
          }
        }
      }
    }
    val_.resize(cells());
    bool_.resize(cells());
    act_.resize(cells());
  }

  int size() const { return n_; }

  std::vector<Item> command() {
    Bag out;
    if (n_ == 0) return {};
    for (auto& a : action(0, n_)) out.add(a);
    // M COND [then] ACTION [ELSE]
    for (int m : markers(condM_, 0)) {
      for (int c = m + 1; c <= n_; ++c) {
        const auto& conds = boolean(m, c);
        if (conds.empty()) continue;
        std::vector<std::pair<int, int>> starts = {{c, 0}};
        for (int t : markers(thenM_, c)) starts.push_back({t, 2 * (t - c)});
        for (auto [t, thenScore] : starts) {
          for (int e = t + 1; e <= n_; ++e) {
            const auto& acts = action(t, e);
            if (acts.empty()) continue;
            std::vector<Item> elses;
            if (e < n_) {
              elses = elseTail(e);
              if (elses.empty()) continue;
            }
            for (const auto& cd : conds)
              for (const auto& ac : acts) {
                int base = 2 * (m - 0) + thenScore;
                if (e == n_) {
                  out.add(conditional(cd, ac, nullptr, base));
                } else {
                  for (const auto& el : elses) out.add(conditional(cd, ac, &el, base));
                }
              }
          }
        }
      }
    }
    // ACTION M COND [ELSE]
    for (int a = 1; a < n_; ++a) {
      const auto& acts = action(0, a);
      if (acts.empty()) continue;
      for (int m : markers(condM_, a)) {
        for (int c = m + 1; c <= n_; ++c) {
          const auto& conds = boolean(m, c);
          if (conds.empty()) continue;
          std::vector<Item> elses;
          if (c < n_) {
            elses = elseTail(c);
            if (elses.empty()) continue;
          }
          for (const auto& ac : acts)
            for (const auto& cd : conds) {
              int base = 2 * (m - a);
              if (c == n_) {
                out.add(conditional(cd, ac, nullptr, base));
              } else {
                for (const auto& el : elses) out.add(conditional(cd, ac, &el, base));
              }
            }
        }
      }
    }
    return std::move(out.items());
  }

  std::vector<Item> actionOnly() {
    if (n_ == 0) return {};
    return action(0, n_);
  }

  std::vector<Item> boolExplanation() {
    Bag out;
    if (n_ == 0) return {};
    for (auto& b : boolean(0, n_)) out.add(b);
    for (int p = 1; p < n_; ++p) {
      for (const auto& m : kBoolExplainers) {
        int q = p + static_cast<int>(m.size());
        if (q >= n_ || !runIs(p, m)) continue;
        for (auto& b : boolean(q, n_)) out.add(b);
      }
    }
    return std::move(out.items());
  }

  std::vector<Item> valueExplanation() {
    Bag out;
    if (n_ == 0) return {};
    for (auto& v : value(0, n_)) out.add(v);
    for (int p = 1; p + 1 < n_; ++p) {
      if (!kValueExplainers.count(norms_[p])) continue;
      for (auto& v : value(p + 1, n_)) out.add(v);
    }
    return std::move(out.items());
  }

 private:
  const Lexicon& lex_;
  std::vector<text::Token> toks_;
  std::vector<std::string> norms_;
  int n_ = 0;
  std::vector<Template> templates_;
  std::map<std::string, std::vector<Argument>> args_;
  std::vector<std::vector<int>> markerEnd_;
  std::map<int, std::set<int>> condM_, thenM_, elseM_;

  std::vector<std::optional<std::vector<Item>>> val_, bool_, act_;
  std::map<int, std::vector<Item>> else_;

  std::size_t cells() const { return static_cast<std::size_t>((n_ + 1) * (n_ + 1)); }
  std::size_t cell(int i, int j) const { return static_cast<std::size_t>(i * (n_ + 1) + j); }

  std::string phrase(int i, int j) const {
    return text::joinNorm(std::span<const text::Token>(toks_.data() + i, static_cast<std::size_t>(j - i)));
  }
  std::string surface(int i, int j) const {
    return text::joinSurface(
        std::span<const text::Token>(toks_.data() + i, static_cast<std::size_t>(j - i)));
  }
  bool runIs(int at, const std::vector<std::string>& words) const {
    if (at + static_cast<int>(words.size()) > n_) return false;
    for (std::size_t k = 0; k < words.size(); ++k)
      if (norms_[at + static_cast<int>(k)] != words[k]) return false;
    return true;
  }

  std::vector<int> markers(const std::map<int, std::set<int>>& table, int at) const {
    std::vector<int> out;
    auto it = table.find(at);
    if (it == table.end()) return out;
    for (int len : it->second) out.push_back(at + len);
    return out;
  }

  // Holes never straddle a clause break and never swallow a frame marker.
  bool holeOk(int i, int j) const {
    if (j <= i) return false;
    for (int k = i; k < j - 1; ++k)
      if (toks_[k].breakAfter) return false;
    for (int k = i; k < j; ++k)
      for (int end : markerEnd_[k])
        if (end <= j) return false;
    return true;
  }

  Item conditional(const Item& c, const Item& t, const Item* e, int markerScore) const {
    Expr ex = dsl::ifThen(c.expr, t.expr, e ? e->expr : nullptr);
    int score = c.score + t.score + markerScore + (e ? e->score : 0);
    int holes = c.holes + t.holes + (e ? e->holes : 0);
    int ht = c.holeTokens + t.holeTokens + (e ? e->holeTokens : 0);
    return leaf(ex, score, holes, ht);
  }

  // E ACTION [M ignored...] up to the end of the utterance.
  const std::vector<Item>& elseTail(int e) {
    auto found = else_.find(e);
    if (found != else_.end()) return found->second;
    Bag out;
    for (int f : markers(elseM_, e)) {
      int markerScore = 2 * (f - e);
      for (int g = f + 1; g <= n_; ++g) {
        const auto& acts = action(f, g);
        if (acts.empty()) continue;
        if (g == n_) {
          for (const auto& a : acts) {
            Item it = a;
            it.score += markerScore;
            out.add(std::move(it));
          }
          continue;
        }
        for (int h : markers(condM_, g)) {
          if (h >= n_) continue;
          for (const auto& a : acts) {
            Item it = a;
            it.score += markerScore + 2 * (h - g);
            out.add(std::move(it));
          }
        }
      }
    }
    return else_[e] = std::move(out.items());
  }

  std::optional<TypedValue> spelledConstant(int s, int j, bool& assumed) const {
    auto nums = lex_.lookup(norms_[s], Category::Number);
    if (nums.empty()) return std::nullopt;
    double x = std::strtod(nums.front()->payload.c_str(), nullptr);
    if (j - s == 1) return TypedValue::number(x);
    for (const auto* u : lex_.lookup(phrase(s + 1, j), Category::Unit)) {
      const std::string& p = u->payload;
      if (p == "degrees") {
        assumed = true;
        return TypedValue::fahrenheit(x);
      }
      if (p == "F") return TypedValue::fahrenheit(x);
      if (p == "C") return TypedValue::celsius(x);
      if (p == "min") return TypedValue::minutes(x);
      if (p == "hour") return TypedValue::hours(x);
      if (p == "USD") return TypedValue::usd(x);
      if ((p == "am" || p == "pm") && x >= 1 && x <= 12 && x == static_cast<int>(x))
        return TypedValue::clock(static_cast<int>(x) % 12 + (p == "pm" ? 12 : 0), 0);
    }
    return std::nullopt;
  }

  const std::vector<Item>& value(int i, int j) {
    auto& slot = val_[cell(i, j)];
    if (slot) return *slot;
    Bag out;
    int s = i;
    if (j - i >= 2 && kDeterminers.count(norms_[i])) s = i + 1;
    std::string surf = surface(s, j);
    auto ents = entities::extractEntities(surf);
    if (ents.size() == 1 && ents[0].span.begin == 0 && ents[0].span.end == surf.size() &&
        !ents[0].rangeEnd) {
      out.add(leaf(dsl::constant(ents[0].value, ents[0].unitAssumed), 2 * (j - s)));
    } else {
      bool assumed = false;
      if (auto v = spelledConstant(s, j, assumed))
        out.add(leaf(dsl::constant(*v, assumed), 2 * (j - s)));
    }
    for (const auto* e : lex_.lookup(phrase(s, j), Category::ValueConcept))
      out.add(leaf(dsl::valueRef(e->payload, surf), 2 * (j - s)));
    if (out.empty() && holeOk(s, j))
      out.add(leaf(dsl::resolveValue(surf), -(j - s) - 3, 1, j - s));
    slot = std::move(out.items());
    return *slot;
  }

  std::vector<int> conceptStarts(int i, int j) const {
    std::vector<int> ps = {i};
    const std::string& w = norms_[i];
    if (w == "it's" || w == "its" || w == "there's") ps.push_back(i + 1);
    if (runIs(i, {"it", "is"}) || runIs(i, {"there", "is"}) || runIs(i, {"there", "are"}))
      ps.push_back(i + 2);
    if (kDeterminers.count(w)) {
      for (int words = 1; words <= 3; ++words) {
        int k = i + 1 + words;
        if (k < j && (norms_[k] == "is" || norms_[k] == "are")) ps.push_back(k + 1);
      }
    }
    std::vector<int> out;
    for (int p : ps)
      if (p < j && std::find(out.begin(), out.end(), p) == out.end()) out.push_back(p);
    return out;
  }

  const std::vector<Item>& boolean(int i, int j) {
    auto& slot = bool_[cell(i, j)];
    if (slot) return *slot;
    Bag out;
    std::string mention = surface(i, j);
    for (int p : conceptStarts(i, j))
      for (const auto* e : lex_.lookup(phrase(p, j), Category::BoolConcept))
        out.add(leaf(dsl::boolRef(e->payload, mention), 2 * (j - p)));

    int longest = static_cast<int>(lex_.longestPhraseTokens());
    for (int a = i + 1; a < j; ++a) {
      std::vector<int> cmpStarts = {a};
      if (kCopulas.count(norms_[a])) cmpStarts.push_back(a + 1);
      for (int c : cmpStarts) {
        for (int d = c + 1; d < j && d - c <= longest; ++d) {
          auto words = lex_.lookup(phrase(c, d), Category::ComparisonWord);
          if (words.empty()) continue;
          std::vector<int> rStarts = {d};
          if (kThan.count(norms_[d]) && d + 1 < j) rStarts.push_back(d + 1);
          for (int e : rStarts) {
            const auto& lhs = value(i, a);
            if (lhs.empty()) continue;
            const auto& rhs = value(e, j);
            if (rhs.empty()) continue;
            for (const auto* w : words)
              for (Comparison op : parseComparisonPayload(w->payload))
                for (const auto& l : lhs)
                  for (const auto& r : rhs)
                    out.add(leaf(dsl::compare(l.expr, op, r.expr), l.score + r.score + 2 * (d - c),
                                 l.holes + r.holes, l.holeTokens + r.holeTokens));
          }
        }
      }
    }
    if (out.empty() && holeOk(i, j)) out.add(leaf(dsl::resolveBool(mention), -(j - i) - 3, 1, j - i));
    slot = std::move(out.items());
    return *slot;
  }

  void matchTemplate(const Template& t, std::size_t ti, int pos, int j,
                     std::map<std::string, std::string>& bindings,
                     std::vector<std::map<std::string, std::string>>& out) const {
    if (ti == t.tokens.size()) {
      if (pos == j) out.push_back(bindings);
      return;
    }
    const std::string& tok = t.tokens[ti];
    if (tok.size() > 2 && tok.front() == '{' && tok.back() == '}') {
      std::string param = tok.substr(1, tok.size() - 2);
      for (int y = pos + 1; y <= j; ++y) {
        auto it = args_.find(phrase(pos, y));
        if (it == args_.end()) continue;
        for (const auto& a : it->second) {
          if (a.procedure != t.procedure || a.parameter != param) continue;
          auto saved = bindings;
          bindings[param] = a.value;
          matchTemplate(t, ti + 1, y, j, bindings, out);
          bindings = std::move(saved);
        }
      }
      return;
    }
    if (pos < j && norms_[pos] == tok) matchTemplate(t, ti + 1, pos + 1, j, bindings, out);
  }

  const std::vector<Item>& action(int i, int j) {
    auto& slot = act_[cell(i, j)];
    if (slot) return *slot;
    Bag out;
    std::string surf = surface(i, j);
    for (const auto& t : templates_) {
      std::vector<std::map<std::string, std::string>> matches;
      std::map<std::string, std::string> b;
      matchTemplate(t, 0, i, j, b, matches);
      for (auto& m : matches) out.add(leaf(dsl::call(t.procedure, m, surf), 2 * (j - i)));
    }
    if (out.empty() && holeOk(i, j))
      out.add(leaf(dsl::resolveProcedure(surf), -(j - i) - 3, 1, j - i));
    slot = std::move(out.items());
    return *slot;
  }
};

// Path of the lowest node under which `a` and `b` differ.
std::optional<dsl::NodePath> divergence(const Expr& a, const Expr& b) {
  if (dsl::same(a, b)) return std::nullopt;
  if (!a || !b || a->v.index() != b->v.index()) return dsl::NodePath{};
  std::vector<std::pair<dsl::Slot, std::pair<Expr, Expr>>> kids;
  if (auto* ca = std::get_if<dsl::Conditional>(&a->v)) {
    const auto& cb = std::get<dsl::Conditional>(b->v);
    kids = {{dsl::Slot::Cond, {ca->cond, cb.cond}},
            {dsl::Slot::Then, {ca->then, cb.then}},
            {dsl::Slot::Else, {ca->otherwise, cb.otherwise}}};
  } else if (auto* xa = std::get_if<dsl::BoolComparison>(&a->v)) {
    const auto& xb = std::get<dsl::BoolComparison>(b->v);
    if (xa->op != xb.op) return dsl::NodePath{};
    kids = {{dsl::Slot::Lhs, {xa->lhs, xb.lhs}}, {dsl::Slot::Rhs, {xa->rhs, xb.rhs}}};
  } else {
    return dsl::NodePath{};
  }
  std::optional<dsl::NodePath> only;
  int differing = 0;
  for (auto& [slot, pair] : kids) {
    if (dsl::same(pair.first, pair.second)) continue;
    ++differing;
    if (!pair.first || !pair.second) {
      only = dsl::NodePath{};
      continue;
    }
    auto sub = divergence(pair.first, pair.second);
    dsl::NodePath p = {slot};
    p.insert(p.end(), sub->begin(), sub->end());
    only = p;
  }
  if (differing != 1 || !only || only->empty()) return dsl::NodePath{};
  return only;
}

bool onlyOperatorDiffers(const Expr& a, const Expr& b) {
  auto* x = std::get_if<dsl::BoolComparison>(&a->v);
  auto* y = std::get_if<dsl::BoolComparison>(&b->v);
  return x && y && x->op != y->op && dsl::same(x->lhs, y->lhs) && dsl::same(x->rhs, y->rhs);
}

void collectUnitAmbiguities(const Expr& e, dsl::NodePath& path, std::vector<Ambiguity>& out) {
  if (!e) return;
  if (auto* k = std::get_if<dsl::ValueConstant>(&e->v)) {
    if (k->unitAssumed && k->value.dimension == Dimension::Temperature)
      out.push_back({path, AmbiguityKind::Unit,
                     {dsl::constant(k->value), dsl::constant(TypedValue::celsius(k->value.magnitude))}});
    return;
  }
  if (auto* c = std::get_if<dsl::Conditional>(&e->v)) {
    for (auto [s, ch] : {std::pair{dsl::Slot::Cond, c->cond}, std::pair{dsl::Slot::Then, c->then},
                         std::pair{dsl::Slot::Else, c->otherwise}}) {
      path.push_back(s);
      collectUnitAmbiguities(ch, path, out);
      path.pop_back();
    }
  } else if (auto* b = std::get_if<dsl::BoolComparison>(&e->v)) {
    for (auto [s, ch] : {std::pair{dsl::Slot::Lhs, b->lhs}, std::pair{dsl::Slot::Rhs, b->rhs}}) {
      path.push_back(s);
      collectUnitAmbiguities(ch, path, out);
      path.pop_back();
    }
  }
}

std::vector<Ambiguity> ambiguitiesOf(const std::vector<ParseCandidate>& ranked) {
  std::vector<Ambiguity> out;
  const auto& top = ranked.front();
  for (std::size_t k = 1; k < ranked.size() && ranked[k].score == top.score; ++k) {
    auto p = divergence(top.expr, ranked[k].expr);
    if (!p) continue;
    Expr mine = dsl::at(top.expr, *p);
    Expr theirs = dsl::at(ranked[k].expr, *p);
    if (dsl::typeOf(mine) != dsl::typeOf(theirs)) continue;
    auto slot = std::find_if(out.begin(), out.end(), [&](const Ambiguity& a) { return a.path == *p; });
    if (slot == out.end()) {
      out.push_back({*p, AmbiguityKind::Operator, {mine}});
      slot = out.end() - 1;
    }
    bool dup = std::any_of(slot->alternatives.begin(), slot->alternatives.end(),
                           [&](const Expr& e) { return dsl::same(e, theirs); });
    if (!dup) slot->alternatives.push_back(theirs);
  }
  for (auto& a : out) {
    bool ops = std::all_of(a.alternatives.begin() + 1, a.alternatives.end(), [&](const Expr& e) {
      return onlyOperatorDiffers(a.alternatives.front(), e);
    });
    a.kind = ops ? AmbiguityKind::Operator : AmbiguityKind::Extent;
    if (ops) {
      auto rank = [](const Expr& e) {
        return static_cast<int>(std::get<dsl::BoolComparison>(e->v).op);
      };
      std::stable_sort(a.alternatives.begin(), a.alternatives.end(),
                       [&](const Expr& x, const Expr& y) { return rank(x) < rank(y); });
    }
  }
  dsl::NodePath path;
  collectUnitAmbiguities(top.expr, path, out);
  return out;
}

std::vector<ParseCandidate> finish(std::vector<Item> items, std::string_view what) {
  if (items.empty()) throw Error(ErrorCode::NoParse, "cannot parse " + std::string(what));
  std::vector<ParseCandidate> out;
  out.reserve(items.size());
  for (auto& it : items)
    out.push_back({std::move(it.expr), it.score, it.holes, it.holeTokens, std::move(it.canon), {}});
  std::sort(out.begin(), out.end(), ranksBefore);
  out.front().ambiguousNodes = ambiguitiesOf(out);
  return out;
}

}  // namespace

std::string_view ambiguityKindName(AmbiguityKind k) {
  switch (k) {
    case AmbiguityKind::Operator: return "operator";
    case AmbiguityKind::Extent: return "extent";
    case AmbiguityKind::Unit: return "unit";
  }
  return "?";
}

bool ranksBefore(const ParseCandidate& a, const ParseCandidate& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.holes != b.holes) return a.holes < b.holes;
  if (a.holeTokens != b.holeTokens) return a.holeTokens < b.holeTokens;
  return a.canonical < b.canonical;
}

std::vector<ParseCandidate> parseCommand(std::string_view utterance, const Lexicon& lexicon) {
  Chart chart(utterance, lexicon);
  return finish(chart.command(), "command '" + std::string(utterance) + "'");
}

std::vector<ParseCandidate> parseAction(std::string_view utterance, const Lexicon& lexicon) {
  Chart chart(utterance, lexicon);
  return finish(chart.actionOnly(), "action '" + std::string(utterance) + "'");
}

std::vector<ParseCandidate> parseBooleanExplanation(std::string_view utterance,
                                                    const Lexicon& lexicon) {
  Chart chart(utterance, lexicon);
  return finish(chart.boolExplanation(), "condition '" + std::string(utterance) + "'");
}

ValueExplanation parseValueExplanation(std::string_view utterance, const Lexicon& lexicon) {
  if (requestsDemonstration(utterance)) return DemonstrationRequested{};
  Chart chart(utterance, lexicon);
  return finish(chart.valueExplanation(), "value '" + std::string(utterance) + "'");
}

bool requestsDemonstration(std::string_view utterance) {
  auto toks = text::normalizedTokens(utterance);
  for (std::size_t k = 0; k < toks.size(); ++k) {
    const auto& w = toks[k];
    if (w == "demonstrate" || w == "demonstration" || w == "demo") return true;
    if (w == "show" && k + 1 < toks.size() && (toks[k + 1] == "you" || toks[k + 1] == "me"))
      return true;
  }
  return false;
}

}  // namespace nlteach::parser
