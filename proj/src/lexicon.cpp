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

#include "nlteach/lexicon.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "nlteach/error.hpp"
#include "nlteach/text.hpp"

namespace nlteach {
namespace detail {
extern const char* const kSeedLexicon;
}

namespace {

constexpr Category kAllCategories[] = {
    Category::BoolConcept,       Category::ValueConcept, Category::Procedure,
    Category::ComparisonWord,    Category::Unit,         Category::Number,
    Category::ConditionalMarker, Category::ElseMarker,
};

bool isSlotToken(std::string_view w) {
  if (w.size() < 3 || w.front() != '{' || w.back() != '}') return false;
  for (char c : w.substr(1, w.size() - 2))
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  return true;
}

void validatePayload(Category c, const std::string& phrase, std::string_view payload) {
  auto bad = [&](const std::string& why) {
    throw Error(ErrorCode::MalformedLexicon, "'" + phrase + "' (" +
                                                 std::string(categoryName(c)) + "): " + why);
  };
  if (payload.empty()) bad("empty payload");
  switch (c) {
    case Category::ComparisonWord:
      if (parseComparisonPayload(payload).empty()) bad("bad operator set '" + std::string(payload) + "'");
      break;
    case Category::ConditionalMarker:
      if (payload != "cond" && payload != "then") bad("marker payload must be cond or then");
      break;
    case Category::ElseMarker:
      if (payload != "else") bad("else marker payload must be else");
      break;
    case Category::Unit: {
      static const std::set<std::string, std::less<>> units = {"degrees", "F",    "C",  "min",
                                                               "hour",    "USD",  "am", "pm"};
      if (!units.count(payload)) bad("unknown unit '" + std::string(payload) + "'");
      break;
    }
    case Category::Number: {
      std::string p(payload);
      char* end = nullptr;
      std::strtod(p.c_str(), &end);
      if (end == p.c_str() || *end != '\0') bad("not a number");
      break;
    }
    case Category::Procedure:
      if (payload.find('#') != std::string_view::npos && !parseArgumentPayload(payload))
        bad("bad argument payload");
      break;
    case Category::BoolConcept:
    case Category::ValueConcept:
      break;
  }
}

// Token run of `value` inside `goal`, replaced by "{param}".
std::string templatize(const std::vector<std::string>& goal,
                       const std::vector<lexsource::Parameter>& params) {
  std::vector<std::string> out = goal;
  for (const auto& p : params) {
    auto needle = text::normalizedTokens(p.recordedValue);
    // Search the partially rewritten sequence so earlier slots stay put.
    if (auto pos = text::findRun(out, needle)) {
      out.erase(out.begin() + static_cast<long>(*pos),
                out.begin() + static_cast<long>(*pos + needle.size()));
      out.insert(out.begin() + static_cast<long>(*pos), "{" + p.name + "}");
    }
  }
  return text::join(out, " ");
}

void addArgument(Lexicon& lex, const std::string& procedure, const std::string& parameter,
                 const std::string& value) {
  if (text::normalizePhrase(value).empty()) return;
  lex.add(value, Category::Procedure, argumentPayload({procedure, parameter, value}));
}

}  // namespace

std::string_view categoryName(Category c) {
  switch (c) {
    case Category::BoolConcept: return "BoolConcept";
    case Category::ValueConcept: return "ValueConcept";
    case Category::Procedure: return "Procedure";
    case Category::ComparisonWord: return "ComparisonWord";
    case Category::Unit: return "Unit";
    case Category::Number: return "Number";
    case Category::ConditionalMarker: return "ConditionalMarker";
    case Category::ElseMarker: return "ElseMarker";
  }
  return "?";
}

std::optional<Category> parseCategory(std::string_view name) {
  for (Category c : kAllCategories)
    if (categoryName(c) == name) return c;
  return std::nullopt;
}

std::optional<ProcedureArgument> parseArgumentPayload(std::string_view payload) {
  auto hash = payload.find('#');
  if (hash == std::string_view::npos) return std::nullopt;
  auto eq = payload.find('=', hash);
  if (eq == std::string_view::npos || hash == 0 || eq == hash + 1 || eq + 1 >= payload.size())
    return std::nullopt;
  return ProcedureArgument{std::string(payload.substr(0, hash)),
                           std::string(payload.substr(hash + 1, eq - hash - 1)),
                           std::string(payload.substr(eq + 1))};
}

std::string argumentPayload(const ProcedureArgument& a) {
  return a.procedure + "#" + a.parameter + "=" + a.value;
}

std::vector<Comparison> parseComparisonPayload(std::string_view payload) {
  std::vector<Comparison> out;
  for (const auto& part : text::split(payload, '|')) {
    Comparison c;
    if (part == "GT") c = Comparison::GT;
    else if (part == "LT") c = Comparison::LT;
    else if (part == "EQ") c = Comparison::EQ;
    else return {};
    if (std::find(out.begin(), out.end(), c) != out.end()) return {};
    out.push_back(c);
  }
  return out;
}

std::string normalizeLexPhrase(std::string_view phrase) {
  std::vector<std::string> out;
  std::istringstream in{std::string(phrase)};
  std::string w;
  while (in >> w) {
    if (isSlotToken(w)) {
      out.push_back(text::toLower(w));
    } else {
      for (auto& t : text::normalizedTokens(w)) out.push_back(t);
    }
  }
  return text::join(out, " ");
}

void Lexicon::add(std::string_view phrase, Category category, std::string_view payload) {
  std::string norm = normalizeLexPhrase(phrase);
  if (norm.empty())
    throw Error(ErrorCode::MalformedLexicon, "empty phrase for payload '" + std::string(payload) + "'");
  validatePayload(category, norm, payload);
  LexEntry e{norm, category, std::string(payload)};
  if (!entries_.insert(e).second) return;
  auto& bucket = index_[norm];
  bucket.insert(std::upper_bound(bucket.begin(), bucket.end(), e), e);
  longest_ = std::max(longest_, text::split(norm, ' ').size());
}

std::vector<const LexEntry*> Lexicon::lookup(std::string_view normalizedPhrase) const {
  std::vector<const LexEntry*> out;
  auto it = index_.find(normalizedPhrase);
  if (it == index_.end()) return out;
  for (const auto& e : it->second) out.push_back(&e);
  return out;
}

std::vector<const LexEntry*> Lexicon::lookup(std::string_view normalizedPhrase, Category c) const {
  std::vector<const LexEntry*> out;
  for (auto* e : lookup(normalizedPhrase))
    if (e->category == c) out.push_back(e);
  return out;
}

std::vector<const LexEntry*> Lexicon::byCategory(Category c) const {
  std::vector<const LexEntry*> out;
  for (const auto& e : entries_)
    if (e.category == c) out.push_back(&e);
  return out;
}

std::string Lexicon::serialize() const {
  std::string out;
  for (const auto& e : entries_) {
    out += e.phrase;
    out += '\t';
    out += categoryName(e.category);
    out += '\t';
    out += e.payload;
    out += '\n';
  }
  return out;
}

Lexicon parseLexicon(std::string_view content) {
  Lexicon lex;
  std::size_t lineNo = 0;
  for (const auto& raw : text::split(content, '\n')) {
    ++lineNo;
    std::string line = raw;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty() || text::trim(line)[0] == '#') continue;
    auto cols = text::split(line, '\t');
    if (cols.size() != 3)
      throw Error(ErrorCode::MalformedLexicon,
                  "line " + std::to_string(lineNo) + ": expected 3 tab-separated columns");
    auto cat = parseCategory(text::trim(cols[1]));
    if (!cat)
      throw Error(ErrorCode::MalformedLexicon,
                  "line " + std::to_string(lineNo) + ": unknown category '" + cols[1] + "'");
    try {
      lex.add(cols[0], *cat, text::trim(cols[2]));
    } catch (const Error& e) {
      throw Error(ErrorCode::MalformedLexicon, "line " + std::to_string(lineNo) + ": " + e.what());
    }
  }
  return lex;
}

Lexicon loadLexicon(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read lexicon '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parseLexicon(ss.str());
}

Lexicon defaultLexicon() {
  static const Lexicon seed = parseLexicon(detail::kSeedLexicon);
  return seed;
}

Lexicon growLexicon(Lexicon lex, const LexiconSource& source) {
  if (auto* b = std::get_if<lexsource::BoolConcept>(&source)) {
    std::string n = text::normalizePhrase(b->name);
    if (n.empty()) throw Error(ErrorCode::MalformedLexicon, "bool concept without a name");
    lex.add(n, Category::BoolConcept, b->name);
    lex.add("it's " + n, Category::BoolConcept, b->name);
    lex.add("it is " + n, Category::BoolConcept, b->name);
    auto words = text::split(n, ' ');
    if (words.size() >= 2) lex.add("there is " + n, Category::BoolConcept, b->name);
    if (words.size() == 2) {
      lex.add(words[1] + " is " + words[0], Category::BoolConcept, b->name);
      lex.add("the " + words[1] + " is " + words[0], Category::BoolConcept, b->name);
    }
    for (const auto& t : b->triggers)
      if (!text::normalizePhrase(t).empty()) lex.add(t, Category::BoolConcept, b->name);
  } else if (auto* v = std::get_if<lexsource::ValueConcept>(&source)) {
    if (text::normalizePhrase(v->name).empty())
      throw Error(ErrorCode::MalformedLexicon, "value concept without a name");
    lex.add(v->name, Category::ValueConcept, v->name);
    for (const auto& t : v->triggers)
      if (!text::normalizePhrase(t).empty()) lex.add(t, Category::ValueConcept, v->name);
  } else if (auto* p = std::get_if<lexsource::Procedure>(&source)) {
    if (p->name.empty()) throw Error(ErrorCode::MalformedLexicon, "procedure without a name");
    for (const auto& t : p->triggers) {
      auto goal = text::normalizedTokens(t);
      if (goal.empty()) continue;
      lex.add(templatize(goal, p->parameters), Category::Procedure, p->name);
    }
    for (const auto& param : p->parameters) {
      addArgument(lex, p->name, param.name, param.recordedValue);
      for (const auto& alt : param.alternatives) addArgument(lex, p->name, param.name, alt);
    }
  } else if (auto* s = std::get_if<lexsource::ScreenLabels>(&source)) {
    if (s->procedure.empty() || s->parameter.empty())
      throw Error(ErrorCode::MalformedLexicon, "screen labels need a procedure parameter");
    for (const auto& l : s->labels) addArgument(lex, s->procedure, s->parameter, l);
  }
  return lex;
}

}  // namespace nlteach
