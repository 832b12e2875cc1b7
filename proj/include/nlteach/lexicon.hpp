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

#include <compare>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "nlteach/value.hpp"

namespace nlteach {

enum class Category {
  BoolConcept,
  ValueConcept,
  Procedure,
  ComparisonWord,
  Unit,
  Number,
  ConditionalMarker,
  ElseMarker,
};

std::string_view categoryName(Category c);
std::optional<Category> parseCategory(std::string_view name);

// Procedure entries come in two shapes:
//   template  "order {item}"     -> "order_Starbucks"
//   argument  "iced cappuccino"  -> "order_Starbucks#item=Iced Cappuccino"
struct LexEntry {
  std::string phrase;  // normalized
  Category category;
  std::string payload;
  auto operator<=>(const LexEntry&) const = default;
  bool operator==(const LexEntry&) const = default;
};

struct ProcedureArgument {
  std::string procedure;
  std::string parameter;
  std::string value;
};

// "order_Starbucks#item=Iced Cappuccino"; nullopt for template payloads.
std::optional<ProcedureArgument> parseArgumentPayload(std::string_view payload);
std::string argumentPayload(const ProcedureArgument& a);

// Comparison payloads: "GT", "LT", "EQ" or a '|' joined subset such as "GT|LT".
std::vector<Comparison> parseComparisonPayload(std::string_view payload);

// Lowercase, punctuation-stripped, single-spaced. Slot tokens such as
// "{item}" are kept verbatim.
std::string normalizeLexPhrase(std::string_view phrase);

class Lexicon {
 public:
  Lexicon() = default;

  // Throws MalformedLexicon on an empty phrase or an invalid payload.
  void add(std::string_view phrase, Category category, std::string_view payload);
  bool contains(const LexEntry& e) const { return entries_.count(e) > 0; }

  const std::set<LexEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  // Entries whose phrase equals `normalizedPhrase`.
  std::vector<const LexEntry*> lookup(std::string_view normalizedPhrase) const;
  std::vector<const LexEntry*> lookup(std::string_view normalizedPhrase, Category c) const;
  std::vector<const LexEntry*> byCategory(Category c) const;
  std::size_t longestPhraseTokens() const { return longest_; }

  // phrase \t category \t payload, sorted.
  std::string serialize() const;

  friend bool operator==(const Lexicon& a, const Lexicon& b) { return a.entries_ == b.entries_; }

 private:
  std::set<LexEntry> entries_;
  std::map<std::string, std::vector<LexEntry>, std::less<>> index_;
  std::size_t longest_ = 0;
};

// Seed file: one entry per line, tab separated; '#' starts a comment line.
Lexicon parseLexicon(std::string_view content);
Lexicon loadLexicon(const std::string& path);
// Bundled seed (comparison words, markers, units).
Lexicon defaultLexicon();

namespace lexsource {

struct BoolConcept {
  std::string name;
  std::vector<std::string> triggers;
};

struct ValueConcept {
  std::string name;
  std::vector<std::string> triggers;
};

struct Parameter {
  std::string name;
  std::string recordedValue;
  std::vector<std::string> alternatives;
};

struct Procedure {
  std::string name;
  std::vector<std::string> triggers;  // goal utterances
  std::vector<Parameter> parameters;
};

// Visible labels harvested from a recorded screen, offered as argument
// phrases for one procedure parameter.
struct ScreenLabels {
  std::string procedure;
  std::string parameter;
  std::vector<std::string> labels;
};

}  // namespace lexsource

using LexiconSource = std::variant<lexsource::BoolConcept, lexsource::ValueConcept,
                                   lexsource::Procedure, lexsource::ScreenLabels>;

// Returns an extended copy. Idempotent; never removes entries.
Lexicon growLexicon(Lexicon lexicon, const LexiconSource& source);

}  // namespace nlteach
