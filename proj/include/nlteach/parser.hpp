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

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "nlteach/dsl.hpp"
#include "nlteach/lexicon.hpp"

namespace nlteach::parser {

enum class AmbiguityKind { Operator, Extent, Unit };
std::string_view ambiguityKindName(AmbiguityKind k);

struct Ambiguity {
  dsl::NodePath path;
  AmbiguityKind kind;
  // The top candidate's own node comes first, except for operators, which
  // are always listed GT, LT, EQ.
  std::vector<dsl::Expr> alternatives;
};

struct ParseCandidate {
  dsl::Expr expr;
  int score = 0;
  int holes = 0;
  int holeTokens = 0;
  std::string canonical;
  std::vector<Ambiguity> ambiguousNodes;  // filled on the top candidate only
};

// Scoring: +2 per token matched against the lexicon (concepts, procedure
// templates and arguments, comparison words, markers, numbers and units),
// -1 per token inside a hole, -3 per hole. Glue words score nothing.
// Order: score desc, holes asc, hole tokens asc, canonical text asc.
bool ranksBefore(const ParseCandidate& a, const ParseCandidate& b);

// All throw NoParse when nothing derives.
std::vector<ParseCandidate> parseCommand(std::string_view utterance, const Lexicon& lexicon);
std::vector<ParseCandidate> parseAction(std::string_view utterance, const Lexicon& lexicon);
std::vector<ParseCandidate> parseBooleanExplanation(std::string_view utterance,
                                                    const Lexicon& lexicon);

struct DemonstrationRequested {
  bool operator==(const DemonstrationRequested&) const = default;
};
using ValueExplanation = std::variant<DemonstrationRequested, std::vector<ParseCandidate>>;

ValueExplanation parseValueExplanation(std::string_view utterance, const Lexicon& lexicon);

// "let me demonstrate", "I can demonstrate", "I'll show you", ...
bool requestsDemonstration(std::string_view utterance);

}  // namespace nlteach::parser
