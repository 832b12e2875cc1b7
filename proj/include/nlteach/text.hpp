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

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

// Tokenization and phrase normalization shared by the parser, the lexicon,
// demonstration parameter inference and the knowledge base.
namespace nlteach::text {

struct Token {
  std::string surface;  // as typed, boundary punctuation removed
  std::string norm;     // lowercase form used for matching
  std::size_t begin = 0;
  std::size_t end = 0;
  // A clause break (comma, semicolon, period...) follows this token.
  bool breakAfter = false;
};

std::vector<Token> tokenize(std::string_view utterance);

std::string toLower(std::string_view s);
std::string trim(std::string_view s);

// Lowercase, boundary punctuation stripped, single spaces.
std::string normalizePhrase(std::string_view s);
std::vector<std::string> normalizedTokens(std::string_view s);

std::string joinSurface(std::span<const Token> tokens);
std::string joinNorm(std::span<const Token> tokens);
std::string join(const std::vector<std::string>& parts, std::string_view sep);
std::vector<std::string> split(std::string_view s, char sep);

// First index at which `needle` occurs as a contiguous run in `haystack`.
std::optional<std::size_t> findRun(const std::vector<std::string>& haystack,
                                   const std::vector<std::string>& needle,
                                   std::size_t from = 0);

// "Set an alarm" -> "set_an_alarm"; only [a-z0-9_] survive.
std::string slug(std::string_view s);

// "commute time" -> "CommuteTime".
std::string camel(std::string_view s);

std::string quote(std::string_view s);

}  // namespace nlteach::text
