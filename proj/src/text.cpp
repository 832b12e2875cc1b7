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

#include "nlteach/text.hpp"

#include <cctype>

namespace nlteach::text {
namespace {

bool isSpace(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

bool isLeadingPunct(char c) {
  return c == '"' || c == '\'' || c == '(' || c == '[' || c == '{' ||
         c == '`';
}

bool isTrailingPunct(char c) {
  return c == ',' || c == '.' || c == ';' || c == ':' || c == '!' ||
         c == '?' || c == '"' || c == '\'' || c == ')' || c == ']' ||
         c == '}' || c == '`';
}

bool isBreakPunct(char c) {
  return c == ',' || c == '.' || c == ';' || c == ':' || c == '!' || c == '?';
}

// Replaces the typographic apostrophe (U+2019) with '\''.
std::string foldApostrophes(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i + 2 < s.size() && static_cast<unsigned char>(s[i]) == 0xE2 &&
        static_cast<unsigned char>(s[i + 1]) == 0x80 &&
        static_cast<unsigned char>(s[i + 2]) == 0x99) {
      out += '\'';
      i += 2;
    } else {
      out += s[i];
    }
  }
  return out;
}

// "7:00am" / "7pm" split into the clock part and the meridiem.
std::optional<std::size_t> meridiemSplit(std::string_view w) {
  if (w.size() < 3) return std::nullopt;
  std::string tail = toLower(w.substr(w.size() - 2));
  if (tail != "am" && tail != "pm") return std::nullopt;
  std::string_view head = w.substr(0, w.size() - 2);
  if (head.empty()) return std::nullopt;
  bool sawDigit = false;
  for (char c : head) {
    if (std::isdigit(static_cast<unsigned char>(c))) {
      sawDigit = true;
    } else if (c != ':') {
      return std::nullopt;
    }
  }
  if (!sawDigit || !std::isdigit(static_cast<unsigned char>(head.front())))
    return std::nullopt;
  return head.size();
}

void pushToken(std::vector<Token>& out, std::string_view src, std::size_t b,
               std::size_t e, bool brk) {
  Token t;
  t.surface = foldApostrophes(src.substr(b, e - b));
  t.norm = toLower(t.surface);
  t.begin = b;
  t.end = e;
  t.breakAfter = brk;
  out.push_back(std::move(t));
}

}  // namespace

std::string toLower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && isSpace(s[b])) ++b;
  while (e > b && isSpace(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<Token> tokenize(std::string_view utterance) {
  std::vector<Token> out;
  std::size_t i = 0;
  const std::size_t n = utterance.size();
  while (i < n) {
    while (i < n && isSpace(utterance[i])) ++i;
    if (i >= n) break;
    std::size_t b = i;
    while (i < n && !isSpace(utterance[i])) ++i;
    std::size_t e = i;
    bool brk = false;
    while (b < e && isLeadingPunct(utterance[b])) ++b;
    while (e > b && isTrailingPunct(utterance[e - 1])) {
      if (isBreakPunct(utterance[e - 1])) brk = true;
      --e;
    }
    if (b == e) {
      if (brk && !out.empty()) out.back().breakAfter = true;
      continue;
    }
    std::string_view word = utterance.substr(b, e - b);
    if (auto cut = meridiemSplit(word)) {
      pushToken(out, utterance, b, b + *cut, false);
      pushToken(out, utterance, b + *cut, e, brk);
    } else {
      pushToken(out, utterance, b, e, brk);
    }
  }
  return out;
}

std::vector<std::string> normalizedTokens(std::string_view s) {
  std::vector<std::string> out;
  for (auto& t : tokenize(s)) out.push_back(t.norm);
  return out;
}

std::string normalizePhrase(std::string_view s) {
  return join(normalizedTokens(s), " ");
}

std::string joinSurface(std::span<const Token> tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t.surface;
  }
  return out;
}

std::string joinNorm(std::span<const Token> tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t.norm;
  }
  return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.emplace_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

std::optional<std::size_t> findRun(const std::vector<std::string>& haystack,
                                   const std::vector<std::string>& needle,
                                   std::size_t from) {
  if (needle.empty() || needle.size() > haystack.size()) return std::nullopt;
  for (std::size_t i = from; i + needle.size() <= haystack.size(); ++i) {
    bool ok = true;
    for (std::size_t k = 0; k < needle.size() && ok; ++k)
      ok = haystack[i + k] == needle[k];
    if (ok) return i;
  }
  return std::nullopt;
}

std::string slug(std::string_view s) {
  std::string out;
  bool pendingSep = false;
  for (char c : s) {
    unsigned char u = static_cast<unsigned char>(c);
    if (std::isalnum(u)) {
      if (pendingSep && !out.empty()) out += '_';
      pendingSep = false;
      out += static_cast<char>(std::tolower(u));
    } else if (c == '\'') {
      // "it's" -> "its"
    } else {
      pendingSep = true;
    }
  }
  return out;
}

std::string camel(std::string_view s) {
  std::string out;
  bool upper = true;
  for (char c : s) {
    unsigned char u = static_cast<unsigned char>(c);
    if (std::isalnum(u)) {
      out += upper ? static_cast<char>(std::toupper(u)) : c;
      upper = false;
    } else {
      upper = true;
    }
  }
  return out;
}

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace nlteach::text
