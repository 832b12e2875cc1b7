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

#include "nlteach/entities.hpp"

#include <cctype>
#include <cmath>
#include <initializer_list>

namespace nlteach::entities {
namespace {

constexpr std::string_view kDegree = "\xC2\xB0";     // °
constexpr std::string_view kEnDash = "\xE2\x80\x93";  // –

bool isDigit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }
bool isAlnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

bool boundaryAt(std::string_view s, std::size_t i) {
  return i >= s.size() || !isAlnum(s[i]);
}

std::size_t skipSpaces(std::string_view s, std::size_t i) {
  while (i < s.size() && s[i] == ' ') ++i;
  return i;
}

// Case-insensitive literal at i; returns end offset.
std::optional<std::size_t> literal(std::string_view s, std::size_t i, std::string_view lit) {
  if (i + lit.size() > s.size()) return std::nullopt;
  for (std::size_t k = 0; k < lit.size(); ++k) {
    if (std::tolower(static_cast<unsigned char>(s[i + k])) !=
        std::tolower(static_cast<unsigned char>(lit[k])))
      return std::nullopt;
  }
  return i + lit.size();
}

// Whole word(s) separated by single or multiple spaces, ending on a boundary.
std::optional<std::size_t> words(std::string_view s, std::size_t i,
                                 std::initializer_list<std::string_view> ws) {
  std::size_t pos = i;
  bool first = true;
  for (auto w : ws) {
    if (!first) {
      std::size_t sp = skipSpaces(s, pos);
      if (sp == pos) return std::nullopt;
      pos = sp;
    }
    first = false;
    auto e = literal(s, pos, w);
    if (!e) return std::nullopt;
    pos = *e;
  }
  if (!boundaryAt(s, pos)) return std::nullopt;
  return pos;
}

struct Number {
  double value = 0;
  std::size_t end = 0;
  bool integral = true;
};

std::optional<Number> parseNumber(std::string_view s, std::size_t i) {
  if (i >= s.size() || !isDigit(s[i])) return std::nullopt;
  std::string digits;
  std::size_t p = i;
  while (p < s.size() && isDigit(s[p])) digits += s[p++];
  // thousands separators: ",ddd" groups
  while (p + 3 < s.size() && s[p] == ',' && isDigit(s[p + 1]) && isDigit(s[p + 2]) &&
         isDigit(s[p + 3]) && (p + 4 >= s.size() || !isDigit(s[p + 4]))) {
    digits.append(s.substr(p + 1, 3));
    p += 4;
  }
  Number n;
  if (p + 1 < s.size() && s[p] == '.' && isDigit(s[p + 1])) {
    digits += '.';
    ++p;
    while (p < s.size() && isDigit(s[p])) digits += s[p++];
    n.integral = false;
  }
  n.value = std::stod(digits);
  n.end = p;
  return n;
}

enum class Unit { Fahrenheit, Celsius, AssumedDegrees, Minutes, Hours, Dollars, Am, Pm };

struct UnitMatch {
  Unit unit;
  std::size_t end;
  double extraMinutes = 0;  // "1 hr 5 min"
};

std::optional<std::size_t> minuteWord(std::string_view s, std::size_t i) {
  for (auto w : {"minutes", "minute", "mins", "min"})
    if (auto e = words(s, i, {w})) return e;
  return std::nullopt;
}

std::optional<std::size_t> hourWord(std::string_view s, std::size_t i) {
  for (auto w : {"hours", "hour", "hrs", "hr"})
    if (auto e = words(s, i, {w})) return e;
  return std::nullopt;
}

std::optional<UnitMatch> unitSuffix(std::string_view s, std::size_t numEnd) {
  std::size_t i = skipSpaces(s, numEnd);
  // Degree sign, optionally followed by a scale letter.
  if (auto e = literal(s, i, kDegree)) {
    std::size_t j = skipSpaces(s, *e);
    if (auto f = literal(s, j, "F"); f && boundaryAt(s, *f)) return UnitMatch{Unit::Fahrenheit, *f};
    if (auto c = literal(s, j, "C"); c && boundaryAt(s, *c)) return UnitMatch{Unit::Celsius, *c};
    return UnitMatch{Unit::AssumedDegrees, *e};
  }
  for (auto deg : {"degrees", "degree"}) {
    if (auto e = words(s, i, {deg})) {
      std::size_t j = skipSpaces(s, *e);
      if (j > *e) {
        for (auto w : {"fahrenheit", "f"})
          if (auto f = words(s, j, {w})) return UnitMatch{Unit::Fahrenheit, *f};
        for (auto w : {"celsius", "c"})
          if (auto c = words(s, j, {w})) return UnitMatch{Unit::Celsius, *c};
      }
      return UnitMatch{Unit::AssumedDegrees, *e};
    }
  }
  if (auto e = words(s, i, {"fahrenheit"})) return UnitMatch{Unit::Fahrenheit, *e};
  if (auto e = words(s, i, {"celsius"})) return UnitMatch{Unit::Celsius, *e};
  if (auto e = hourWord(s, i)) {
    UnitMatch m{Unit::Hours, *e};
    std::size_t j = skipSpaces(s, *e);
    if (j > *e) {
      if (auto n = parseNumber(s, j)) {
        if (auto me = minuteWord(s, skipSpaces(s, n->end))) {
          m.extraMinutes = n->value;
          m.end = *me;
        }
      }
    }
    return m;
  }
  if (auto e = minuteWord(s, i)) return UnitMatch{Unit::Minutes, *e};
  for (auto w : {"dollars", "dollar", "usd", "bucks"})
    if (auto e = words(s, i, {w})) return UnitMatch{Unit::Dollars, *e};
  for (auto w : {"a.m.", "am"})
    if (auto e = literal(s, i, w); e && boundaryAt(s, *e)) return UnitMatch{Unit::Am, *e};
  for (auto w : {"p.m.", "pm"})
    if (auto e = literal(s, i, w); e && boundaryAt(s, *e)) return UnitMatch{Unit::Pm, *e};
  return std::nullopt;
}

std::optional<TypedValue> applyUnit(double x, bool integral, const UnitMatch& u) {
  switch (u.unit) {
    case Unit::Fahrenheit:
    case Unit::AssumedDegrees: return TypedValue::fahrenheit(x);
    case Unit::Celsius: return TypedValue::celsius(x);
    case Unit::Minutes: return TypedValue::minutes(x);
    case Unit::Hours: return TypedValue::minutes(x * 60 + u.extraMinutes);
    case Unit::Dollars: return TypedValue::usd(x);
    case Unit::Am:
    case Unit::Pm: {
      if (!integral || x < 1 || x > 12) return std::nullopt;
      int h = static_cast<int>(x) % 12 + (u.unit == Unit::Pm ? 12 : 0);
      return TypedValue::clock(h, 0);
    }
  }
  return std::nullopt;
}

bool allowsNegative(Unit u) {
  return u == Unit::Fahrenheit || u == Unit::Celsius || u == Unit::AssumedDegrees ||
         u == Unit::Dollars;
}

struct Found {
  std::size_t begin;
  std::size_t end;
  TypedValue value;
  std::optional<TypedValue> rangeEnd;
  bool unitAssumed = false;
};

// "h:mm" with optional meridiem.
std::optional<Found> clockAt(std::string_view s, std::size_t start, const Number& h) {
  std::size_t p = h.end;
  if (!h.integral || p + 2 >= s.size() || s[p] != ':' || !isDigit(s[p + 1]) ||
      !isDigit(s[p + 2]))
    return std::nullopt;
  if (p + 3 < s.size() && isDigit(s[p + 3])) return std::nullopt;
  int hour = static_cast<int>(h.value);
  int minute = (s[p + 1] - '0') * 10 + (s[p + 2] - '0');
  if (minute > 59) return std::nullopt;
  std::size_t end = p + 3;
  if (auto u = unitSuffix(s, end); u && (u->unit == Unit::Am || u->unit == Unit::Pm)) {
    if (hour < 1 || hour > 12) return std::nullopt;
    hour = hour % 12 + (u->unit == Unit::Pm ? 12 : 0);
    end = u->end;
  } else if (hour > 23) {
    return std::nullopt;
  }
  if (!boundaryAt(s, end)) return std::nullopt;
  return Found{start, end, TypedValue::clock(hour, minute)};
}

std::optional<Found> matchAt(std::string_view s, std::size_t i) {
  std::size_t p = i;
  bool negative = false;
  if (s[p] == '-') {
    negative = true;
    ++p;
  }
  if (p < s.size() && s[p] == '$') {
    auto n = parseNumber(s, p + 1);
    if (!n || !boundaryAt(s, n->end)) return std::nullopt;
    return Found{i, n->end, TypedValue::usd(negative ? -n->value : n->value)};
  }
  auto n = parseNumber(s, p);
  if (!n) return std::nullopt;
  std::size_t digitsStart = p;

  if (auto c = clockAt(s, digitsStart, *n)) return c;

  auto withSign = [&](Unit u, double x) { return (negative && allowsNegative(u)) ? -x : x; };
  auto startFor = [&](Unit u) { return (negative && allowsNegative(u)) ? i : digitsStart; };

  if (auto u = unitSuffix(s, n->end)) {
    if (auto v = applyUnit(withSign(u->unit, n->value), n->integral, *u))
      return Found{startFor(u->unit), u->end, *v, std::nullopt,
                   u->unit == Unit::AssumedDegrees};
  }

  // Ranges: the unit after the second number applies to both ends.
  std::size_t q = skipSpaces(s, n->end);
  std::optional<std::size_t> sep;
  if (auto e = literal(s, q, kEnDash)) sep = e;
  else if (q < s.size() && s[q] == '-') sep = q + 1;
  else if (auto t = words(s, q, {"to"}); t && q > n->end) sep = t;
  if (sep) {
    std::size_t r = skipSpaces(s, *sep);
    if (auto hi = parseNumber(s, r)) {
      if (auto u = unitSuffix(s, hi->end); u && u->unit != Unit::Am && u->unit != Unit::Pm) {
        auto lo = applyUnit(withSign(u->unit, n->value), n->integral, *u);
        UnitMatch plain = *u;
        plain.extraMinutes = u->unit == Unit::Hours ? u->extraMinutes : 0;
        auto up = applyUnit(hi->value, hi->integral, plain);
        if (lo && up)
          return Found{startFor(u->unit), u->end, *lo, *up, u->unit == Unit::AssumedDegrees};
      }
    }
  }

  if (!boundaryAt(s, n->end) && !(n->end < s.size() && s[n->end] == '%'))
    return std::nullopt;
  return Found{i, n->end, TypedValue::number(negative ? -n->value : n->value)};
}

bool canStart(std::string_view s, std::size_t i) {
  char c = s[i];
  if (!(isDigit(c) || c == '$' || c == '-')) return false;
  if (c == '-' && !(i + 1 < s.size() && (isDigit(s[i + 1]) || s[i + 1] == '$'))) return false;
  if (i == 0) return true;
  char prev = s[i - 1];
  return !(isAlnum(prev) || prev == '.' || prev == '_' || prev == ',' || prev == ':' ||
           prev == '$' || prev == '-');
}

}  // namespace

std::vector<EntityMatch> extractEntities(std::string_view text) {
  std::vector<EntityMatch> out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (canStart(text, i)) {
      if (auto f = matchAt(text, i)) {
        EntityMatch m;
        m.sourceText = std::string(text);
        m.value = f->value;
        m.span = {f->begin, f->end};
        m.rangeEnd = f->rangeEnd;
        m.unitAssumed = f->unitAssumed;
        out.push_back(std::move(m));
        i = f->end;
        continue;
      }
      // Skip the rest of this digit run so we never restart mid-number.
      ++i;
      while (i < text.size() && (isDigit(text[i]) || text[i] == '.' || text[i] == ',')) ++i;
      continue;
    }
    ++i;
  }
  return out;
}

}  // namespace nlteach::entities
