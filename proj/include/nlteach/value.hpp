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

#include <optional>
#include <string>
#include <string_view>

namespace nlteach {

enum class Dimension { Temperature, Duration, Money, TimeOfDay, Number };

std::string_view dimensionName(Dimension d);
std::optional<Dimension> parseDimension(std::string_view name);

// One canonical unit per dimension: °F, minutes, USD, minute-of-day, none.
std::string_view canonicalUnit(Dimension d);

enum class Comparison { GT, LT, EQ };

std::string_view comparisonSymbol(Comparison op);  // ">", "<", "="
std::string_view comparisonWords(Comparison op);   // "greater than", ...

// A magnitude in the canonical unit of its dimension. Construct through the
// factories below so that the range invariants hold.
struct TypedValue {
  double magnitude = 0;
  Dimension dimension = Dimension::Number;

  std::string_view unit() const { return canonicalUnit(dimension); }

  static TypedValue fahrenheit(double f);
  static TypedValue celsius(double c);
  static TypedValue minutes(double m);
  static TypedValue hours(double h);
  static TypedValue usd(double amount);
  static TypedValue timeOfDay(double minuteOfDay);
  static TypedValue clock(int hour24, int minute);
  static TypedValue number(double n);
  // Canonical unit tag as rendered by `unitTag` ("F", "min", "USD", "tod",
  // "" for numbers).
  static TypedValue fromTag(double magnitude, std::string_view tag);

  friend bool operator==(const TypedValue& a, const TypedValue& b);
};

// Magnitude rounded to three decimals. Idempotent.
TypedValue normalize(const TypedValue& v);

std::string_view unitTag(Dimension d);
std::string formatMagnitude(double m);

// Human rendering, e.g. "85°F", "30 min", "$89.99", "7:00 AM". Entity
// extraction recognizes every string produced here.
std::string display(const TypedValue& v);

// Throws DimensionMismatch when the dimensions differ.
bool compare(const TypedValue& lhs, Comparison op, const TypedValue& rhs);

}  // namespace nlteach
