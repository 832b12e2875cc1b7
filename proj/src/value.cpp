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

#include "nlteach/value.hpp"

#include <cmath>
#include <cstdio>

#include "nlteach/error.hpp"

namespace nlteach {
namespace {

long long milli(double m) { return std::llround(m * 1000.0); }

double roundMilli(double m) {
  double r = static_cast<double>(milli(m)) / 1000.0;
  return r == 0 ? 0.0 : r;  // no negative zero
}

}  // namespace

std::string_view dimensionName(Dimension d) {
  switch (d) {
    case Dimension::Temperature: return "temperature";
    case Dimension::Duration: return "duration";
    case Dimension::Money: return "money";
    case Dimension::TimeOfDay: return "time-of-day";
    case Dimension::Number: return "number";
  }
  return "number";
}

std::optional<Dimension> parseDimension(std::string_view name) {
  for (auto d : {Dimension::Temperature, Dimension::Duration, Dimension::Money,
                 Dimension::TimeOfDay, Dimension::Number}) {
    if (dimensionName(d) == name) return d;
  }
  return std::nullopt;
}

std::string_view canonicalUnit(Dimension d) {
  switch (d) {
    case Dimension::Temperature: return "°F";
    case Dimension::Duration: return "minute";
    case Dimension::Money: return "USD";
    case Dimension::TimeOfDay: return "minute-of-day";
    case Dimension::Number: return "unitless";
  }
  return "unitless";
}

std::string_view unitTag(Dimension d) {
  switch (d) {
    case Dimension::Temperature: return "F";
    case Dimension::Duration: return "min";
    case Dimension::Money: return "USD";
    case Dimension::TimeOfDay: return "tod";
    case Dimension::Number: return "";
  }
  return "";
}

std::string_view comparisonSymbol(Comparison op) {
  switch (op) {
    case Comparison::GT: return ">";
    case Comparison::LT: return "<";
    case Comparison::EQ: return "=";
  }
  return "=";
}

std::string_view comparisonWords(Comparison op) {
  switch (op) {
    case Comparison::GT: return "greater than";
    case Comparison::LT: return "less than";
    case Comparison::EQ: return "equal to";
  }
  return "equal to";
}

TypedValue TypedValue::fahrenheit(double f) {
  return normalize({f, Dimension::Temperature});
}

TypedValue TypedValue::celsius(double c) {
  return fahrenheit(c * 9.0 / 5.0 + 32.0);
}

TypedValue TypedValue::minutes(double m) {
  if (!(m >= 0)) throw Error(ErrorCode::InvalidValue, "negative duration");
  return normalize({m, Dimension::Duration});
}

TypedValue TypedValue::hours(double h) { return minutes(h * 60.0); }

TypedValue TypedValue::usd(double amount) {
  return normalize({amount, Dimension::Money});
}

TypedValue TypedValue::timeOfDay(double minuteOfDay) {
  if (!(minuteOfDay >= 0 && minuteOfDay < 1440))
    throw Error(ErrorCode::InvalidValue,
                "time of day out of range: " + formatMagnitude(minuteOfDay));
  return normalize({minuteOfDay, Dimension::TimeOfDay});
}

TypedValue TypedValue::clock(int hour24, int minute) {
  return timeOfDay(hour24 * 60 + minute);
}

TypedValue TypedValue::number(double n) {
  return normalize({n, Dimension::Number});
}

TypedValue TypedValue::fromTag(double magnitude, std::string_view tag) {
  if (tag == "F") return fahrenheit(magnitude);
  if (tag == "C") return celsius(magnitude);
  if (tag == "min") return minutes(magnitude);
  if (tag == "USD") return usd(magnitude);
  if (tag == "tod") return timeOfDay(magnitude);
  if (tag.empty()) return number(magnitude);
  throw Error(ErrorCode::InvalidValue, "unknown unit tag '" + std::string(tag) + "'");
}

bool operator==(const TypedValue& a, const TypedValue& b) {
  return a.dimension == b.dimension && milli(a.magnitude) == milli(b.magnitude);
}

TypedValue normalize(const TypedValue& v) {
  return {roundMilli(v.magnitude), v.dimension};
}

std::string formatMagnitude(double m) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", roundMilli(m));
  std::string s = buf;
  while (!s.empty() && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  if (s == "-0") s = "0";
  return s;
}

std::string display(const TypedValue& v) {
  switch (v.dimension) {
    case Dimension::Temperature:
      return formatMagnitude(v.magnitude) + "°F";
    case Dimension::Duration:
      return formatMagnitude(v.magnitude) + " min";
    case Dimension::Money:
      if (v.magnitude < 0) return "-$" + formatMagnitude(-v.magnitude);
      return "$" + formatMagnitude(v.magnitude);
    case Dimension::TimeOfDay: {
      long total = std::lround(v.magnitude);
      int h = static_cast<int>(total / 60), m = static_cast<int>(total % 60);
      int h12 = h % 12 == 0 ? 12 : h % 12;
      char buf[32];
      std::snprintf(buf, sizeof buf, "%d:%02d %s", h12, m, h < 12 ? "AM" : "PM");
      return buf;
    }
    case Dimension::Number:
      return formatMagnitude(v.magnitude);
  }
  return formatMagnitude(v.magnitude);
}

bool compare(const TypedValue& lhs, Comparison op, const TypedValue& rhs) {
  if (lhs.dimension != rhs.dimension)
    throw Error(ErrorCode::DimensionMismatch,
                "cannot compare " + std::string(dimensionName(lhs.dimension)) +
                    " with " + std::string(dimensionName(rhs.dimension)));
  long long a = milli(lhs.magnitude), b = milli(rhs.magnitude);
  switch (op) {
    case Comparison::GT: return a > b;
    case Comparison::LT: return a < b;
    case Comparison::EQ: return a == b;
  }
  return false;
}

}  // namespace nlteach
