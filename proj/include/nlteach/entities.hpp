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
#include <string>
#include <string_view>
#include <vector>

#include "nlteach/value.hpp"

namespace nlteach::entities {

struct CharSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
  friend bool operator==(const CharSpan&, const CharSpan&) = default;
};

struct EntityMatch {
  std::string sourceText;
  TypedValue value;
  CharSpan span;  // byte offsets into sourceText
  // Upper end of a range such as "25–40 min"; `value` holds the lower end.
  std::optional<TypedValue> rangeEnd;
  // "32 degrees" carries no scale; Fahrenheit was assumed.
  bool unitAssumed = false;

  std::string_view text() const {
    return std::string_view(sourceText).substr(span.begin, span.end - span.begin);
  }
  friend bool operator==(const EntityMatch&, const EntityMatch&) = default;
};

// Temperatures, durations, money, times of day and bare numbers, found
// leftmost-longest without overlap and returned in order of start offset.
std::vector<EntityMatch> extractEntities(std::string_view text);

inline bool comparableWith(const TypedValue& candidate, const TypedValue& target) {
  return candidate.dimension == target.dimension;
}

}  // namespace nlteach::entities
