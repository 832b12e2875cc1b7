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

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "nlteach/demo.hpp"
#include "nlteach/dsl.hpp"
#include "nlteach/screen.hpp"
#include "nlteach/value.hpp"

namespace nlteach::kb {

struct ProcedureEntry {
  std::string name;
  std::vector<std::string> triggerUtterances;
  demo::RecordedScript script;  // its triggers mirror the entry's
  friend bool operator==(const ProcedureEntry&, const ProcedureEntry&) = default;
};

struct BooleanVariant {
  std::string context;
  dsl::Expr expr;
  long storedAt = 0;
};
bool operator==(const BooleanVariant& a, const BooleanVariant& b);

struct BooleanConceptEntry {
  std::string name;
  std::vector<std::string> triggerUtterances;
  std::vector<BooleanVariant> variants;
  friend bool operator==(const BooleanConceptEntry&, const BooleanConceptEntry&) = default;
};

using ValueSource = std::variant<demo::ValueQuery, TypedValue>;

struct ValueVariant {
  std::string context;
  ValueSource source;
  long storedAt = 0;
  Dimension dimension() const;
  friend bool operator==(const ValueVariant&, const ValueVariant&) = default;
};

struct ValueConceptEntry {
  std::string name;
  std::vector<std::string> triggerUtterances;
  std::vector<ValueVariant> variants;
  std::optional<Dimension> dimension() const;
  friend bool operator==(const ValueConceptEntry&, const ValueConceptEntry&) = default;
};

// A taught top-level command, runnable by name.
struct RuleEntry {
  std::string name;
  std::string utterance;
  std::string context;
  dsl::Expr script;
};
bool operator==(const RuleEntry& a, const RuleEntry& b);

using Entry = std::variant<ProcedureEntry, BooleanConceptEntry, ValueConceptEntry, RuleEntry>;

enum class EntryKind { Procedure, BooleanConcept, ValueConcept, Rule };
std::string_view entryKindName(EntryKind k);

struct EntryRef {
  EntryKind kind;
  std::string name;
  std::size_t matchedTokens = 0;
  friend bool operator==(const EntryRef&, const EntryRef&) = default;
};

template <typename V>
struct Resolution {
  V variant;
  bool reuseDecisionNeeded = false;
};

class KnowledgeBase {
 public:
  // Upsert by name. Concept variants are merged by context (same context
  // replaces, new context appends) and triggers are unioned; procedures and
  // rules are replaced. Throws InvalidEntry or DimensionConflict.
  void store(Entry entry);

  const ProcedureEntry* procedure(std::string_view name) const;
  const BooleanConceptEntry* booleanConcept(std::string_view name) const;
  const ValueConceptEntry* valueConcept(std::string_view name) const;
  const RuleEntry* rule(std::string_view name) const;

  const std::map<std::string, ProcedureEntry, std::less<>>& procedures() const { return procedures_; }
  const std::map<std::string, BooleanConceptEntry, std::less<>>& booleanConcepts() const {
    return booleanConcepts_;
  }
  const std::map<std::string, ValueConceptEntry, std::less<>>& valueConcepts() const {
    return valueConcepts_;
  }
  const std::map<std::string, RuleEntry, std::less<>>& rules() const { return rules_; }

  // Entries with a name or trigger occurring in `phrase`, longest match first.
  std::vector<EntryRef> lookupByUtterance(std::string_view phrase) const;

  // Exact context, else the most recently stored variant with the reuse
  // flag set. Throws UnknownName.
  Resolution<BooleanVariant> resolveBoolean(std::string_view name, std::string_view context) const;
  Resolution<ValueVariant> resolveValue(std::string_view name, std::string_view context) const;

  long revision() const { return revision_; }
  std::size_t size() const;

  friend bool operator==(const KnowledgeBase&, const KnowledgeBase&) = default;

 private:
  friend KnowledgeBase deserialize(std::string_view);
  std::map<std::string, ProcedureEntry, std::less<>> procedures_;
  std::map<std::string, BooleanConceptEntry, std::less<>> booleanConcepts_;
  std::map<std::string, ValueConceptEntry, std::less<>> valueConcepts_;
  std::map<std::string, RuleEntry, std::less<>> rules_;
  long revision_ = 0;
};

bool sameContext(std::string_view a, std::string_view b);

// Canonical JSON: keys and entries sorted, identical KBs give identical bytes.
std::string serialize(const KnowledgeBase& kb);
KnowledgeBase deserialize(std::string_view content);  // throws CorruptStore
void persist(const KnowledgeBase& kb, const std::string& path);
KnowledgeBase load(const std::string& path);

// Evaluates scripts against the KB and a world.
class KnowledgeRuntime : public dsl::Runtime {
 public:
  KnowledgeRuntime(const KnowledgeBase& kb, screen::World& world) : kb_(kb), world_(world) {}
  dsl::Expr booleanConcept(const std::string& name, const std::string& context) override;
  TypedValue readValue(const std::string& name, const std::string& context) override;
  std::vector<std::string> runProcedure(const dsl::ProcedureCall& call) override;

 private:
  const KnowledgeBase& kb_;
  screen::World& world_;
};

}  // namespace nlteach::kb
