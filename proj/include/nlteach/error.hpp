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

#include <stdexcept>
#include <string>
#include <string_view>

namespace nlteach {

enum class ErrorCode {
  InvalidValue,
  MalformedExpression,
  TypeMismatch,
  PathNotAHole,
  UnresolvedHole,
  UnknownConcept,
  UnknownProcedure,
  DimensionMismatch,
  QueryFailed,
  NoParse,
  MalformedLexicon,
  MalformedDefinition,
  NoSuchObject,
  NotClickable,
  RecordingAlreadyActive,
  EmptyRecording,
  SelectorAmbiguous,
  UnknownBindingValue,
  ReplayBroken,
  InvalidEntry,
  DimensionConflict,
  UnknownName,
  CorruptStore,
  IllegalInputForPhase,
  NothingToUndo,
  BadFixture,
  UnknownSession,
  UnknownScript,
  TranscriptMismatch,
  MalformedTranscript,
  Io,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidValue: return "InvalidValue";
    case ErrorCode::MalformedExpression: return "MalformedExpression";
    case ErrorCode::TypeMismatch: return "TypeMismatch";
    case ErrorCode::PathNotAHole: return "PathNotAHole";
    case ErrorCode::UnresolvedHole: return "UnresolvedHole";
    case ErrorCode::UnknownConcept: return "UnknownConcept";
    case ErrorCode::UnknownProcedure: return "UnknownProcedure";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::QueryFailed: return "QueryFailed";
    case ErrorCode::NoParse: return "NoParse";
    case ErrorCode::MalformedLexicon: return "MalformedLexicon";
    case ErrorCode::MalformedDefinition: return "MalformedDefinition";
    case ErrorCode::NoSuchObject: return "NoSuchObject";
    case ErrorCode::NotClickable: return "NotClickable";
    case ErrorCode::RecordingAlreadyActive: return "RecordingAlreadyActive";
    case ErrorCode::EmptyRecording: return "EmptyRecording";
    case ErrorCode::SelectorAmbiguous: return "SelectorAmbiguous";
    case ErrorCode::UnknownBindingValue: return "UnknownBindingValue";
    case ErrorCode::ReplayBroken: return "ReplayBroken";
    case ErrorCode::InvalidEntry: return "InvalidEntry";
    case ErrorCode::DimensionConflict: return "DimensionConflict";
    case ErrorCode::UnknownName: return "UnknownName";
    case ErrorCode::CorruptStore: return "CorruptStore";
    case ErrorCode::IllegalInputForPhase: return "IllegalInputForPhase";
    case ErrorCode::NothingToUndo: return "NothingToUndo";
    case ErrorCode::BadFixture: return "BadFixture";
    case ErrorCode::UnknownSession: return "UnknownSession";
    case ErrorCode::UnknownScript: return "UnknownScript";
    case ErrorCode::TranscriptMismatch: return "TranscriptMismatch";
    case ErrorCode::MalformedTranscript: return "MalformedTranscript";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

// Every failure the engine reports carries one of the codes above; the
// message is for humans only.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace nlteach
