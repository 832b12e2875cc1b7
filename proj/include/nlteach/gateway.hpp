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

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "nlteach/dialog.hpp"
#include "nlteach/dsl.hpp"

namespace nlteach::gateway {

using Env = std::map<std::string, std::string>;

// Outgoing kinds: userText, agentText, screenUpdate, highlight, optionPrompt,
// demonstrationMode, confirmation, error, scriptResult.
struct Message {
  std::uint64_t seq = 0;
  std::string sessionId;
  std::string kind;
  nlohmann::json payload;

  nlohmann::json toJson() const;
  static Message fromJson(const nlohmann::json& j);
};

// "key=value" -> {key, value}. Throws InvalidValue.
std::pair<std::string, std::string> parseEnvAssignment(std::string_view kv);

std::string defaultAppDir();

class SessionManager {
 public:
  // Empty `kbPath` starts from an empty knowledge base. Throws BadFixture.
  std::string createSession(const std::string& kbPath, const std::string& appDir, const Env& env,
                            std::vector<Message>* greeting = nullptr);
  // Throws UnknownSession; dialog errors come back as error messages.
  std::vector<Message> sendTurn(const std::string& sessionId, const dialog::Input& input);
  // One action of a live demonstration, shown on a preview of the phone.
  std::vector<Message> demoAction(const std::string& sessionId, const screen::Action& action);
  // Submits the actions collected by demoAction as one demonstration.
  std::vector<Message> demoDone(const std::string& sessionId);
  // Evaluates a stored rule with `env` layered over the session's variables.
  // Throws UnknownSession or UnknownScript.
  dsl::ExecutionTrace runScript(const std::string& sessionId, const std::string& scriptName, const Env& env);

  // Read access for tests and tools. The callback runs under the session lock.
  template <typename F>
  auto withSession(const std::string& sessionId, F&& f) {
    auto s = find(sessionId);
    std::lock_guard lock(s->mutex);
    return f(s->session);
  }

  // One NDJSON request in, its responses out.
  std::vector<Message> handleRequest(const nlohmann::json& request);

 private:
  struct Live {
    std::mutex mutex;
    dialog::Session session;
    screen::World preview;
    std::vector<screen::Action> pendingDemo;
    std::uint64_t seq = 0;
    Live(kb::KnowledgeBase k, screen::World w) : session(std::move(k), w), preview(std::move(w)) {}
  };
  std::shared_ptr<Live> find(const std::string& sessionId);
  std::vector<Message> render(Live& s, const std::string& id, const dialog::TurnResult& r);
  Message make(Live& s, const std::string& id, std::string kind, nlohmann::json payload);

  std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Live>> sessions_;
  std::uint64_t nextId_ = 1;
};

nlohmann::json screenPayload(const screen::UiSnapshotGraph& g);
nlohmann::json tracePayload(const std::string& name, const dsl::ExecutionTrace& t);

// Reads one JSON request per line until EOF, writes one message per line.
void serve(std::istream& in, std::ostream& out, SessionManager& manager);

struct TranscriptOptions {
  std::string kbPath;   // overridden by KB: lines
  std::string appDir;   // overridden by APPS: lines
  Env env;              // extended by ENV: lines
  std::string baseDir;  // for relative KB:/APPS: paths
};

struct TranscriptReport {
  bool passed = true;
  std::size_t failedLine = 0;
  std::string message;
  std::vector<std::string> log;    // what happened, line by line
  std::vector<std::string> moves;  // template ids of every agent move, in order
  std::string finalKb;             // serialized knowledge base at the end
};

// Throws MalformedTranscript for unreadable lines; mismatches are reported.
TranscriptReport replayTranscript(std::string_view content, const TranscriptOptions& options);
TranscriptReport replayTranscriptFile(const std::string& path, TranscriptOptions options = {});

}  // namespace nlteach::gateway
