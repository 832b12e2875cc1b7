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

// Command-line front end: interactive teaching, transcript replay, script
// runs and the NDJSON endpoint used by the companion UI.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nlteach/dialog.hpp"
#include "nlteach/error.hpp"
#include "nlteach/gateway.hpp"
#include "nlteach/kb.hpp"
#include "nlteach/parser.hpp"
#include "nlteach/text.hpp"

using namespace nlteach;

namespace {

void printMessages(const std::vector<gateway::Message>& msgs) {
  for (const auto& m : msgs) {
    const auto& p = m.payload;
    if (m.kind == "agentText") {
      std::cout << "agent> " << p["text"].get<std::string>() << "  [" << p["templateId"].get<std::string>() << "]\n";
      std::size_t i = 0;
      for (const auto& o : p["options"]) std::cout << "   " << i++ << ") " << o.get<std::string>() << "\n";
    } else if (m.kind == "demonstrationMode") {
      std::cout << "   (demonstrate with :demo <actions>, e.g. :demo launch(Weather); longpress(current_temp))\n";
    } else if (m.kind == "highlight" && !p["objectIds"].empty()) {
      std::cout << "   highlighted: " << p["objectIds"].dump() << "\n";
    } else if (m.kind == "error") {
      std::cout << "error> " << p["message"].get<std::string>() << "\n";
    }
  }
}

int repl(gateway::SessionManager& mgr, const std::string& id, const std::string& savePath) {
  std::string line;
  std::cout << "> " << std::flush;
  while (std::getline(std::cin, line)) {
    line = text::trim(line);
    try {
      if (line == ":quit" || line == ":q") break;
      if (line.empty()) {
      } else if (line.rfind(":demo", 0) == 0) {
        printMessages(mgr.sendTurn(id, dialog::input::Demonstration{screen::parseActionList(line.substr(5))}));
      } else if (line.rfind(":option", 0) == 0) {
        printMessages(mgr.sendTurn(id, dialog::input::Option{std::stoul(line.substr(7))}));
      } else if (line == ":undo") {
        printMessages(mgr.sendTurn(id, dialog::input::Undo{}));
      } else if (line.rfind(":run", 0) == 0) {
        std::string name = text::trim(line.substr(4));
        if (name.empty()) name = mgr.withSession(id, [](const dialog::Session& s) { return s.state().lastRule; });
        std::cout << mgr.runScript(id, name, {}).render() << "\n";
      } else if (line == ":kb") {
        std::cout << mgr.withSession(id, [](const dialog::Session& s) { return kb::serialize(s.knowledge()); });
      } else {
        printMessages(mgr.sendTurn(id, dialog::input::Text{line}));
      }
    } catch (const std::exception& e) {
      std::cout << "error> " << e.what() << "\n";
    }
    std::cout << "> " << std::flush;
  }
  if (!savePath.empty())
    mgr.withSession(id, [&](const dialog::Session& s) {
      kb::persist(s.knowledge(), savePath);
      return 0;
    });
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Teach a phone agent new tasks in natural language"};
  std::string kbPath, appDir, savePath, runName, parseText;
  std::vector<std::string> envArgs, transcripts;
  bool serveMode = false;
  app.add_option("--kb", kbPath, "Knowledge base to start from");
  app.add_option("--apps", appDir, "Directory of app definitions")->check(CLI::ExistingDirectory);
  app.add_option("--env", envArgs, "Screen variable, key=value (repeatable)");
  app.add_option("--save-kb", savePath, "Write the knowledge base here when done");
  app.add_option("--transcript", transcripts, "Replay transcript files and check them");
  app.add_option("--run", runName, "Run a stored script and print its trace");
  app.add_option("--parse", parseText, "Print the parse candidates for a command");
  app.add_flag("--serve", serveMode, "Speak NDJSON on stdin/stdout");
  CLI11_PARSE(app, argc, argv);

  try {
    gateway::Env env;
    for (const auto& kv : envArgs) env.insert(gateway::parseEnvAssignment(kv));

    if (!parseText.empty()) {
      kb::KnowledgeBase knowledge = kbPath.empty() ? kb::KnowledgeBase{} : kb::load(kbPath);
      for (const auto& c : parser::parseCommand(parseText, dialog::lexiconFor(knowledge)))
        std::cout << c.score << "\t" << c.canonical << "\n";
      return 0;
    }
    if (serveMode) {
      gateway::SessionManager mgr;
      gateway::serve(std::cin, std::cout, mgr);
      return 0;
    }
    if (!transcripts.empty()) {
      int failures = 0;
      for (const auto& t : transcripts) {
        gateway::TranscriptOptions opts{kbPath, appDir, env, {}};
        auto rep = gateway::replayTranscriptFile(t, opts);
        std::cout << (rep.passed ? "PASS " : "FAIL ") << t << (rep.passed ? "" : ": " + rep.message) << "\n";
        if (!rep.passed) ++failures;
        if (!savePath.empty() && !rep.finalKb.empty()) kb::persist(kb::deserialize(rep.finalKb), savePath);
      }
      return failures == 0 ? 0 : 1;
    }
    gateway::SessionManager mgr;
    std::vector<gateway::Message> greeting;
    auto id = mgr.createSession(kbPath, appDir, env, &greeting);
    if (!runName.empty()) {
      auto trace = mgr.runScript(id, runName, {});
      std::cout << trace.render() << "\n";
      return 0;
    }
    printMessages(greeting);
    return repl(mgr, id, savePath);
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
}
