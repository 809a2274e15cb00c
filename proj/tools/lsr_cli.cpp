// Copyright 2026 The lsreward Authors
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

// lsr: command-line front end over the C API.
//
// stdout carries data only; summaries, warnings and errors go to stderr.
// Exit status: 0 success, 1 data error, 2 usage error.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "lsr/lsr.h"

namespace {

using nlohmann::json;

constexpr int kExitData = 1;
constexpr int kExitUsage = 2;

struct EngineFlags {
  double gamma = 0.5;
  double trigger_threshold = 1.0;
  double eps = 1e-6;
  std::string soft_scorer_url;
  std::string mock_rules_path;
  std::size_t jobs = 1;
  bool strict = false;
};

struct Owned {
  char* p = nullptr;
  ~Owned() { lsr_string_free(p); }
  std::string str() const { return p ? std::string(p) : std::string(); }
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void check(lsr_status status, bool usage = false) {
  if (status == LSR_OK) return;
  std::string message = std::string(lsr_status_name(status)) + ": " + lsr_last_error();
  if (usage) throw UsageError(message);
  throw DataError(message);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

class Engine {
 public:
  explicit Engine(const EngineFlags& flags) {
    lsr_config config;
    lsr_config_init(&config);
    config.gamma = flags.gamma;
    config.trigger_threshold = flags.trigger_threshold;
    config.advantage_eps = flags.eps;
    config.jobs = flags.jobs;
    config.strict = flags.strict ? 1 : 0;
    if (!flags.mock_rules_path.empty()) rules_ = slurp(flags.mock_rules_path);
    config.mock_soft_rules = rules_.empty() ? nullptr : rules_.c_str();
    config.soft_scorer_url = flags.soft_scorer_url.empty() ? nullptr : flags.soft_scorer_url.c_str();
    check(lsr_engine_create(&config, &engine_), /*usage=*/true);
  }
  ~Engine() { lsr_engine_destroy(engine_); }
  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;
  const lsr_engine* get() const { return engine_; }

 private:
  std::string rules_;
  lsr_engine* engine_ = nullptr;
};

// Prints warnings and the summary line; returns the summary document.
json report_summary(const Owned& summary) {
  json doc = json::parse(summary.str(), nullptr, false);
  if (doc.is_discarded()) return json::object();
  if (doc.contains("warnings")) {
    for (const json& w : doc["warnings"]) std::cerr << "warning: " << w.get<std::string>() << '\n';
    doc.erase("warnings");
  }
  std::cerr << doc.dump() << '\n';
  return doc;
}

void add_engine_flags(CLI::App* cmd, EngineFlags& flags, bool scoring) {
  if (scoring) {
    cmd->add_option("--gamma", flags.gamma, "Sequential decay coefficient in [0, 1)")
        ->capture_default_str();
    cmd->add_option("--trigger-threshold", flags.trigger_threshold,
                    "Minimum trigger reward that selects the true branch")
        ->capture_default_str();
    cmd->add_option("--soft-scorer-url", flags.soft_scorer_url,
                    "Soft scorer endpoint (POST /score)")
        ->envname("SOFT_SCORER_URL");
    cmd->add_option("--mock-soft-rules", flags.mock_rules_path,
                    "JSON rule file for an offline keyword/regex soft scorer")
        ->check(CLI::ExistingFile);
  }
  cmd->add_option("--jobs", flags.jobs, "Worker threads")->capture_default_str()->check(
      CLI::PositiveNumber);
  cmd->add_flag("--strict", flags.strict, "Fail on the first malformed row instead of skipping");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Logic-structured constraint verification and reward engine"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(lsr_version()));

  EngineFlags flags;
  std::string input = "-";
  std::string output = "-";
  std::string format = "tsv";

  auto* verify = app.add_subcommand("verify", "Check one hard constraint or a fixture corpus");
  std::string kind, text, params, instruction;
  verify->add_option("--kind", kind, "Constraint kind, e.g. no_commas");
  verify->add_option("--text", text, "Response text to check");
  verify->add_option("--params", params, "Constraint parameters as a JSON object");
  verify->add_option("--instruction", instruction, "Instruction text (repeat_prompt)");
  verify->add_option("--input", input, "Fixture JSONL ({kind, params, response, expect})");
  verify->add_option("--output", output, "Output JSONL path")->capture_default_str();
  add_engine_flags(verify, flags, false);

  auto* score = app.add_subcommand("score", "Score {record, response} rows into traces");
  score->add_option("--input", input, "Input JSONL path or -")->capture_default_str();
  score->add_option("--output", output, "Output JSONL path or -")->capture_default_str();
  add_engine_flags(score, flags, true);

  auto* advantages = app.add_subcommand("advantages", "Group-relative advantages per group");
  advantages->add_option("--input", input, "Input JSONL of {group, reward}")->capture_default_str();
  advantages->add_option("--output", output, "Output JSONL path or -")->capture_default_str();
  advantages->add_option("--eps", flags.eps, "Denominator stabilizer")->capture_default_str();
  add_engine_flags(advantages, flags, false);

  auto* build = app.add_subcommand("build-dataset", "Compose instruction records from seeds");
  std::string mode = "template";
  std::uint64_t seed = 1;
  std::vector<std::string> structures;
  std::size_t per_seed = 1, width = 3, concurrency = 4;
  double soft_fraction = 0.0;
  build->add_option("--input", input, "Seed JSONL ({text, source})")->required();
  build->add_option("--output", output, "Dataset JSONL path or -")->capture_default_str();
  build->add_option("--mode", mode, "template or llm")
      ->check(CLI::IsMember({"template", "llm"}))
      ->capture_default_str();
  build->add_option("--seed", seed, "RNG seed for template mode")->capture_default_str();
  build->add_option("--structures", structures, "Structures to cycle through")
      ->check(CLI::IsMember({"parallel", "sequential", "conditional"}));
  build->add_option("--records-per-seed", per_seed, "Records per seed (template mode)")
      ->capture_default_str();
  build->add_option("--width", width, "Constraints per parallel/sequential record")
      ->capture_default_str();
  build->add_option("--soft-fraction", soft_fraction, "Probability that a slot is a soft type")
      ->capture_default_str();
  build->add_option("--jobs", concurrency, "Concurrent chat requests (llm mode)")
      ->capture_default_str();

  auto* stats = app.add_subcommand("stats", "Per-structure dataset table");
  stats->add_option("dataset", input, "Dataset JSONL path or -");
  stats->add_option("--input", input, "Dataset JSONL path or -");
  stats->add_option("--format", format, "tsv or json")
      ->check(CLI::IsMember({"tsv", "json"}))
      ->capture_default_str();
  stats->add_flag("--strict", flags.strict, "Fail when any line is malformed");

  auto* diag = app.add_subcommand("diag", "Parameter change and saliency diagnostics");
  std::string before, after;
  bool saliency = false;
  diag->add_option("--before", before, "Dump directory before training")->required();
  diag->add_option("--after", after, "Dump directory after training")->required();
  diag->add_flag("--saliency", saliency, "Compare token attribution dumps instead of weights");
  diag->add_option("--format", format, "tsv or json")
      ->check(CLI::IsMember({"tsv", "json"}))
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (verify->parsed()) {
      const bool corpus = verify->count("--input") > 0;
      if (corpus == (verify->count("--kind") > 0)) {
        throw UsageError("verify needs either --kind with --text, or --input");
      }
      if (!corpus) {
        if (verify->count("--text") == 0) throw UsageError("verify --kind needs --text");
        lsr_config config;
        lsr_config_init(&config);
        lsr_engine* engine = nullptr;
        check(lsr_engine_create(&config, &engine), true);
        int verdict = 0;
        Owned detail;
        const lsr_status status =
            lsr_verify(engine, kind.c_str(), params.empty() ? nullptr : params.c_str(),
                       text.c_str(), instruction.c_str(), &verdict, &detail.p);
        lsr_engine_destroy(engine);
        check(status);
        std::cout << json{{"kind", kind}, {"verdict", verdict}, {"detail", detail.str()}}.dump()
                  << '\n';
        return 0;
      }
      Engine engine(flags);
      Owned summary;
      check(lsr_verify_stream(engine.get(), input.c_str(), output.c_str(), &summary.p));
      const json doc = report_summary(summary);
      if (doc.value("failed", 0) > 0) {
        std::cerr << "error: " << doc["failed"] << " fixture(s) disagree with \"expect\"\n";
        return kExitData;
      }
      return 0;
    }
    if (score->parsed()) {
      Engine engine(flags);
      Owned summary;
      check(lsr_score_stream(engine.get(), input.c_str(), output.c_str(), &summary.p));
      report_summary(summary);
      return 0;
    }
    if (advantages->parsed()) {
      Engine engine(flags);
      Owned summary;
      check(lsr_advantages_stream(engine.get(), input.c_str(), output.c_str(), &summary.p));
      report_summary(summary);
      return 0;
    }
    if (build->parsed()) {
      json options = {{"mode", mode},
                      {"seed", seed},
                      {"records_per_seed", per_seed},
                      {"parallel_width", width},
                      {"soft_fraction", soft_fraction},
                      {"concurrency", concurrency}};
      if (!structures.empty()) options["structures"] = structures;
      Owned summary;
      const lsr_status status =
          lsr_build_dataset(input.c_str(), output.c_str(), options.dump().c_str(), &summary.p);
      check(status, status == LSR_INVALID_ARGUMENT);
      report_summary(summary);
      return 0;
    }
    if (stats->parsed()) {
      Owned table, summary;
      check(lsr_dataset_stats(input.c_str(), format.c_str(), &table.p, &summary.p));
      std::cout << table.str();
      const json doc = report_summary(summary);
      if (flags.strict && doc.value("malformed_lines", 0) > 0) return kExitData;
      return 0;
    }
    if (diag->parsed()) {
      Owned report;
      check(saliency ? lsr_saliency_report(before.c_str(), after.c_str(), format.c_str(), &report.p)
                     : lsr_change_report(before.c_str(), after.c_str(), format.c_str(), &report.p));
      std::cout << report.str();
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
