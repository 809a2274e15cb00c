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

// Exercises the shared library through its C header only.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "doctest.h"
#include "json.hpp"
#include "lsr/lsr.h"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

// Runs the CLI with stdout captured to a file; returns the exit code.
int run_cli(const std::string& args, std::string* stdout_text) {
  const fs::path out = fs::temp_directory_path() /
                       ("lsr_capi_" + std::to_string(std::random_device{}()) + ".out");
  const std::string cmd =
      std::string(LSR_CLI_PATH) + " " + args + " > " + out.string() + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  if (stdout_text) *stdout_text = read_file(out);
  fs::remove(out);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

struct Engine {
  lsr_engine* handle = nullptr;
  explicit Engine(const lsr_config& config) {
    REQUIRE(lsr_engine_create(&config, &handle) == LSR_OK);
  }
  ~Engine() { lsr_engine_destroy(handle); }
};

lsr_config mock_config(const std::string& rules) {
  lsr_config config;
  lsr_config_init(&config);
  config.mock_soft_rules = rules.c_str();
  return config;
}

const std::string kFixtures = LSR_FIXTURE_DIR;

TEST_CASE("batch scoring matches the CLI line for line") {
  const std::string rules = read_file(kFixtures + "/mock_rules.json");
  const lsr_config config = mock_config(rules);
  const Engine engine(config);

  std::vector<std::string> trees, responses, instructions;
  for (const std::string& line : lines_of(read_file(kFixtures + "/parity_rows.jsonl"))) {
    const json row = json::parse(line);
    trees.push_back(row["tree"].dump());
    responses.push_back(row["response"]);
    instructions.push_back(row["instruction"]);
  }
  REQUIRE(trees.size() == 20);
  std::vector<const char*> tree_ptrs, response_ptrs, instruction_ptrs;
  for (std::size_t i = 0; i < trees.size(); ++i) {
    tree_ptrs.push_back(trees[i].c_str());
    response_ptrs.push_back(responses[i].c_str());
    instruction_ptrs.push_back(instructions[i].c_str());
  }
  std::vector<double> rewards(trees.size());
  std::vector<char*> traces(trees.size(), nullptr);
  REQUIRE(lsr_score_batch(engine.handle, tree_ptrs.data(), response_ptrs.data(),
                          instruction_ptrs.data(), trees.size(), rewards.data(),
                          traces.data()) == LSR_OK);

  std::string cli_out;
  REQUIRE(run_cli("score --input " + kFixtures + "/parity_rows.jsonl --mock-soft-rules " +
                      kFixtures + "/mock_rules.json",
                  &cli_out) == 0);
  const std::vector<std::string> cli_lines = lines_of(cli_out);
  REQUIRE(cli_lines.size() == trees.size());
  for (std::size_t i = 0; i < trees.size(); ++i) {
    CAPTURE(i);
    CHECK(std::string(traces[i]) == cli_lines[i]);
    CHECK(json::parse(cli_lines[i])["root_reward"].get<double>() == rewards[i]);
    lsr_string_free(traces[i]);
  }

  SUBCASE("single-tree entry point agrees") {
    double reward = -1.0;
    char* trace = nullptr;
    REQUIRE(lsr_score_tree(engine.handle, tree_ptrs[8], response_ptrs[8], instruction_ptrs[8],
                           &reward, &trace) == LSR_OK);
    CHECK(std::fabs(reward - 0.6035533905932737) <= 1e-15);
    CHECK(std::string(trace) == cli_lines[8]);
    lsr_string_free(trace);
  }
}

TEST_CASE("group advantages match the CLI and a direct computation") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t group = 6, groups = 10;
  std::vector<double> rewards(group * groups);
  for (double& r : rewards) r = std::round(unit(rng) * 1e6) / 1e6;
  std::vector<double> adv(rewards.size());
  REQUIRE(lsr_group_advantages(rewards.data(), rewards.size(), group, 1e-6, adv.data()) == LSR_OK);

  for (std::size_t g = 0; g < groups; ++g) {
    double mean = 0.0, var = 0.0;
    for (std::size_t i = 0; i < group; ++i) mean += rewards[g * group + i];
    mean /= group;
    for (std::size_t i = 0; i < group; ++i) {
      var += (rewards[g * group + i] - mean) * (rewards[g * group + i] - mean);
    }
    const double sd = std::sqrt(var / group);
    for (std::size_t i = 0; i < group; ++i) {
      CHECK(std::fabs(adv[g * group + i] - (rewards[g * group + i] - mean) / (sd + 1e-6)) <= 1e-12);
    }
  }

  const fs::path input = fs::temp_directory_path() / "lsr_capi_adv.jsonl";
  {
    std::ofstream out(input);
    for (std::size_t i = 0; i < rewards.size(); ++i) {
      out << json{{"group", i / group}, {"reward", rewards[i]}}.dump() << "\n";
    }
  }
  std::string cli_out;
  REQUIRE(run_cli("advantages --input " + input.string() + " --eps 1e-6", &cli_out) == 0);
  fs::remove(input);
  const std::vector<std::string> cli_lines = lines_of(cli_out);
  REQUIRE(cli_lines.size() == groups);
  for (const std::string& line : cli_lines) {
    const json doc = json::parse(line);
    const std::size_t g = doc["group"];
    for (std::size_t i = 0; i < group; ++i) {
      CHECK(std::fabs(doc["advantages"][i].get<double>() - adv[g * group + i]) <= 1e-12);
    }
  }
}

TEST_CASE("verify") {
  lsr_config config;
  lsr_config_init(&config);
  const Engine engine(config);
  int verdict = -1;
  char* detail = nullptr;
  REQUIRE(lsr_verify(engine.handle, "no_commas", nullptr, "a, b", nullptr, &verdict, &detail) ==
          LSR_OK);
  CHECK(verdict == 0);
  lsr_string_free(detail);
  REQUIRE(lsr_verify(engine.handle, "number_bullets", R"({"N":2})", "* a\n* b", "", &verdict,
                     nullptr) == LSR_OK);
  CHECK(verdict == 1);
  CHECK(lsr_verify(engine.handle, "shouting", nullptr, "x", nullptr, &verdict, nullptr) ==
        LSR_UNKNOWN_KIND);
  CHECK(std::string(lsr_last_error()).find("shouting") != std::string::npos);
}

TEST_CASE("status codes and argument checks") {
  lsr_config config;
  lsr_config_init(&config);
  CHECK(config.gamma == 0.5);
  CHECK(config.jobs == 1);
  config.gamma = 1.5;
  lsr_engine* engine = nullptr;
  CHECK(lsr_engine_create(&config, &engine) == LSR_INVALID_ARGUMENT);
  CHECK(engine == nullptr);
  CHECK(lsr_engine_create(&config, nullptr) == LSR_INVALID_ARGUMENT);
  REQUIRE(lsr_engine_create(nullptr, &engine) == LSR_OK);
  lsr_engine_destroy(engine);
  CHECK(std::string(lsr_status_name(LSR_SCHEMA)) == "schema");
  CHECK(std::string(lsr_version()).size() > 0);

  lsr_config_init(&config);
  const Engine ok(config);
  double reward = 0.0;
  CHECK(lsr_score_tree(ok.handle, "{", "r", nullptr, &reward, nullptr) == LSR_SCHEMA);
  CHECK(lsr_score_tree(
            ok.handle,
            R"({"type":"leaf","id":"s","kind":"semantic","params":{"description":"be kind"}})", "r",
            nullptr, &reward, nullptr) == LSR_SCORING_UNAVAILABLE);
  const double one[] = {1.0};
  double out[1];
  CHECK(lsr_group_advantages(one, 1, 1, 1e-6, out) == LSR_INVALID_ARGUMENT);
  CHECK(lsr_group_advantages(one, 1, 0, 1e-6, out) == LSR_INVALID_ARGUMENT);
  CHECK(lsr_dataset_stats("/nonexistent/file.jsonl", "tsv", nullptr, nullptr) != LSR_OK);
}

}  // namespace
