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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "lsr/diagnostics.hpp"
#include "support/errors.hpp"
#include "support/oracles.hpp"

namespace lsr::diag {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using testing::code_of;
using testing::message_of;

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() /
           ("lsr_diag_" + tag + "_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

Matrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> v(rows * cols);
  for (double& x : v) x = normal(rng);
  return Matrix(rows, cols, std::move(v));
}

Matrix scaled(const Matrix& m, double factor) {
  Matrix out = m;
  for (double& x : out.values) x *= factor;
  return out;
}

std::vector<std::vector<double>> nested(const Matrix& m) {
  std::vector<std::vector<double>> out(m.rows, std::vector<double>(m.cols));
  for (std::size_t r = 0; r < m.rows; ++r) {
    for (std::size_t c = 0; c < m.cols; ++c) out[r][c] = m(r, c);
  }
  return out;
}

TEST_CASE("change rate") {
  const Matrix identity(2, 2, {1, 0, 0, 1});
  CHECK(param_change_rate(identity, identity) == 0.0);
  CHECK(std::fabs(param_change_rate(identity, Matrix(2, 2, {2, 0, 0, 2})) - 100.0) <= 1e-12);
  CHECK(frobenius_norm(Matrix(1, 2, {3, 4})) == 5.0);

  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix before = random_matrix(8, 8, rng);
    const Matrix after = random_matrix(8, 8, rng);
    CHECK(std::fabs(param_change_rate(before, after) -
                    testing::naive_frobenius_rate(nested(before), nested(after))) <= 1e-10);
    // scaling both snapshots leaves the rate unchanged
    const double k = 0.001 + trial * 3.7;
    CHECK(std::fabs(param_change_rate(scaled(before, k), scaled(after, k)) -
                    param_change_rate(before, after)) <= 1e-9);
  }
}

TEST_CASE("change rate errors") {
  CHECK(code_of([] { Matrix(2, 2, {1, 2, 3}); }) == ErrorCode::kDimensionMismatch);
  CHECK(code_of([] { param_change_rate(Matrix(1, 2, {1, 1}), Matrix(2, 1, {1, 1})); }) ==
        ErrorCode::kDimensionMismatch);
  CHECK(code_of([] { param_change_rate(Matrix(1, 2, {0, 0}), Matrix(1, 2, {1, 1})); }) ==
        ErrorCode::kInvalidArgument);
  // huge entries must not overflow the norm
  const Matrix big(1, 2, {1e200, 1e200});
  CHECK(std::isfinite(frobenius_norm(big)));
  CHECK(std::fabs(param_change_rate(big, scaled(big, 1.5)) - 50.0) <= 1e-9);
}

TEST_CASE("module names") {
  const auto check = [](const char* name, std::optional<int> layer, ModuleKind kind) {
    CAPTURE(name);
    const ModuleName parsed = parse_module_name(name);
    CHECK(parsed.layer == layer);
    CHECK(parsed.kind == kind);
  };
  check("model.layers.3.self_attn.q_proj.weight", 3, ModuleKind::kAttnQ);
  check("model.layers.12.mlp.down_proj.weight", 12, ModuleKind::kMlpDown);
  check("transformer.h.0.attn.k", 0, ModuleKind::kAttnK);
  check("layers.7.attention.wo.weight", 7, ModuleKind::kAttnO);
  check("blocks.2.ffn.gate", 2, ModuleKind::kMlpGate);
  check("model.embed_tokens.weight", std::nullopt, ModuleKind::kOther);
  check("lm_head.weight", std::nullopt, ModuleKind::kOther);
  CHECK(to_string(ModuleKind::kMlpUp) == "mlp.up");
}

WeightSnapshot locality_snapshot(std::mt19937_64& rng) {
  WeightSnapshot snap;
  snap.model_id = "tiny";
  for (int layer = 0; layer < 2; ++layer) {
    const std::string prefix = "model.layers." + std::to_string(layer) + ".";
    for (const char* m : {"self_attn.q_proj", "self_attn.k_proj", "self_attn.v_proj",
                          "self_attn.o_proj"}) {
      snap.entries[prefix + m + ".weight"] = random_matrix(4, 4, rng);
    }
    for (const char* m : {"mlp.up_proj", "mlp.down_proj", "mlp.gate_proj"}) {
      snap.entries[prefix + m + ".weight"] = random_matrix(4, 6, rng);
    }
  }
  return snap;
}

TEST_CASE("change report over a synthetic snapshot pair") {
  std::mt19937_64 rng(21);
  const WeightSnapshot before = locality_snapshot(rng);
  WeightSnapshot after = before;
  // after = (1 + s) * before gives a rate of exactly |s| * 100
  for (auto& [name, m] : after.entries) {
    const ModuleName parsed = parse_module_name(name);
    double s = 0.02;
    if (parsed.kind == ModuleKind::kAttnQ || parsed.kind == ModuleKind::kAttnK) s = 0.20;
    if (parsed.layer == 1 && parsed.kind == ModuleKind::kMlpUp) s = 0.30;
    m = scaled(m, 1.0 + s);
  }
  const ChangeReport report = change_report(before, after);
  REQUIRE(report.rows.size() == 14);
  CHECK(report.rows.front().module == "model.layers.0.mlp.down_proj.weight");
  CHECK(std::fabs(report.rows.front().percent - 2.0) <= 1e-9);
  REQUIRE(report.layers.size() == 2);
  CHECK(report.layers[0].attention_exceeds_mlp == true);
  CHECK(report.layers[1].attention_exceeds_mlp == false);
  CHECK(std::fabs(report.mean_by_kind.at(ModuleKind::kAttnQ) - 20.0) <= 1e-9);
  CHECK(std::fabs(report.mean_by_kind.at(ModuleKind::kMlpUp) - 16.0) <= 1e-9);

  const std::string tsv = format_change_tsv(report);
  CHECK(tsv.rfind("module\tlayer\tkind\tpercent\n", 0) == 0);
  CHECK(tsv.find("model.layers.1.self_attn.k_proj.weight\t1\tattn.k\t") != std::string::npos);
  const json doc = json::parse(format_change_json(report));
  CHECK(doc["modules"].size() == 14);
  CHECK(doc.contains("layers"));

  SUBCASE("on-disk round trip") {
    TempDir a("before"), b("after");
    save_snapshot(before, a.path);
    save_snapshot(after, b.path);
    const WeightSnapshot loaded = load_snapshot(a.path);
    CHECK(loaded.model_id == "tiny");
    REQUIRE(loaded.entries.size() == before.entries.size());
    for (const auto& [name, m] : before.entries) {
      const Matrix& back = loaded.entries.at(name);
      REQUIRE(back.rows == m.rows);
      REQUIRE(back.cols == m.cols);
      for (std::size_t i = 0; i < m.values.size(); ++i) {
        CHECK(back.values[i] == static_cast<double>(static_cast<float>(m.values[i])));
      }
    }
    const ChangeReport disk = change_report(loaded, load_snapshot(b.path));
    CHECK(disk.layers[0].attention_exceeds_mlp == true);
    CHECK(std::fabs(disk.rows.front().percent - 2.0) <= 1e-4);
  }
}

TEST_CASE("snapshot mismatches are reported exhaustively") {
  std::mt19937_64 rng(2);
  WeightSnapshot before = locality_snapshot(rng);
  WeightSnapshot after = before;
  after.entries.erase("model.layers.0.mlp.up_proj.weight");
  after.entries.erase("model.layers.1.mlp.up_proj.weight");
  after.entries["extra.weight"] = Matrix(1, 1, {1});
  const std::string msg = message_of([&] { change_report(before, after); });
  CHECK(code_of([&] { change_report(before, after); }) == ErrorCode::kSchema);
  CHECK(msg.find("model.layers.0.mlp.up_proj.weight") != std::string::npos);
  CHECK(msg.find("model.layers.1.mlp.up_proj.weight") != std::string::npos);
  CHECK(msg.find("extra.weight") != std::string::npos);

  WeightSnapshot reshaped = before;
  reshaped.entries["model.layers.0.mlp.up_proj.weight"] = Matrix(2, 2, {1, 2, 3, 4});
  CHECK(code_of([&] { change_report(before, reshaped); }) == ErrorCode::kDimensionMismatch);

  TempDir empty("empty");
  CHECK(code_of([&] { load_snapshot(empty.path); }) == ErrorCode::kIo);
}

TEST_CASE("saliency") {
  TokenAttribution a{{"x", "y"}, {{1, 2}, {0.5, 0}}, {{3, -4}, {2, 7}}};
  CHECK(saliency(a) == std::vector<double>{5.0, 1.0});

  // S_i = |g_i . e_i|, computed by hand for both snapshots
  const TokenAttribution before{{"The", "cat", "sat", "on", "mats"},
                                {{1, 0}, {0, 1}, {1, 1}, {2, 0}, {0, 0}},
                                {{1, 1}, {1, 1}, {1, -1}, {1, 0}, {5, 5}}};
  const TokenAttribution after{{"The", "cat", "sat", "on", "mats"},
                               {{1, 0}, {0, 3}, {1, 1}, {1, 0}, {1, 0}},
                               {{1, 1}, {1, 1}, {2, 2}, {1, 0}, {-1, 0}}};
  // before: 1, 1, 0, 2, 0   after: 1, 3, 4, 1, 1   delta: 0, 2, 4, -1, 1
  const auto changes = saliency_delta(before, after);
  REQUIRE(changes.size() == 5);
  const std::vector<std::string> order = {"sat", "cat", "mats", "The", "on"};
  for (std::size_t i = 0; i < 5; ++i) CHECK(changes[i].token == order[i]);
  CHECK(changes[0].delta == 4.0);
  CHECK(changes[0].index == 2);
  CHECK(changes[4].delta == -1.0);
  CHECK(changes[4].before == 2.0);

  SUBCASE("ties keep token order") {
    const TokenAttribution flat{{"a", "b", "c"}, {{1}, {1}, {1}}, {{1}, {1}, {1}}};
    const auto ties = saliency_delta(flat, flat);
    CHECK(ties[0].token == "a");
    CHECK(ties[2].token == "c");
  }
  SUBCASE("errors") {
    TokenAttribution ragged = before;
    ragged.grads[1].push_back(1.0);
    CHECK(code_of([&] { ragged.validate(); }) == ErrorCode::kDimensionMismatch);
    TokenAttribution renamed = after;
    renamed.tokens[0] = "A";
    CHECK(code_of([&] { saliency_delta(before, renamed); }) == ErrorCode::kInvalidArgument);
  }
  SUBCASE("on-disk round trip and formatting") {
    TempDir dir("attr");
    save_attribution(before, dir.path);
    const TokenAttribution loaded = load_attribution(dir.path);
    CHECK(loaded.tokens == before.tokens);
    CHECK(loaded.grads == before.grads);
    CHECK(loaded.embeds == before.embeds);
    const std::string tsv = format_saliency_tsv(changes);
    CHECK(tsv.find("\tsat\t") != std::string::npos);
    const json doc = json::parse(format_saliency_json(changes));
    REQUIRE(doc.is_array());
    CHECK(doc[0]["token"] == "sat");
  }
}

}  // namespace
}  // namespace lsr::diag
