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

// Training diagnostics over externally produced tensor dumps.
//
// A dump is a directory holding
//   manifest.json  {"model_id": str, "dtype": "float32",
//                   "tensors": [{"name": str, "shape": [d0, d1, ...],
//                                "offset": bytes (optional)}, ...]}
//   tensors.bin    little-endian float32 values, row-major per tensor.
// Tensors without an explicit offset are packed back to back in manifest
// order. The first dimension becomes the row count; the remaining ones are
// flattened into columns.
//
// Attribution dumps use the same container with a "tokens" array in the
// manifest and two [T, D] tensors named "grads" and "embeds".

#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lsr/error.hpp"

namespace lsr::diag {

struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;  // row-major, rows * cols

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, std::vector<double> v);  // throws on size mismatch

  double operator()(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  bool operator==(const Matrix&) const = default;
};

double frobenius_norm(const Matrix& m);

// 100 * ||after - before||_F / ||before||_F. Throws kDimensionMismatch for
// unequal shapes and kInvalidArgument for a zero-norm baseline.
double param_change_rate(const Matrix& before, const Matrix& after);

struct WeightSnapshot {
  std::string model_id;
  std::map<std::string, Matrix> entries;
};

// Throws Error(kIo) for unreadable files and Error(kSchema) for manifest
// problems or a blob too short for the declared shapes.
WeightSnapshot load_snapshot(const std::filesystem::path& dir);
void save_snapshot(const WeightSnapshot& snapshot, const std::filesystem::path& dir);

enum class ModuleKind { kAttnQ, kAttnK, kAttnV, kAttnO, kMlpUp, kMlpDown, kMlpGate, kOther };

std::string_view to_string(ModuleKind kind);  // "attn.q", ..., "other"

struct ModuleName {
  std::optional<int> layer;
  ModuleKind kind = ModuleKind::kOther;
};

// Understands the usual checkpoint spellings:
//   model.layers.3.self_attn.q_proj.weight -> layer 3, attn.q
//   h.0.mlp.down_proj                      -> layer 0, mlp.down
//   layers.1.attn.k                        -> layer 1, attn.k
ModuleName parse_module_name(std::string_view name);

struct ChangeRow {
  std::string module;
  ModuleName parsed;
  double percent = 0.0;
};

struct LayerSummary {
  int layer = 0;
  std::map<ModuleKind, double> mean_by_kind;
  // min(attn.q, attn.k) > max(mlp.up, mlp.down); empty if any is missing.
  std::optional<bool> attention_exceeds_mlp;
};

struct ChangeReport {
  std::vector<ChangeRow> rows;  // module-name order
  std::map<ModuleKind, double> mean_by_kind;
  std::vector<LayerSummary> layers;  // ascending layer index
};

// Throws Error(kSchema) listing every module present in only one snapshot,
// and Error(kDimensionMismatch) naming every shape disagreement.
ChangeReport change_report(const WeightSnapshot& before, const WeightSnapshot& after);

std::string format_change_tsv(const ChangeReport& report);
std::string format_change_json(const ChangeReport& report);

struct TokenAttribution {
  std::vector<std::string> tokens;
  std::vector<std::vector<double>> grads;   // dL/dE_i per token
  std::vector<std::vector<double>> embeds;  // E_i per token

  // Throws Error(kDimensionMismatch) unless |tokens| = |grads| = |embeds| and
  // every vector shares one length.
  void validate() const;
};

TokenAttribution load_attribution(const std::filesystem::path& dir);
void save_attribution(const TokenAttribution& attribution, const std::filesystem::path& dir);

// S_i = |<grads_i, embeds_i>|.
std::vector<double> saliency(const TokenAttribution& attribution);

struct SaliencyChange {
  std::size_t index = 0;
  std::string token;
  double before = 0.0;
  double after = 0.0;
  double delta = 0.0;
};

// Ranked by delta, largest increase first; ties keep token order. Throws
// Error(kInvalidArgument) when the token lists differ.
std::vector<SaliencyChange> saliency_delta(const TokenAttribution& before,
                                           const TokenAttribution& after);

std::string format_saliency_tsv(const std::vector<SaliencyChange>& changes);
std::string format_saliency_json(const std::vector<SaliencyChange>& changes);

}  // namespace lsr::diag
