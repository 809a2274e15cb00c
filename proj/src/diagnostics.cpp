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

#include "lsr/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numeric>
#include <sstream>

#include "json.hpp"

namespace lsr::diag {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "short write to " + path.string());
}

float decode_f32(const unsigned char* p) {
  const std::uint32_t bits = std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) |
                             (std::uint32_t{p[2]} << 16) | (std::uint32_t{p[3]} << 24);
  float value;
  std::memcpy(&value, &bits, sizeof value);
  return value;
}

void encode_f32(float value, std::string& out) {
  std::uint32_t bits;
  std::memcpy(&bits, &value, sizeof bits);
  for (int shift = 0; shift < 32; shift += 8) out.push_back(static_cast<char>((bits >> shift) & 0xff));
}

struct RawTensor {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;
};

struct Container {
  json manifest;
  std::vector<RawTensor> tensors;
};

Container load_container(const fs::path& dir) {
  const fs::path manifest_path = dir / "manifest.json";
  Container c;
  c.manifest = json::parse(read_file(manifest_path), nullptr, false);
  const std::string where = manifest_path.string();
  if (c.manifest.is_discarded() || !c.manifest.is_object()) {
    throw Error(ErrorCode::kSchema, where + ": not a JSON object");
  }
  if (c.manifest.contains("dtype") && c.manifest["dtype"] != "float32") {
    throw Error(ErrorCode::kSchema, where + ": only dtype \"float32\" is supported");
  }
  if (!c.manifest.contains("tensors") || !c.manifest["tensors"].is_array()) {
    throw Error(ErrorCode::kSchema, where + ": missing \"tensors\" array");
  }
  const std::string blob = read_file(dir / "tensors.bin");
  const auto* bytes = reinterpret_cast<const unsigned char*>(blob.data());
  std::size_t cursor = 0;
  for (const json& entry : c.manifest["tensors"]) {
    if (!entry.is_object() || !entry.contains("name") || !entry["name"].is_string() ||
        !entry.contains("shape") || !entry["shape"].is_array() || entry["shape"].empty()) {
      throw Error(ErrorCode::kSchema, where + ": each tensor needs a name and a non-empty shape");
    }
    RawTensor t;
    t.name = entry["name"].get<std::string>();
    std::size_t count = 1;
    for (std::size_t i = 0; i < entry["shape"].size(); ++i) {
      const json& dim = entry["shape"][i];
      if (!dim.is_number_unsigned() || dim.get<std::size_t>() == 0) {
        throw Error(ErrorCode::kSchema, where + ": tensor '" + t.name + "' has an invalid shape");
      }
      count *= dim.get<std::size_t>();
    }
    t.rows = entry["shape"][0].get<std::size_t>();
    t.cols = count / t.rows;
    std::size_t offset = cursor;
    if (entry.contains("offset")) {
      if (!entry["offset"].is_number_unsigned()) {
        throw Error(ErrorCode::kSchema, where + ": tensor '" + t.name + "' has a bad offset");
      }
      offset = entry["offset"].get<std::size_t>();
    }
    if (offset > blob.size() || (blob.size() - offset) / 4 < count) {
      throw Error(ErrorCode::kSchema, where + ": tensors.bin too short for tensor '" + t.name + "'");
    }
    t.values.resize(count);
    for (std::size_t i = 0; i < count; ++i) t.values[i] = decode_f32(bytes + offset + 4 * i);
    cursor = offset + 4 * count;
    c.tensors.push_back(std::move(t));
  }
  return c;
}

void save_container(json manifest, const std::vector<const RawTensor*>& tensors,
                    const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir.string() + ": " + ec.message());
  std::string blob;
  json list = json::array();
  for (const RawTensor* t : tensors) {
    list.push_back({{"name", t->name}, {"shape", {t->rows, t->cols}}, {"offset", blob.size()}});
    for (double v : t->values) encode_f32(static_cast<float>(v), blob);
  }
  manifest["dtype"] = "float32";
  manifest["tensors"] = std::move(list);
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  write_file(dir / "tensors.bin", blob);
}

std::string shape_string(const Matrix& m) {
  return std::to_string(m.rows) + "x" + std::to_string(m.cols);
}

double mean(const std::vector<double>& values) {
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

std::map<ModuleKind, double> means(const std::map<ModuleKind, std::vector<double>>& groups) {
  std::map<ModuleKind, double> out;
  for (const auto& [kind, values] : groups) out[kind] = mean(values);
  return out;
}

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double sum = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) sum += a[d] * b[d];
  return sum;
}

}  // namespace

Matrix::Matrix(std::size_t r, std::size_t c, std::vector<double> v)
    : rows(r), cols(c), values(std::move(v)) {
  if (values.size() != rows * cols) {
    throw Error(ErrorCode::kDimensionMismatch,
                "matrix " + std::to_string(rows) + "x" + std::to_string(cols) + " needs " +
                    std::to_string(rows * cols) + " values, got " + std::to_string(values.size()));
  }
}

double frobenius_norm(const Matrix& m) {
  // Scaled accumulation keeps the squares in range for large entries.
  double scale = 0.0;
  for (double v : m.values) scale = std::max(scale, std::fabs(v));
  if (scale == 0.0) return 0.0;
  double sum = 0.0;
  for (double v : m.values) {
    const double x = v / scale;
    sum += x * x;
  }
  return scale * std::sqrt(sum);
}

double param_change_rate(const Matrix& before, const Matrix& after) {
  if (before.rows != after.rows || before.cols != after.cols) {
    throw Error(ErrorCode::kDimensionMismatch,
                "shape " + shape_string(before) + " vs " + shape_string(after));
  }
  const double base = frobenius_norm(before);
  if (!(base > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "baseline matrix has zero Frobenius norm");
  }
  Matrix diff = after;
  for (std::size_t i = 0; i < diff.values.size(); ++i) diff.values[i] -= before.values[i];
  return frobenius_norm(diff) / base * 100.0;
}

WeightSnapshot load_snapshot(const fs::path& dir) {
  Container c = load_container(dir);
  WeightSnapshot snapshot;
  if (c.manifest.contains("model_id") && c.manifest["model_id"].is_string()) {
    snapshot.model_id = c.manifest["model_id"].get<std::string>();
  }
  for (RawTensor& t : c.tensors) {
    auto [it, inserted] =
        snapshot.entries.emplace(t.name, Matrix(t.rows, t.cols, std::move(t.values)));
    if (!inserted) {
      throw Error(ErrorCode::kSchema, (dir / "manifest.json").string() +
                                          ": duplicate tensor name '" + t.name + "'");
    }
  }
  return snapshot;
}

void save_snapshot(const WeightSnapshot& snapshot, const fs::path& dir) {
  std::vector<RawTensor> raw;
  raw.reserve(snapshot.entries.size());
  for (const auto& [name, m] : snapshot.entries) raw.push_back({name, m.rows, m.cols, m.values});
  std::vector<const RawTensor*> ptrs;
  for (const RawTensor& t : raw) ptrs.push_back(&t);
  save_container(json{{"model_id", snapshot.model_id}}, ptrs, dir);
}

std::string_view to_string(ModuleKind kind) {
  switch (kind) {
    case ModuleKind::kAttnQ: return "attn.q";
    case ModuleKind::kAttnK: return "attn.k";
    case ModuleKind::kAttnV: return "attn.v";
    case ModuleKind::kAttnO: return "attn.o";
    case ModuleKind::kMlpUp: return "mlp.up";
    case ModuleKind::kMlpDown: return "mlp.down";
    case ModuleKind::kMlpGate: return "mlp.gate";
    case ModuleKind::kOther: return "other";
  }
  return "other";
}

ModuleName parse_module_name(std::string_view name) {
  std::vector<std::string_view> parts;
  for (std::size_t start = 0;;) {
    const std::size_t dot = name.find('.', start);
    parts.push_back(name.substr(start, dot == std::string_view::npos ? dot : dot - start));
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  ModuleName out;
  for (std::string_view part : parts) {
    if (all_digits(part) && part.size() < 9) {
      out.layer = std::stoi(std::string(part));
      break;
    }
  }
  static const std::pair<std::string_view, ModuleKind> kDirect[] = {
      {"q_proj", ModuleKind::kAttnQ},       {"k_proj", ModuleKind::kAttnK},
      {"v_proj", ModuleKind::kAttnV},       {"o_proj", ModuleKind::kAttnO},
      {"out_proj", ModuleKind::kAttnO},     {"up_proj", ModuleKind::kMlpUp},
      {"down_proj", ModuleKind::kMlpDown},  {"gate_proj", ModuleKind::kMlpGate},
      {"wq", ModuleKind::kAttnQ},           {"wk", ModuleKind::kAttnK},
      {"wv", ModuleKind::kAttnV},           {"wo", ModuleKind::kAttnO},
  };
  static const std::pair<std::string_view, ModuleKind> kAttnShort[] = {
      {"q", ModuleKind::kAttnQ}, {"k", ModuleKind::kAttnK},
      {"v", ModuleKind::kAttnV}, {"o", ModuleKind::kAttnO}};
  static const std::pair<std::string_view, ModuleKind> kMlpShort[] = {
      {"up", ModuleKind::kMlpUp}, {"down", ModuleKind::kMlpDown}, {"gate", ModuleKind::kMlpGate}};
  for (std::size_t i = 0; i < parts.size(); ++i) {
    for (const auto& [token, kind] : kDirect) {
      if (parts[i] == token) {
        out.kind = kind;
        return out;
      }
    }
    if (i == 0) continue;
    const std::string_view parent = parts[i - 1];
    if (parent == "attn" || parent == "self_attn" || parent == "attention") {
      for (const auto& [token, kind] : kAttnShort) {
        if (parts[i] == token) {
          out.kind = kind;
          return out;
        }
      }
    }
    if (parent == "mlp" || parent == "ffn" || parent == "feed_forward") {
      for (const auto& [token, kind] : kMlpShort) {
        if (parts[i] == token) {
          out.kind = kind;
          return out;
        }
      }
    }
  }
  return out;
}

ChangeReport change_report(const WeightSnapshot& before, const WeightSnapshot& after) {
  std::vector<std::string> only_before;
  std::vector<std::string> only_after;
  for (const auto& [name, m] : before.entries) {
    if (!after.entries.count(name)) only_before.push_back(name);
  }
  for (const auto& [name, m] : after.entries) {
    if (!before.entries.count(name)) only_after.push_back(name);
  }
  if (!only_before.empty() || !only_after.empty()) {
    std::string message = "snapshots do not share module names;";
    auto list = [&](const char* label, const std::vector<std::string>& names) {
      if (names.empty()) return;
      message += std::string(" ") + label + ":";
      for (const std::string& n : names) message += " " + n;
      message += ";";
    };
    list("only in before", only_before);
    list("only in after", only_after);
    message.pop_back();
    throw Error(ErrorCode::kSchema, message);
  }
  std::string shape_errors;
  for (const auto& [name, m] : before.entries) {
    const Matrix& other = after.entries.at(name);
    if (m.rows != other.rows || m.cols != other.cols) {
      shape_errors += " " + name + " (" + shape_string(m) + " vs " + shape_string(other) + ")";
    }
  }
  if (!shape_errors.empty()) {
    throw Error(ErrorCode::kDimensionMismatch, "module shapes differ:" + shape_errors);
  }

  ChangeReport report;
  std::map<ModuleKind, std::vector<double>> by_kind;
  std::map<int, std::map<ModuleKind, std::vector<double>>> by_layer;
  for (const auto& [name, m] : before.entries) {
    double percent;
    try {
      percent = param_change_rate(m, after.entries.at(name));
    } catch (const Error& e) {
      throw Error(e.code(), "module " + name + ": " + e.what());
    }
    ChangeRow row{name, parse_module_name(name), percent};
    by_kind[row.parsed.kind].push_back(percent);
    if (row.parsed.layer) by_layer[*row.parsed.layer][row.parsed.kind].push_back(percent);
    report.rows.push_back(std::move(row));
  }
  report.mean_by_kind = means(by_kind);
  for (const auto& [layer, groups] : by_layer) {
    LayerSummary summary{layer, means(groups), std::nullopt};
    const auto& k = summary.mean_by_kind;
    if (k.count(ModuleKind::kAttnQ) && k.count(ModuleKind::kAttnK) &&
        k.count(ModuleKind::kMlpUp) && k.count(ModuleKind::kMlpDown)) {
      summary.attention_exceeds_mlp =
          std::min(k.at(ModuleKind::kAttnQ), k.at(ModuleKind::kAttnK)) >
          std::max(k.at(ModuleKind::kMlpUp), k.at(ModuleKind::kMlpDown));
    }
    report.layers.push_back(std::move(summary));
  }
  return report;
}

std::string format_change_tsv(const ChangeReport& report) {
  std::ostringstream out;
  out.precision(17);
  out << "module\tlayer\tkind\tpercent\n";
  for (const ChangeRow& row : report.rows) {
    out << row.module << '\t' << (row.parsed.layer ? std::to_string(*row.parsed.layer) : "-")
        << '\t' << to_string(row.parsed.kind) << '\t' << row.percent << '\n';
  }
  return out.str();
}

std::string format_change_json(const ChangeReport& report) {
  auto kind_map = [](const std::map<ModuleKind, double>& m) {
    json out = json::object();
    for (const auto& [kind, value] : m) out[std::string(to_string(kind))] = value;
    return out;
  };
  json modules = json::array();
  for (const ChangeRow& row : report.rows) {
    modules.push_back({{"module", row.module},
                       {"layer", row.parsed.layer ? json(*row.parsed.layer) : json(nullptr)},
                       {"kind", std::string(to_string(row.parsed.kind))},
                       {"percent", row.percent}});
  }
  json layers = json::array();
  for (const LayerSummary& layer : report.layers) {
    layers.push_back({{"layer", layer.layer},
                      {"mean_by_kind", kind_map(layer.mean_by_kind)},
                      {"attention_exceeds_mlp", layer.attention_exceeds_mlp
                                                    ? json(*layer.attention_exceeds_mlp)
                                                    : json(nullptr)}});
  }
  return json{{"modules", std::move(modules)},
              {"mean_by_kind", kind_map(report.mean_by_kind)},
              {"layers", std::move(layers)}}
      .dump();
}

void TokenAttribution::validate() const {
  if (grads.size() != tokens.size() || embeds.size() != tokens.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "attribution has " + std::to_string(tokens.size()) + " tokens, " +
                    std::to_string(grads.size()) + " gradient rows and " +
                    std::to_string(embeds.size()) + " embedding rows");
  }
  if (tokens.empty()) return;
  const std::size_t dim = grads[0].size();
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (grads[i].size() != dim || embeds[i].size() != dim) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "token " + std::to_string(i) + " vectors differ from dimension " +
                      std::to_string(dim));
    }
  }
}

TokenAttribution load_attribution(const fs::path& dir) {
  Container c = load_container(dir);
  const std::string where = (dir / "manifest.json").string();
  if (!c.manifest.contains("tokens") || !c.manifest["tokens"].is_array()) {
    throw Error(ErrorCode::kSchema, where + ": missing \"tokens\" array");
  }
  TokenAttribution attr;
  for (const json& token : c.manifest["tokens"]) {
    if (!token.is_string()) throw Error(ErrorCode::kSchema, where + ": tokens must be strings");
    attr.tokens.push_back(token.get<std::string>());
  }
  auto rows_of = [&](std::string_view name) {
    for (const RawTensor& t : c.tensors) {
      if (t.name != name) continue;
      std::vector<std::vector<double>> rows(t.rows);
      for (std::size_t r = 0; r < t.rows; ++r) {
        rows[r].assign(t.values.begin() + static_cast<std::ptrdiff_t>(r * t.cols),
                       t.values.begin() + static_cast<std::ptrdiff_t>((r + 1) * t.cols));
      }
      return rows;
    }
    throw Error(ErrorCode::kSchema, where + ": missing tensor '" + std::string(name) + "'");
  };
  attr.grads = rows_of("grads");
  attr.embeds = rows_of("embeds");
  attr.validate();
  return attr;
}

void save_attribution(const TokenAttribution& attribution, const fs::path& dir) {
  attribution.validate();
  const std::size_t dim = attribution.tokens.empty() ? 0 : attribution.grads[0].size();
  if (dim == 0) throw Error(ErrorCode::kInvalidArgument, "cannot save an empty attribution");
  auto flatten = [&](const char* name, const std::vector<std::vector<double>>& rows) {
    RawTensor t{name, rows.size(), dim, {}};
    for (const auto& row : rows) t.values.insert(t.values.end(), row.begin(), row.end());
    return t;
  };
  const RawTensor grads = flatten("grads", attribution.grads);
  const RawTensor embeds = flatten("embeds", attribution.embeds);
  save_container(json{{"tokens", attribution.tokens}}, {&grads, &embeds}, dir);
}

std::vector<double> saliency(const TokenAttribution& attribution) {
  attribution.validate();
  std::vector<double> scores(attribution.tokens.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    scores[i] = std::fabs(dot(attribution.grads[i], attribution.embeds[i]));
  }
  return scores;
}

std::vector<SaliencyChange> saliency_delta(const TokenAttribution& before,
                                           const TokenAttribution& after) {
  if (before.tokens != after.tokens) {
    throw Error(ErrorCode::kInvalidArgument, "saliency delta needs identical token lists");
  }
  const std::vector<double> s_before = saliency(before);
  const std::vector<double> s_after = saliency(after);
  std::vector<SaliencyChange> changes(s_before.size());
  for (std::size_t i = 0; i < changes.size(); ++i) {
    changes[i] = {i, before.tokens[i], s_before[i], s_after[i], s_after[i] - s_before[i]};
  }
  std::stable_sort(changes.begin(), changes.end(),
                   [](const SaliencyChange& a, const SaliencyChange& b) { return a.delta > b.delta; });
  return changes;
}

std::string format_saliency_tsv(const std::vector<SaliencyChange>& changes) {
  std::ostringstream out;
  out.precision(17);
  out << "rank\tindex\ttoken\tbefore\tafter\tdelta\n";
  for (std::size_t r = 0; r < changes.size(); ++r) {
    const SaliencyChange& c = changes[r];
    out << (r + 1) << '\t' << c.index << '\t' << c.token << '\t' << c.before << '\t' << c.after
        << '\t' << c.delta << '\n';
  }
  return out.str();
}

std::string format_saliency_json(const std::vector<SaliencyChange>& changes) {
  json out = json::array();
  for (const SaliencyChange& c : changes) {
    out.push_back({{"index", c.index},
                   {"token", c.token},
                   {"before", c.before},
                   {"after", c.after},
                   {"delta", c.delta}});
  }
  return out.dump();
}

}  // namespace lsr::diag
