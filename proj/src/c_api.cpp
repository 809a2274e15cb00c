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

#include "lsr/lsr.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "json_convert.hpp"
#include "lsr/batch.hpp"
#include "lsr/dataset.hpp"
#include "lsr/diagnostics.hpp"
#include "lsr/reward.hpp"
#include "lsr/soft_scorer.hpp"

struct lsr_engine {
  lsr::RewardConfig config;
  double eps = 1e-6;
  lsr::StreamOptions stream;
  std::unique_ptr<lsr::SoftScorer> soft_scorer;

  lsr::ScoreContext context() const { return {config, soft_scorer.get(), {}}; }
};

namespace {

using nlohmann::json;

thread_local std::string g_last_error;

lsr_status fail(lsr_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

template <typename Fn>
lsr_status guarded(Fn&& fn) {
  g_last_error.clear();
  try {
    fn();
    return LSR_OK;
  } catch (const lsr::Error& e) {
    return fail(static_cast<lsr_status>(e.code()), e.what());
  } catch (const json::exception& e) {
    return fail(LSR_SCHEMA, e.what());
  } catch (const std::bad_alloc&) {
    return fail(LSR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(LSR_INTERNAL, e.what());
  } catch (...) {
    return fail(LSR_INTERNAL, "unknown exception");
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

void set_out(char** out, const std::string& s) {
  if (out != nullptr) *out = dup_string(s);
}

void require(bool condition, const char* message) {
  if (!condition) throw lsr::Error(lsr::ErrorCode::kInvalidArgument, message);
}

class InputFile {
 public:
  explicit InputFile(const char* path) {
    require(path != nullptr && *path != '\0', "input path is required");
    if (std::strcmp(path, "-") == 0) return;
    file_.open(path, std::ios::binary);
    if (!file_) throw lsr::Error(lsr::ErrorCode::kIo, std::string("cannot open ") + path);
  }
  std::istream& stream() { return file_.is_open() ? static_cast<std::istream&>(file_) : std::cin; }

 private:
  std::ifstream file_;
};

class OutputFile {
 public:
  explicit OutputFile(const char* path) {
    require(path != nullptr && *path != '\0', "output path is required");
    if (std::strcmp(path, "-") == 0) return;
    file_.open(path, std::ios::binary | std::ios::trunc);
    if (!file_) throw lsr::Error(lsr::ErrorCode::kIo, std::string("cannot write ") + path);
  }
  std::ostream& stream() {
    return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout;
  }
  void finish(const char* path) {
    stream().flush();
    if (!stream()) throw lsr::Error(lsr::ErrorCode::kIo, std::string("write failed: ") + path);
  }

 private:
  std::ofstream file_;
};

bool json_format(const char* format) {
  if (format == nullptr || std::strcmp(format, "tsv") == 0) return false;
  if (std::strcmp(format, "json") == 0) return true;
  throw lsr::Error(lsr::ErrorCode::kInvalidArgument,
                   std::string("unknown format '") + format + "' (expected tsv or json)");
}

lsr::TemplateBuildOptions template_options(const json& options) {
  lsr::TemplateBuildOptions out;
  if (options.contains("seed")) out.seed = options["seed"].get<std::uint64_t>();
  if (options.contains("records_per_seed")) {
    out.records_per_seed = options["records_per_seed"].get<std::size_t>();
  }
  if (options.contains("parallel_width")) {
    out.parallel_width = options["parallel_width"].get<std::size_t>();
  }
  if (options.contains("soft_fraction")) out.soft_fraction = options["soft_fraction"].get<double>();
  if (options.contains("structures")) {
    out.structures.clear();
    for (const json& s : options["structures"]) {
      auto parsed = lsr::parse_composition(s.get<std::string>());
      if (!parsed) {
        throw lsr::Error(lsr::ErrorCode::kInvalidArgument,
                         "unknown structure '" + s.get<std::string>() + "'");
      }
      out.structures.push_back(*parsed);
    }
  }
  return out;
}

}  // namespace

extern "C" {

const char* lsr_version(void) { return "0.1.0"; }

const char* lsr_last_error(void) { return g_last_error.c_str(); }

const char* lsr_status_name(lsr_status status) {
  switch (status) {
    case LSR_OK: return "ok";
    case LSR_INVALID_ARGUMENT: return "invalid_argument";
    case LSR_SCHEMA: return "schema";
    case LSR_UNKNOWN_KIND: return "unknown_kind";
    case LSR_MISSING_PARAM: return "missing_param";
    case LSR_DUPLICATE_ID: return "duplicate_id";
    case LSR_SCORING_UNAVAILABLE: return "scoring_unavailable";
    case LSR_IO: return "io";
    case LSR_DIMENSION_MISMATCH: return "dimension_mismatch";
    case LSR_INTERNAL: return "internal";
  }
  return "unknown";
}

void lsr_string_free(char* s) { std::free(s); }

void lsr_config_init(lsr_config* config) {
  if (config == nullptr) return;
  config->gamma = 0.5;
  config->trigger_threshold = 1.0;
  config->soft_binarize_threshold = 0.5;
  config->advantage_eps = 1e-6;
  config->soft_scorer_url = nullptr;
  config->mock_soft_rules = nullptr;
  config->jobs = 1;
  config->strict = 0;
}

lsr_status lsr_engine_create(const lsr_config* config, lsr_engine** out) {
  return guarded([&] {
    require(out != nullptr, "engine output pointer is null");
    *out = nullptr;
    lsr_config defaults;
    lsr_config_init(&defaults);
    const lsr_config& c = config != nullptr ? *config : defaults;
    auto engine = std::make_unique<lsr_engine>();
    engine->config.gamma = c.gamma;
    engine->config.trigger_threshold = c.trigger_threshold;
    engine->config.soft_binarize_threshold = c.soft_binarize_threshold;
    engine->config.validate();
    require(c.advantage_eps > 0.0, "advantage_eps must be > 0");
    require(c.jobs >= 1, "jobs must be >= 1");
    engine->eps = c.advantage_eps;
    engine->stream.jobs = c.jobs;
    engine->stream.strict = c.strict != 0;
    if (c.mock_soft_rules != nullptr && *c.mock_soft_rules != '\0') {
      engine->soft_scorer = std::make_unique<lsr::MockSoftScorer>(
          lsr::MockSoftScorer::rules_from_json(c.mock_soft_rules));
    } else if (c.soft_scorer_url != nullptr && *c.soft_scorer_url != '\0') {
      lsr::HttpScorerOptions options;
      options.endpoint = c.soft_scorer_url;
      options.max_in_flight = std::max<std::size_t>(options.max_in_flight, c.jobs);
      engine->soft_scorer = std::make_unique<lsr::HttpSoftScorer>(std::move(options));
    }
    *out = engine.release();
  });
}

void lsr_engine_destroy(lsr_engine* engine) { delete engine; }

lsr_status lsr_verify(const lsr_engine* engine, const char* kind, const char* params_json,
                      const char* response, const char* instruction, int* verdict,
                      char** detail) {
  return guarded([&] {
    require(engine != nullptr && kind != nullptr && response != nullptr && verdict != nullptr,
            "lsr_verify: engine, kind, response and verdict are required");
    lsr::Params params;
    if (params_json != nullptr && *params_json != '\0') {
      const json doc = json::parse(params_json, nullptr, false);
      if (doc.is_discarded()) throw lsr::Error(lsr::ErrorCode::kSchema, "params: invalid JSON");
      params = lsr::detail::params_from_json(doc, "$.params");
    }
    const lsr::ConstraintSpec spec("c1", kind, std::move(params));
    const lsr::Verdict v = lsr::verify(spec, response, instruction ? instruction : "");
    *verdict = v.satisfied;
    set_out(detail, v.detail);
  });
}

lsr_status lsr_score_tree(const lsr_engine* engine, const char* tree_json, const char* response,
                          const char* instruction, double* root_reward, char** trace_json) {
  return guarded([&] {
    require(engine != nullptr && tree_json != nullptr && response != nullptr &&
                root_reward != nullptr,
            "lsr_score_tree: engine, tree, response and root_reward are required");
    const lsr::LogicNode tree = lsr::parse_tree(tree_json);
    const lsr::ScoreContext ctx = engine->context();
    const lsr::EvalTrace trace = lsr::score_tree(tree, response, instruction ? instruction : "",
                                                 ctx.config, ctx.soft_scorer);
    *root_reward = trace.root_reward;
    set_out(trace_json, lsr::trace_to_json(trace));
  });
}

lsr_status lsr_score_batch(const lsr_engine* engine, const char* const* tree_docs,
                           const char* const* responses, const char* const* instructions,
                           size_t count, double* rewards_out, char** traces_out) {
  return guarded([&] {
    require(engine != nullptr, "lsr_score_batch: engine is required");
    if (count == 0) return;
    require(tree_docs != nullptr && responses != nullptr && rewards_out != nullptr,
            "lsr_score_batch: trees, responses and rewards_out are required");
    const lsr::ScoreContext ctx = engine->context();
    std::vector<std::string> traces;
    std::vector<double> rewards(count);
    for (size_t i = 0; i < count; ++i) {
      require(tree_docs[i] != nullptr && responses[i] != nullptr,
              "lsr_score_batch: null tree or response");
      try {
        const lsr::LogicNode tree = lsr::parse_tree(tree_docs[i]);
        const char* instruction =
            instructions != nullptr && instructions[i] != nullptr ? instructions[i] : "";
        const lsr::EvalTrace trace =
            lsr::score_tree(tree, responses[i], instruction, ctx.config, ctx.soft_scorer);
        rewards[i] = trace.root_reward;
        if (traces_out != nullptr) traces.push_back(lsr::trace_to_json(trace));
      } catch (const lsr::Error& e) {
        throw lsr::Error(e.code(), "item " + std::to_string(i) + ": " + e.what());
      }
    }
    std::copy(rewards.begin(), rewards.end(), rewards_out);
    if (traces_out != nullptr) {
      for (size_t i = 0; i < count; ++i) traces_out[i] = dup_string(traces[i]);
    }
  });
}

lsr_status lsr_group_advantages(const double* rewards, size_t count, size_t group_size,
                                double eps, double* advantages_out) {
  return guarded([&] {
    require(group_size >= 2, "group_size must be >= 2");
    if (count % group_size != 0) {
      throw lsr::Error(lsr::ErrorCode::kInvalidArgument,
                       "reward count " + std::to_string(count) + " is not divisible by group size " +
                           std::to_string(group_size));
    }
    if (count == 0) return;
    require(rewards != nullptr && advantages_out != nullptr,
            "lsr_group_advantages: rewards and advantages_out are required");
    std::vector<double> out(count);
    for (size_t start = 0; start < count; start += group_size) {
      const lsr::GroupScore g =
          lsr::group_advantages(std::span<const double>(rewards + start, group_size), eps);
      std::copy(g.advantages.begin(), g.advantages.end(), out.begin() + static_cast<long>(start));
    }
    std::copy(out.begin(), out.end(), advantages_out);
  });
}

lsr_status lsr_score_stream(const lsr_engine* engine, const char* input_path,
                            const char* output_path, char** summary_json) {
  return guarded([&] {
    require(engine != nullptr, "engine is required");
    InputFile in(input_path);
    OutputFile out(output_path);
    const lsr::StreamSummary summary =
        lsr::score_stream(in.stream(), out.stream(), engine->context(), engine->stream);
    out.finish(output_path);
    set_out(summary_json, summary.to_json());
  });
}

lsr_status lsr_verify_stream(const lsr_engine* engine, const char* input_path,
                             const char* output_path, char** summary_json) {
  return guarded([&] {
    require(engine != nullptr, "engine is required");
    InputFile in(input_path);
    OutputFile out(output_path);
    const lsr::StreamSummary summary =
        lsr::verify_stream(in.stream(), out.stream(), {}, engine->stream);
    out.finish(output_path);
    set_out(summary_json, summary.to_json());
  });
}

lsr_status lsr_advantages_stream(const lsr_engine* engine, const char* input_path,
                                 const char* output_path, char** summary_json) {
  return guarded([&] {
    require(engine != nullptr, "engine is required");
    InputFile in(input_path);
    OutputFile out(output_path);
    const lsr::StreamSummary summary =
        lsr::advantages_stream(in.stream(), out.stream(), engine->eps, engine->stream);
    out.finish(output_path);
    set_out(summary_json, summary.to_json());
  });
}

lsr_status lsr_build_dataset(const char* seeds_path, const char* output_path,
                             const char* options_json, char** summary_json) {
  return guarded([&] {
    json options = json::object();
    if (options_json != nullptr && *options_json != '\0') {
      options = json::parse(options_json, nullptr, false);
      if (options.is_discarded() || !options.is_object()) {
        throw lsr::Error(lsr::ErrorCode::kInvalidArgument, "options must be a JSON object");
      }
    }
    std::vector<lsr::SeedQuestion> seeds;
    json warnings = json::array();
    {
      InputFile in(seeds_path);
      std::string line;
      std::size_t number = 0;
      while (std::getline(in.stream(), line)) {
        ++number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
          seeds.push_back(lsr::parse_seed(line));
        } catch (const lsr::Error& e) {
          throw lsr::Error(e.code(), "seed line " + std::to_string(number) + ": " + e.what());
        }
      }
    }
    const std::string mode = options.value("mode", std::string("template"));
    std::vector<lsr::InstructionRecord> records;
    if (mode == "template") {
      records = lsr::build_template_records(seeds, template_options(options));
    } else if (mode == "llm") {
      const lsr::HttpChatClient client(lsr::ChatClientOptions::from_env());
      lsr::LlmBuildResult result =
          lsr::build_llm_records(seeds, client, options.value("concurrency", std::size_t{4}));
      records = std::move(result.records);
      for (const std::string& w : result.warnings) warnings.push_back(w);
    } else {
      throw lsr::Error(lsr::ErrorCode::kInvalidArgument,
                       "unknown mode '" + mode + "' (expected template or llm)");
    }
    OutputFile out(output_path);
    for (const lsr::InstructionRecord& record : records) {
      out.stream() << lsr::serialize_record(record) << '\n';
    }
    out.finish(output_path);
    set_out(summary_json,
            json{{"seeds", seeds.size()}, {"records", records.size()}, {"warnings", warnings}}
                .dump());
  });
}

lsr_status lsr_dataset_stats(const char* input_path, const char* format, char** table,
                             char** summary_json) {
  return guarded([&] {
    const bool as_json = json_format(format);
    InputFile in(input_path);
    const lsr::DatasetStats stats = lsr::dataset_stats(in.stream());
    set_out(table, as_json ? lsr::format_stats_json(stats) + "\n" : lsr::format_stats_tsv(stats));
    set_out(summary_json, json{{"nested_records", stats.nested_records},
                               {"malformed_lines", stats.malformed_lines},
                               {"warnings", stats.warnings}}
                              .dump());
  });
}

lsr_status lsr_change_report(const char* before_dir, const char* after_dir, const char* format,
                             char** report) {
  return guarded([&] {
    require(before_dir != nullptr && after_dir != nullptr, "both dump directories are required");
    const bool as_json = json_format(format);
    const lsr::diag::ChangeReport r = lsr::diag::change_report(
        lsr::diag::load_snapshot(before_dir), lsr::diag::load_snapshot(after_dir));
    set_out(report, as_json ? lsr::diag::format_change_json(r) + "\n"
                            : lsr::diag::format_change_tsv(r));
  });
}

lsr_status lsr_saliency_report(const char* before_dir, const char* after_dir, const char* format,
                               char** report) {
  return guarded([&] {
    require(before_dir != nullptr && after_dir != nullptr, "both dump directories are required");
    const bool as_json = json_format(format);
    const auto changes = lsr::diag::saliency_delta(lsr::diag::load_attribution(before_dir),
                                                   lsr::diag::load_attribution(after_dir));
    set_out(report, as_json ? lsr::diag::format_saliency_json(changes) + "\n"
                            : lsr::diag::format_saliency_tsv(changes));
  });
}

}  // extern "C"
