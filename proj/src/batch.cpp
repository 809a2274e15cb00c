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

#include "lsr/batch.hpp"

#include <atomic>
#include <exception>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "json_convert.hpp"
#include "lsr/text_metrics.hpp"

namespace lsr {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

struct Line {
  std::size_t number = 0;
  std::string text;
};

// Outcome of one row; exactly one of output/error/fatal is meaningful.
struct RowResult {
  std::optional<std::string> output;
  std::string error;
  std::exception_ptr fatal;
  double reward = 0.0;
  bool mismatch = false;
};

using RowFn = std::function<RowResult(const Line&)>;

void run_block(const std::vector<Line>& block, std::vector<RowResult>& results, const RowFn& fn,
               std::size_t jobs) {
  results.assign(block.size(), RowResult{});
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < block.size(); i = next++) {
      try {
        results[i] = fn(block[i]);
      } catch (const ScoringUnavailable&) {
        results[i].fatal = std::current_exception();
      } catch (const Error& e) {
        results[i].error = e.what();
      } catch (const json::exception& e) {
        results[i].error = e.what();
      } catch (...) {
        results[i].fatal = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min(jobs, block.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& thread : pool) thread.join();
}

StreamSummary run_stream(std::istream& in, std::ostream& out, const StreamOptions& options,
                         const RowFn& fn) {
  const std::size_t jobs = std::max<std::size_t>(1, options.jobs);
  const std::size_t block_size = std::max<std::size_t>(1, options.block_size);
  StreamSummary summary;
  double reward_sum = 0.0;
  std::vector<Line> block;
  std::vector<RowResult> results;
  auto flush = [&] {
    run_block(block, results, fn, jobs);
    for (std::size_t i = 0; i < block.size(); ++i) {
      RowResult& r = results[i];
      if (r.fatal) std::rethrow_exception(r.fatal);
      if (!r.output) {
        const std::string message = "line " + std::to_string(block[i].number) + ": " + r.error;
        if (options.strict) {
          out.flush();
          throw Error(ErrorCode::kSchema, message);
        }
        ++summary.skipped;
        summary.warnings.push_back(message);
        continue;
      }
      out << *r.output << '\n';
      ++summary.emitted;
      reward_sum += r.reward;
      if (r.mismatch) ++summary.failed;
    }
    block.clear();
  };
  std::string text;
  std::size_t number = 0;
  while (std::getline(in, text)) {
    ++number;
    if (text::trim(text).empty()) continue;
    ++summary.rows;
    block.push_back({number, std::move(text)});
    if (block.size() >= block_size) flush();
  }
  if (!block.empty()) flush();
  out.flush();
  if (summary.emitted > 0) summary.mean_reward = reward_sum / static_cast<double>(summary.emitted);
  return summary;
}

json parse_object(std::string_view text) {
  json row = json::parse(text, nullptr, false);
  if (row.is_discarded()) throw Error(ErrorCode::kSchema, "invalid JSON");
  if (!row.is_object()) throw Error(ErrorCode::kSchema, "row is not a JSON object");
  return row;
}

const std::string& string_field(const json& row, const char* key) {
  auto it = row.find(key);
  if (it == row.end() || !it->is_string()) {
    throw Error(ErrorCode::kSchema, std::string("missing string field \"") + key + "\"");
  }
  return it->get_ref<const std::string&>();
}

}  // namespace

std::string StreamSummary::to_json() const {
  json out = {{"rows", rows},     {"emitted", emitted},         {"skipped", skipped},
              {"failed", failed}, {"mean_reward", mean_reward}, {"warnings", warnings}};
  return out.dump();
}

std::string trace_to_json(const EvalTrace& trace) {
  ordered_json nodes = ordered_json::object();
  for (const NodeResult& node : trace.nodes) {
    ordered_json entry = {{"type", std::string(to_string(node.type))},
                          {"reward", node.reward},
                          {"active", node.active}};
    if (!node.constraint_id.empty()) entry["id"] = node.constraint_id;
    if (node.verdict) entry["verdict"] = *node.verdict;
    nodes[node.path] = std::move(entry);
  }
  return ordered_json{{"root_reward", trace.root_reward}, {"trace", std::move(nodes)}}.dump();
}

EvalTrace score_row(std::string_view json_line, const ScoreContext& context) {
  const json row = parse_object(json_line);
  const std::string& response = string_field(row, "response");
  if (row.contains("record")) {
    const InstructionRecord record = detail::record_from_json(row["record"], "$.record");
    return score_tree(record.tree, response, record.instruction, context.config,
                      context.soft_scorer, context.verify_options);
  }
  if (row.contains("tree")) {
    std::string instruction;
    if (row.contains("instruction")) instruction = string_field(row, "instruction");
    const LogicNode tree = detail::tree_from_json(row["tree"], "$.tree");
    return score_tree(tree, response, instruction, context.config, context.soft_scorer,
                      context.verify_options);
  }
  throw Error(ErrorCode::kSchema, "row needs a \"record\" or a \"tree\"");
}

StreamSummary score_stream(std::istream& in, std::ostream& out, const ScoreContext& context,
                           const StreamOptions& options) {
  context.config.validate();
  return run_stream(in, out, options, [&](const Line& line) {
    const EvalTrace trace = score_row(line.text, context);
    RowResult r;
    r.output = trace_to_json(trace);
    r.reward = trace.root_reward;
    return r;
  });
}

StreamSummary verify_stream(std::istream& in, std::ostream& out,
                            const VerifyOptions& verify_options, const StreamOptions& options) {
  return run_stream(in, out, options, [&](const Line& line) {
    const json row = parse_object(line.text);
    const std::string& kind = string_field(row, "kind");
    const std::string& response = string_field(row, "response");
    std::string instruction;
    if (row.contains("instruction")) instruction = string_field(row, "instruction");
    std::optional<int> expect;
    if (row.contains("expect")) {
      const json& e = row["expect"];
      if (!e.is_number_integer() || (e.get<int>() != 0 && e.get<int>() != 1)) {
        throw Error(ErrorCode::kSchema, "\"expect\" must be 0 or 1");
      }
      expect = e.get<int>();
    }
    const Params params =
        row.contains("params") ? detail::params_from_json(row["params"], "$.params") : Params{};
    const ConstraintSpec spec("fixture", kind, params);
    const Verdict verdict = verify(spec, response, instruction, verify_options);
    ordered_json result = {{"line", line.number}, {"kind", kind}, {"verdict", verdict.satisfied}};
    RowResult r;
    if (expect) {
      result["expect"] = *expect;
      result["pass"] = *expect == verdict.satisfied;
      r.mismatch = *expect != verdict.satisfied;
    }
    result["detail"] = verdict.detail;
    r.output = result.dump();
    return r;
  });
}

StreamSummary advantages_stream(std::istream& in, std::ostream& out, double eps,
                                const StreamOptions& options) {
  if (!(eps > 0.0)) throw Error(ErrorCode::kInvalidArgument, "eps must be > 0");
  std::map<json, std::vector<double>> groups;
  std::map<json, std::size_t> first_line;
  // Rows are parsed sequentially; the grouping itself is cheap.
  std::ostringstream sink;
  StreamOptions sequential = options;
  sequential.jobs = 1;
  StreamSummary summary = run_stream(in, sink, sequential, [&](const Line& line) {
    const json row = parse_object(line.text);
    auto group = row.find("group");
    if (group == row.end() || !(group->is_string() || group->is_number_integer())) {
      throw Error(ErrorCode::kSchema, "missing \"group\" id (string or integer)");
    }
    auto reward = row.find("reward");
    if (reward == row.end() || !reward->is_number()) {
      throw Error(ErrorCode::kSchema, "missing numeric \"reward\"");
    }
    const double value = reward->get<double>();
    if (!(value >= 0.0 && value <= 1.0)) {
      throw Error(ErrorCode::kSchema, "reward " + std::to_string(value) + " outside [0, 1]");
    }
    groups[*group].push_back(value);
    first_line.emplace(*group, line.number);
    RowResult r;
    r.output = std::string();
    return r;
  });
  summary.emitted = 0;
  summary.mean_reward = 0.0;
  for (const auto& [group, rewards] : groups) {
    if (rewards.size() < 2) {
      const std::string message = "line " + std::to_string(first_line[group]) + ": group " +
                                  group.dump() + " has a single rollout";
      if (options.strict) throw Error(ErrorCode::kInvalidArgument, message);
      ++summary.skipped;
      summary.warnings.push_back(message);
      continue;
    }
    const GroupScore score = group_advantages(rewards, eps);
    out << json{{"group", group}, {"rewards", score.rewards}, {"advantages", score.advantages}}.dump()
        << '\n';
    ++summary.emitted;
  }
  out.flush();
  return summary;
}

}  // namespace lsr
