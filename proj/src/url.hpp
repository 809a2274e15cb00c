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

#pragma once

#include <string>
#include <string_view>

#include "lsr/error.hpp"

namespace lsr::detail {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;    // always starts with '/'
};

// Splits an http endpoint into origin and path and appends `suffix` to the
// path unless it already ends with it. Only plain http is supported.
inline SplitUrl split_url(std::string_view url, std::string_view suffix) {
  if (url.empty()) throw Error(ErrorCode::kInvalidArgument, "endpoint URL is empty");
  while (!url.empty() && url.back() == '/') url.remove_suffix(1);
  if (url.starts_with("https://")) {
    throw Error(ErrorCode::kInvalidArgument,
                "https endpoints are not supported (built without TLS): " + std::string(url));
  }
  std::string_view rest = url;
  if (rest.starts_with("http://")) {
    rest.remove_prefix(7);
  } else if (rest.find("://") != std::string_view::npos) {
    throw Error(ErrorCode::kInvalidArgument, "unsupported URL scheme: " + std::string(url));
  }
  const std::size_t slash = rest.find('/');
  SplitUrl out;
  out.origin = "http://" + std::string(rest.substr(0, slash));
  out.path = slash == std::string_view::npos ? std::string() : std::string(rest.substr(slash));
  if (!std::string_view(out.path).ends_with(suffix)) out.path += suffix;
  if (out.path.empty() || out.path.front() != '/') out.path.insert(out.path.begin(), '/');
  if (out.origin == "http://") {
    throw Error(ErrorCode::kInvalidArgument, "endpoint URL has no host: " + std::string(url));
  }
  return out;
}

}  // namespace lsr::detail
