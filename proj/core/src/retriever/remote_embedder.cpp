// Copyright 2026 The coqharness Authors.
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

#include "coqharness/retriever/remote_embedder.hpp"

#include <cstdlib>

#include <httplib.h>

#include "coqharness/common/error.hpp"

namespace coqharness::retriever {

namespace {

// Splits "scheme://host[:port]/path" into the client origin and the path.
std::pair<std::string, std::string> split_url(const std::string& url) {
  auto scheme = url.find("://");
  auto path_at = url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  if (path_at == std::string::npos) return {url, "/"};
  return {url.substr(0, path_at), url.substr(path_at)};
}

}  // namespace

RemoteEmbedder::RemoteEmbedder(RemoteEmbedderConfig config) : config_(std::move(config)) {
  if (config_.url.empty()) throw HarnessError(ErrorCode::kConfigError, "embedding url is empty");
}

std::vector<std::vector<double>> RemoteEmbedder::embed(const std::vector<std::string>& texts) const {
  auto [origin, path] = split_url(config_.url);
  httplib::Client client(origin);
  client.set_connection_timeout(config_.timeout);
  client.set_read_timeout(config_.timeout);
  httplib::Headers headers;
  if (!config_.api_key_env.empty()) {
    if (const char* key = std::getenv(config_.api_key_env.c_str())) {
      headers.emplace("Authorization", std::string("Bearer ") + key);
    }
  }
  nlohmann::json body = {{"texts", texts}};
  auto res = client.Post(path, headers, body.dump(), "application/json");
  if (!res) throw ProviderError(0, "embedding request failed: " + httplib::to_string(res.error()));
  if (res->status != 200) throw ProviderError(res->status, res->body);
  try {
    auto doc = nlohmann::json::parse(res->body);
    auto vectors = doc.at("vectors").get<std::vector<std::vector<double>>>();
    if (vectors.size() != texts.size()) {
      throw ProviderError(res->status, "embedding response has the wrong number of vectors");
    }
    for (const auto& v : vectors) {
      if (v.size() != vectors.front().size()) {
        throw ProviderError(res->status, "embedding vectors differ in dimension");
      }
    }
    return vectors;
  } catch (const nlohmann::json::exception& e) {
    throw ProviderError(res->status, std::string("malformed embedding response: ") + e.what());
  }
}

}  // namespace coqharness::retriever
