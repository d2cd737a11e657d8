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

#include <gtest/gtest.h>

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <thread>

#include <httplib.h>

#include "coqharness/common/error.hpp"
#include "coqharness/model/cache.hpp"
#include "coqharness/model/http_provider.hpp"
#include "coqharness/model/provider.hpp"
#include "coqharness/model/scripted_provider.hpp"
#include "coqharness/retriever/remote_embedder.hpp"
#include "fixtures.hpp"

namespace {

using namespace coqharness;
using namespace coqharness::model;
using prompting::ChatMessage;
using prompting::ChatPrompt;
using prompting::Role;

ChatPrompt prompt_for(const std::string& theorem, const std::string& config, const std::string& query) {
  ChatPrompt p;
  p.theorem_id = "F.v:" + theorem;
  p.config_tag = config;
  p.messages = {{Role::kSystem, "sys"}, {Role::kUser, query}};
  return p;
}

DecodingParams n_of(int n) {
  DecodingParams d;
  d.n = n;
  return d;
}

TEST(DecodingParams, DefaultsAndValidation) {
  DecodingParams d;
  EXPECT_EQ(d.temperature, 1.0);
  EXPECT_EQ(d.presence_penalty, 0.1);
  EXPECT_EQ(d.n, 5);
  EXPECT_EQ(d.max_tokens, 1024);
  EXPECT_EQ(DecodingParams::from_json(d.to_json()), d);
  EXPECT_EQ(DecodingParams::from_json(nlohmann::json::object()), d);
  d.n = 0;
  EXPECT_THROW(d.validate(), HarnessError);
  d.n = 1;
  d.max_tokens = 0;
  EXPECT_THROW(d.validate(), HarnessError);
  d.max_tokens = 1;
  d.temperature = -0.5;
  EXPECT_THROW(d.validate(), HarnessError);
}

TEST(PromptHash, SensitiveAndStable) {
  auto p = prompt_for("t", "zs", "Lemma t: True.");
  DecodingParams d;
  const auto h = prompt_hash(p.messages, d);
  EXPECT_EQ(h.size(), 64u);
  EXPECT_EQ(prompt_hash(prompting::messages_from_json(prompting::messages_to_json(p.messages)), d), h);
  auto hot = d;
  hot.temperature = 0.7;
  EXPECT_NE(prompt_hash(p.messages, hot), h);
  auto more = d;
  more.n = 6;
  EXPECT_NE(prompt_hash(p.messages, more), h);
  auto q = p;
  q.messages[1].content += " ";
  EXPECT_NE(prompt_hash(q.messages, d), h);
  q = p;
  q.messages[1].role = Role::kAssistant;
  EXPECT_NE(prompt_hash(q.messages, d), h);
}

TEST(Scripted, ReturnsScriptInOrderAndCycles) {
  ScriptedProvider s({ScriptEntry{{}, {"a", "b", "c"}}}, "default");
  auto p = prompt_for("t", "zs", "q");
  EXPECT_EQ(complete(p, n_of(3), s), (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(complete(p, n_of(5), s), (std::vector<std::string>{"a", "b", "c", "a", "b"}));
}

TEST(Scripted, SelectorsAndDefault) {
  auto doc = nlohmann::json::parse(R"js({
    "default": "(* Please provide more information. *)",
    "entries": [
      {"theorem": "weak_refl", "config": "fs-sim",
       "completions": ["Proof.\n  intros x.\n  constructor.\n  reflexivity.\nQed."]},
      {"theorem": "F.v:other", "completions": "Proof. auto. Qed."},
      {"when_contains": "KEYWORD", "completions": ["kw"]},
      {"turn": 1, "completions": ["second turn"]}
    ]})js");
  auto s = ScriptedProvider::from_json(doc);
  EXPECT_EQ(complete(prompt_for("weak_refl", "fs-sim", "q"), n_of(1), s)[0],
            "Proof.\n  intros x.\n  constructor.\n  reflexivity.\nQed.");
  EXPECT_EQ(complete(prompt_for("weak_refl", "zs", "q"), n_of(1), s)[0],
            "(* Please provide more information. *)");
  EXPECT_EQ(complete(prompt_for("other", "zs", "q"), n_of(1), s)[0], "Proof. auto. Qed.");
  EXPECT_EQ(complete(prompt_for("x", "zs", "has KEYWORD in it"), n_of(1), s)[0], "kw");
  auto turn1 = prompt_for("x", "zs", "q");
  turn1.messages.push_back({Role::kAssistant, "first"});
  turn1.messages.push_back({Role::kUser, "again"});
  EXPECT_EQ(complete(turn1, n_of(1), s)[0], "second turn");
}

TEST(Scripted, EmptyScriptReturnsDefault) {
  auto s = ScriptedProvider::from_json(nlohmann::json{{"default", "I cannot generate a valid proof."}});
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(complete(prompt_for("t" + std::to_string(i), "zs", "q"), n_of(2), s),
              (std::vector<std::string>(2, "I cannot generate a valid proof.")));
  }
}

TEST(Scripted, ParseErrors) {
  auto bad = [](const char* text) {
    try {
      ScriptedProvider::from_json(nlohmann::json::parse(text));
      ADD_FAILURE() << text;
    } catch (const HarnessError& e) {
      EXPECT_EQ(e.code(), ErrorCode::kScriptParseError);
    }
  };
  bad("[]");
  bad(R"({"entries": [{"theorem": "t"}]})");
  bad(R"({"entries": [{"theorem": 3, "completions": ["x"]}]})");
  bad(R"({"entries": [{"bogus": 1, "completions": ["x"]}]})");
  bad(R"({"entries": [{"completions": []}]})");
  coqharness::testing::TempDir d;
  std::ofstream(d / "s.json") << "{ not json";
  EXPECT_THROW(ScriptedProvider::load(d / "s.json"), HarnessError);
}

class CountingProvider : public Provider {
 public:
  CompletionResult complete(const ChatPrompt&, const DecodingParams& params) override {
    ++calls;
    CompletionResult r;
    for (int i = 0; i < params.n; ++i) r.completions.push_back("c" + std::to_string(calls) + "-" + std::to_string(i));
    r.usage = {10, 5};
    r.provider = "counting";
    return r;
  }
  std::string name() const override { return "counting"; }
  int calls = 0;
};

TEST(Cache, MissStoreHit) {
  coqharness::testing::TempDir d;
  CountingProvider inner;
  TranscriptCache cache(d.path());
  CachingProvider cp(&inner, cache, false);
  auto p = prompt_for("t", "zs", "q");
  auto first = cp.complete(p, n_of(3));
  EXPECT_FALSE(first.from_cache);
  auto second = cp.complete(p, n_of(3));
  EXPECT_TRUE(second.from_cache);
  EXPECT_EQ(second.completions, first.completions);
  EXPECT_EQ(inner.calls, 1);
  cp.complete(p, n_of(2));
  EXPECT_EQ(inner.calls, 2);

  // A fresh cache over the same directory replays without any provider.
  TranscriptCache reopened(d.path());
  CachingProvider replay(nullptr, reopened, true);
  auto r = replay.complete(p, n_of(3));
  EXPECT_TRUE(r.from_cache);
  EXPECT_EQ(r.attempts, 0);
  EXPECT_EQ(r.completions, first.completions);
  try {
    replay.complete(prompt_for("t", "zs", "never asked"), n_of(3));
    FAIL();
  } catch (const HarnessError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCacheMiss);
  }
}

TEST(Cache, TranscriptRoundTripAndIntegrity) {
  Transcript t;
  t.messages = {{Role::kSystem, "s"}, {Role::kUser, "u"}};
  t.params = n_of(2);
  t.prompt_hash = prompt_hash(t.messages, t.params);
  t.completions = {"x", "y"};
  t.provider = "scripted";
  t.timestamp = utc_timestamp();
  t.token_usage = {3, 4};
  auto back = Transcript::from_json(t.to_json());
  EXPECT_EQ(back.prompt_hash, t.prompt_hash);
  EXPECT_EQ(back.completions, t.completions);
  EXPECT_EQ(back.params, t.params);
  EXPECT_EQ(back.token_usage, t.token_usage);
  auto j = t.to_json();
  j["messages"][1]["content"] = "tampered";
  EXPECT_THROW(Transcript::from_json(j), HarnessError);
  EXPECT_EQ(t.timestamp.size(), 20u);
  EXPECT_EQ(t.timestamp.back(), 'Z');
}

TEST(Cache, ScopedProviderKeepsContextsApart) {
  auto provider = ScriptedProvider::from_json(nlohmann::json::parse(R"js({"entries": [
    {"theorem": "t", "config": "zs", "completions": ["from zs"]},
    {"theorem": "t", "config": "zs+lem", "completions": ["from zs+lem"]}]})js"));
  // Same messages, different configs: the script answers differently.
  auto a = prompt_for("t", "zs", "q");
  auto b = prompt_for("t", "zs+lem", "q");
  ASSERT_EQ(a.messages, b.messages);
  coqharness::testing::TempDir d;
  TranscriptCache cache(d.path());
  CachingProvider cp(&provider, cache, false);
  EXPECT_EQ(cp.complete(a, n_of(1)).completions, std::vector<std::string>{"from zs"});
  EXPECT_EQ(cp.complete(b, n_of(1)).completions, std::vector<std::string>{"from zs+lem"});

  TranscriptCache reopened(d.path());
  CachingProvider replay(&provider, reopened, true);
  EXPECT_EQ(replay.complete(b, n_of(1)).completions, std::vector<std::string>{"from zs+lem"});
  EXPECT_TRUE(replay.complete(a, n_of(1)).from_cache);

  Transcript t;
  t.messages = a.messages;
  t.params = n_of(1);
  t.scope = provider.cache_scope(a);
  t.prompt_hash = prompt_hash(t.messages, t.params, t.scope);
  t.completions = {"x"};
  t.provider = "scripted";
  EXPECT_NE(t.prompt_hash, prompt_hash(t.messages, t.params));
  EXPECT_EQ(Transcript::from_json(t.to_json()).scope, t.scope);
}

TEST(Cache, ConcurrentStoresStayReadable) {
  coqharness::testing::TempDir d;
  {
    TranscriptCache cache(d.path());
    std::vector<std::thread> threads;
    for (int w = 0; w < 4; ++w) {
      threads.emplace_back([&, w] {
        CountingProvider inner;
        CachingProvider cp(&inner, cache, false);
        for (int i = 0; i < 25; ++i) {
          cp.complete(prompt_for("t", "zs", std::to_string(w) + ":" + std::to_string(i)), n_of(1));
        }
      });
    }
    for (auto& t : threads) t.join();
  }
  TranscriptCache reopened(d.path());
  CachingProvider replay(nullptr, reopened, true);
  for (int w = 0; w < 4; ++w) {
    for (int i = 0; i < 25; ++i) {
      EXPECT_NO_THROW(replay.complete(prompt_for("t", "zs", std::to_string(w) + ":" + std::to_string(i)), n_of(1)));
    }
  }
}

// A local chat-completions endpoint with a scripted sequence of statuses.
class FakeServer {
 public:
  explicit FakeServer(std::vector<int> statuses) : statuses_(std::move(statuses)) {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      std::lock_guard lock(mu_);
      bodies.push_back(nlohmann::json::parse(req.body));
      auth = req.get_header_value("Authorization");
      const int status = hits_ < statuses_.size() ? statuses_[hits_] : 200;
      ++hits_;
      res.status = status;
      if (status != 200) {
        res.set_content("{\"error\":\"slow down\"}", "application/json");
        return;
      }
      const int n = bodies.back().at("n").get<int>();
      nlohmann::json out;
      out["choices"] = nlohmann::json::array();
      for (int i = 0; i < n; ++i) out["choices"].push_back({{"message", {{"content", "Proof. auto. Qed." + std::to_string(i)}}}});
      out["usage"] = {{"prompt_tokens", 7}, {"completion_tokens", 3}};
      res.set_content(out.dump(), "application/json");
    });
    server_.Post("/embed", [](const httplib::Request& req, httplib::Response& res) {
      auto in = nlohmann::json::parse(req.body);
      nlohmann::json out;
      out["vectors"] = nlohmann::json::array();
      for (const auto& t : in.at("texts")) {
        out["vectors"].push_back({static_cast<double>(t.get<std::string>().size()), 1.0});
      }
      res.set_content(out.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeServer() {
    server_.stop();
    thread_.join();
  }
  std::string base() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }
  std::string origin() const { return "http://127.0.0.1:" + std::to_string(port_); }
  std::size_t hits() {
    std::lock_guard lock(mu_);
    return hits_;
  }
  std::vector<nlohmann::json> bodies;
  std::string auth;

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::mutex mu_;
  std::vector<int> statuses_;
  std::size_t hits_ = 0;
};

HttpProviderConfig http_config(const FakeServer& s, std::vector<std::chrono::milliseconds>* sleeps) {
  HttpProviderConfig c;
  c.base_url = s.base();
  c.model_name = "fake-model";
  c.api_key_env = "COQHARNESS_TEST_KEY";
  c.timeout = std::chrono::seconds(5);
  c.sleep = [sleeps](std::chrono::milliseconds d) { sleeps->push_back(d); };
  return c;
}

TEST(Http, RetriesTransientFailures) {
  FakeServer server({429, 429, 200});
  std::vector<std::chrono::milliseconds> sleeps;
  setenv("COQHARNESS_TEST_KEY", "sk-test", 1);
  HttpChatProvider p(http_config(server, &sleeps));
  auto r = p.complete(prompt_for("t", "zs", "q"), n_of(2));
  EXPECT_EQ(r.attempts, 3);
  EXPECT_EQ(server.hits(), 3u);
  EXPECT_EQ(r.completions, (std::vector<std::string>{"Proof. auto. Qed.0", "Proof. auto. Qed.1"}));
  ASSERT_EQ(sleeps.size(), 2u);
  EXPECT_LT(sleeps[0], sleeps[1]);
  EXPECT_EQ(server.auth, "Bearer sk-test");
  const auto& body = server.bodies.back();
  EXPECT_EQ(body.at("model"), "fake-model");
  EXPECT_EQ(body.at("n"), 2);
  EXPECT_EQ(body.at("temperature"), 1.0);
  EXPECT_EQ(body.at("presence_penalty"), 0.1);
  EXPECT_EQ(body.at("messages").size(), 2u);
  EXPECT_EQ(body.at("messages")[0].at("role"), "system");
  EXPECT_EQ(p.usage(), (TokenUsage{7, 3}));
  unsetenv("COQHARNESS_TEST_KEY");
}

TEST(Http, GivesUpAfterFiveTries) {
  FakeServer server({500, 503, 500, 502, 500, 200});
  std::vector<std::chrono::milliseconds> sleeps;
  HttpChatProvider p(http_config(server, &sleeps));
  try {
    p.complete(prompt_for("t", "zs", "q"), n_of(1));
    FAIL();
  } catch (const ProviderError& e) {
    EXPECT_EQ(e.status(), 500);
  }
  EXPECT_EQ(server.hits(), 5u);
  EXPECT_EQ(sleeps.size(), 4u);
}

TEST(Http, ClientErrorsAreNotRetried) {
  FakeServer server({400});
  std::vector<std::chrono::milliseconds> sleeps;
  HttpChatProvider p(http_config(server, &sleeps));
  EXPECT_THROW(p.complete(prompt_for("t", "zs", "q"), n_of(1)), ProviderError);
  EXPECT_EQ(server.hits(), 1u);
}

TEST(Http, BudgetsStopCleanly) {
  FakeServer server({});
  std::vector<std::chrono::milliseconds> sleeps;
  auto cfg = http_config(server, &sleeps);
  cfg.call_budget = 2;
  HttpChatProvider p(cfg);
  p.complete(prompt_for("t", "zs", "a"), n_of(1));
  p.complete(prompt_for("t", "zs", "b"), n_of(1));
  try {
    p.complete(prompt_for("t", "zs", "c"), n_of(1));
    FAIL();
  } catch (const HarnessError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBudgetExceeded);
  }
  EXPECT_EQ(server.hits(), 2u);

  auto tcfg = http_config(server, &sleeps);
  tcfg.token_budget = 10;  // one call uses 7 + 3
  HttpChatProvider q(tcfg);
  q.complete(prompt_for("t", "zs", "a"), n_of(1));
  EXPECT_THROW(q.complete(prompt_for("t", "zs", "b"), n_of(1)), HarnessError);
}

TEST(Http, RateLimitWaits) {
  FakeServer server({});
  std::vector<std::chrono::milliseconds> sleeps;
  auto cfg = http_config(server, &sleeps);
  cfg.rpm_limit = 2;
  HttpChatProvider p(cfg);
  for (int i = 0; i < 3; ++i) p.complete(prompt_for("t", "zs", std::to_string(i)), n_of(1));
  ASSERT_EQ(sleeps.size(), 1u);
  EXPECT_GT(sleeps[0], std::chrono::seconds(50));
}

TEST(Http, CachedRunMakesNoRequests) {
  FakeServer server({});
  std::vector<std::chrono::milliseconds> sleeps;
  HttpChatProvider live(http_config(server, &sleeps));
  coqharness::testing::TempDir d;
  TranscriptCache cache(d.path());
  CachingProvider cp(&live, cache, false);
  auto p = prompt_for("t", "zs", "q");
  auto a = cp.complete(p, n_of(2));
  auto b = cp.complete(p, n_of(2));
  EXPECT_EQ(a.completions, b.completions);
  EXPECT_EQ(server.hits(), 1u);
}

TEST(RemoteEmbedder, PostsTexts) {
  FakeServer server({});
  retriever::RemoteEmbedderConfig cfg;
  cfg.url = server.origin() + "/embed";
  cfg.timeout = std::chrono::seconds(5);
  retriever::RemoteEmbedder e(cfg);
  auto v = e.embed({"ab", "abcd"});
  ASSERT_EQ(v.size(), 2u);
  EXPECT_EQ(v[1], (std::vector<double>{4.0, 1.0}));
  cfg.url = server.origin() + "/missing";
  EXPECT_THROW(retriever::RemoteEmbedder(cfg).embed({"x"}), ProviderError);
}

}  // namespace
