#include <gtest/gtest.h>

#include <future>
#include <thread>

#include "oto/core/hash.hpp"
#include "oto/nn/checkpoint.hpp"
#include "oto/service/service.hpp"
#include "support.hpp"

#include <httplib.h>
#include <json.hpp>

using namespace oto;
using namespace oto::service;
using nlohmann::json;

namespace {

ServiceConfig tiny_config() {
  const auto& m = test::tiny_models();
  ServiceConfig c;
  c.classifier_checkpoint = m.classifier;
  c.generator_checkpoint = m.generator;
  c.decode.max_length = 40;
  c.port = 0;
  return c;
}

const InferenceService& svc() {
  static const InferenceService s(tiny_config());
  return s;
}

const std::string& png() {
  static const std::string bytes = test::slurp(test::tiny_models().sample_png);
  return bytes;
}

}  // namespace

TEST(Handlers, ClassifyValidImage) {
  const auto r = svc().classify(png(), "image/png");
  ASSERT_EQ(r.status, 200) << r.body;
  const auto j = json::parse(r.body);
  ASSERT_EQ(j["probabilities"].size(), 5u);
  double sum = 0;
  for (auto& [k, v] : j["probabilities"].items()) {
    EXPECT_TRUE(parse_label(k).has_value()) << k;
    sum += v.get<double>();
  }
  EXPECT_NEAR(sum, 1.0, 1e-6);
  EXPECT_TRUE(parse_label(j["label"].get<std::string>()).has_value());
}

TEST(Handlers, ClientErrors) {
  EXPECT_EQ(svc().classify("hello, world", "image/png").status, 400);
  EXPECT_EQ(svc().classify(png(), "text/plain").status, 400);
  EXPECT_EQ(svc().summarize("hello", "image/jpeg").status, 400);
  const std::string big(20u << 20, 'x');
  EXPECT_EQ(svc().classify(big, "image/png").status, 413);
  EXPECT_EQ(svc().summarize(big, "image/png").status, 413);
  const auto bad = svc().summarize(png(), "image/png", std::string("NotAClass"));
  EXPECT_EQ(bad.status, 422);
  EXPECT_TRUE(json::parse(bad.body).contains("error"));
}

TEST(Handlers, SummarizeAndOverride) {
  const auto r = svc().summarize(png(), "image/png");
  ASSERT_EQ(r.status, 200) << r.body;
  EXPECT_FALSE(json::parse(r.body)["summary"].get<std::string>().empty());
  const auto forced = svc().summarize(png(), "image/png", std::string("Normal"));
  ASSERT_EQ(forced.status, 200);
  EXPECT_EQ(json::parse(forced.body)["label"], "Normal");
  EXPECT_EQ(svc().summarize(png(), "image/png").body, r.body);
}

TEST(Handlers, HealthReportsBothHashes) {
  const auto& m = test::tiny_models();
  const auto h = svc().health();
  EXPECT_EQ(h.status, 200);
  const auto j = json::parse(h.body);
  EXPECT_EQ(j["classifier"]["hash"], nn::checkpoint_hash(m.classifier));
  EXPECT_EQ(j["generator"]["hash"], nn::checkpoint_hash(m.generator));
  EXPECT_EQ(j["generator"]["d_model"], 16);
  EXPECT_EQ(svc().health().body, h.body);
}

TEST(Handlers, ConcurrentIdenticalRequestsAgree) {
  const auto expected = svc().summarize(png(), "image/png").body;
  std::vector<std::future<std::string>> jobs;
  for (int i = 0; i < 6; ++i) {
    jobs.push_back(std::async(std::launch::async, [] { return svc().summarize(png(), "image/png").body; }));
  }
  for (auto& j : jobs) EXPECT_EQ(j.get(), expected);
}

TEST(Startup, UnloadableCheckpointThrows) {
  test::TempDir dir;
  auto c = tiny_config();
  c.classifier_checkpoint = dir / "missing";
  EXPECT_THROW(InferenceService{c}, CheckpointError);
  c = tiny_config();
  c.generator_checkpoint = c.classifier_checkpoint;
  EXPECT_THROW(InferenceService{c}, CheckpointError);
}

TEST(Http, EndToEnd) {
  HttpServer server(svc());
  const int port = server.bind();
  ASSERT_GT(port, 0);
  std::thread loop([&] { server.listen(); });
  httplib::Client cli("127.0.0.1", port);
  cli.set_read_timeout(60, 0);

  auto health = cli.Get("/health");
  ASSERT_TRUE(health);
  EXPECT_EQ(health->status, 200);
  EXPECT_EQ(health->body, svc().health().body);

  auto cls = cli.Post("/classify", png(), "image/png");
  ASSERT_TRUE(cls);
  EXPECT_EQ(cls->status, 200);
  EXPECT_EQ(cls->body, svc().classify(png(), "image/png").body);

  httplib::Headers headers{{"X-Label-Override", "Normal"}};
  auto sum = cli.Post("/summarize", headers, png(), "image/png");
  ASSERT_TRUE(sum);
  EXPECT_EQ(sum->status, 200);
  EXPECT_EQ(json::parse(sum->body)["label"], "Normal");

  headers = {{"X-Label-Override", "NotAClass"}};
  auto bad = cli.Post("/summarize", headers, png(), "image/png");
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 422);

  auto text = cli.Post("/classify", "plain words", "text/plain");
  ASSERT_TRUE(text);
  EXPECT_EQ(text->status, 400);

  auto big = cli.Post("/classify", std::string(20u << 20, 'x'), "image/png");
  ASSERT_TRUE(big);
  EXPECT_EQ(big->status, 413);
  EXPECT_TRUE(json::parse(big->body).contains("error"));

  server.stop();
  loop.join();
}
