#include <doctest.h>

#include <filesystem>

#include "hintscope/crawl_engine.hpp"
#include "hintscope/testbed.hpp"
#include "support.hpp"

using namespace hintscope;
using namespace hintscope::testbed;

namespace {

Scenario load(const std::string& name) { return Scenario::from_file(test::fixture_path("scenarios/" + name + "/scenario.json")); }

nlohmann::json expected(const std::string& name) {
  return nlohmann::json::parse(test::fixture("scenarios/" + name + "/expected.json"));
}

HttpTransport loopback(const MockServer& server) {
  HttpTransportOptions o;
  o.loopback_port = static_cast<std::uint16_t>(server.port());
  o.timeout = std::chrono::milliseconds(5000);
  return HttpTransport(o);
}

CrawlConfig fast_config() {
  CrawlConfig c;
  c.throughput_cap = 50e6;
  c.run_id = "tb";
  return c;
}

const BrowserProfile& chrome() { return *ProfileCatalog::builtin().find("chrome-116-desktop"); }

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) out += s + "\n";
  return out;
}

}  // namespace

TEST_SUITE("integration") {
  TEST_CASE("scenarios match their expectations") {
    for (const auto& name : {"start_silent_login_loud", "tracker_third_party", "empty", "multi_site"}) {
      CAPTURE(name);
      MockServer server(load(name));
      auto result = run_end_to_end(server, {});
      REQUIRE_FALSE(result.error);
      auto mismatches = check_expectations(result, expected(name));
      CHECK_MESSAGE(mismatches.empty(), join(mismatches));
      for (const auto& r : result.records) CHECK(r.test_transport);
    }
  }

  TEST_CASE("empty scenario yields an empty report") {
    MockServer server(load("empty"));
    auto result = run_end_to_end(server, {});
    CHECK_FALSE(result.error);
    CHECK(result.records.empty());
    CHECK(result.crawl_errors == 0);
    CHECK(result.report.build.profiles.empty());
    CHECK(result.files.contains("summary.json"));
  }

  TEST_CASE("same scenario and seed give identical reports") {
    auto scenario = load("multi_site");
    PipelineConfig cfg;
    cfg.seed = 99;
    cfg.concurrency = 3;
    MockServer s1(scenario);
    MockServer s2(scenario);
    auto a = run_end_to_end(s1, cfg);
    auto b = run_end_to_end(s2, cfg);
    REQUIRE_FALSE(a.error);
    CHECK(a.files == b.files);
  }

  TEST_CASE("workdir receives intermediate files") {
    test::TempDir dir;
    MockServer server(load("tracker_third_party"));
    PipelineConfig cfg;
    cfg.workdir = dir.path().string();
    auto result = run_end_to_end(server, cfg);
    REQUIRE_FALSE(result.error);
    CHECK(std::filesystem::exists(dir.path() / "discovery.csv"));
    CHECK(std::filesystem::exists(dir.path() / "records.jsonl"));
    CHECK(std::filesystem::exists(dir.path() / "report" / "summary.json"));
  }

  TEST_CASE("serve: configured status and Accept-CH") {
    MockServer server(load("start_silent_login_loud"));
    auto t = loopback(server);
    auto resp = t.get(*Url::parse("https://alpha.example/login"), {});
    CHECK(resp.status == 200);
    CHECK(resp.header("accept-ch") == "sec-ch-ua-full-version-list");
    CHECK(t.get(*Url::parse("https://alpha.example/nope"), {}).status == 404);
    CHECK(server.count("alpha.example", "/login") == 1);
    CHECK(server.count("alpha.example", "/nope") == 1);
  }

  TEST_CASE("one crawl_one costs one top-level request plus its third parties") {
    MockServer server(load("tracker_third_party"));
    auto t = loopback(server);
    Crawler crawler(fast_config(), t, chrome());
    const auto& scenario = server.scenario();
    const Site* target = nullptr;
    for (const auto& s : scenario.sites) {
      if (s.target) target = &s;
    }
    REQUIRE(target);
    std::string path = target->pages.contains("/login") ? "/login" : "/";
    auto rec = crawler.crawl_one({1, target->domain, "https://" + target->domain + path, PageKind::login});
    REQUIRE(rec.ok());
    CHECK(server.count(target->domain, path) == 1);
    CHECK(server.total_requests() == 1 + rec.third_parties.size());
    CHECK_FALSE(rec.third_parties.empty());
  }

  TEST_CASE("sessions do not leak grants") {
    MockServer server(load("start_silent_login_loud"));
    auto t = loopback(server);
    Crawler crawler(fast_config(), t, chrome());
    CrawlTarget target{1, "alpha.example", "https://alpha.example/login", PageKind::login};
    crawler.crawl_one(target);
    crawler.crawl_one(target);
    auto log = server.log();
    REQUIRE(log.size() == 2);
    for (const auto& req : log) {
      CHECK_FALSE(req.headers.contains("sec-ch-ua-full-version-list"));
      CHECK(req.headers.contains("sec-ch-ua"));
    }
  }

  TEST_CASE("batch crawl respects the ethics and concurrency bounds") {
    MockServer server(load("multi_site"));
    auto t = loopback(server);
    auto cfg = fast_config();
    cfg.concurrency = 2;
    cfg.fetch_third_parties = false;
    Crawler crawler(cfg, t, chrome());
    std::vector<CrawlTarget> targets;
    for (const auto& s : server.scenario().sites) {
      if (s.target) targets.push_back({s.rank, s.domain, "https://" + s.domain + "/", PageKind::start});
    }
    REQUIRE(targets.size() >= 2);
    auto manifest = crawler.crawl_batch(targets, [](const CrawlRecord&) {});
    CHECK(manifest.records == targets.size());
    CHECK(manifest.test_transport);
    CHECK(server.max_in_flight() <= 2);
    for (const auto& tg : targets) CHECK(server.count(tg.domain, "/") == 1);
  }

  TEST_CASE("counter endpoint and reset") {
    MockServer server(load("start_silent_login_loud"));
    auto t = loopback(server);
    t.get(*Url::parse("https://alpha.example/"), {});
    auto resp = t.get(*Url::parse("https://" + std::string(kControlHost) + "/__counters"), {});
    CHECK(resp.status == 200);
    auto j = nlohmann::json::parse(resp.body);
    CHECK(j == server.counters_json());
    CHECK(server.count("alpha.example", "/") == 1);
    server.reset_counters();
    CHECK(server.total_requests() == 0);
    CHECK(server.log().empty());
  }
}

TEST_CASE("scenario validation") {
  auto bad_resource = nlohmann::json::parse(R"({"name":"x","sites":[
    {"domain":"a.example","pages":{"/":{"resources":["https://missing.example/a.js"]}}}]})");
  CHECK_THROWS_AS(Scenario::from_json(bad_resource).validate(), ScenarioError);
  auto dup = nlohmann::json::parse(R"({"name":"x","sites":[
    {"domain":"a.example","pages":{"/":{}}},{"domain":"A.example","pages":{"/":{}}}]})");
  CHECK_THROWS_AS(Scenario::from_json(dup).validate(), ScenarioError);
  CHECK_THROWS_AS(Scenario::from_file(test::fixture_path("scenarios/nope.json")), ScenarioError);
  for (const auto& name : {"start_silent_login_loud", "tracker_third_party", "empty", "multi_site"}) {
    CHECK_NOTHROW(load(name).validate());
  }
}

TEST_CASE("render_page emits links and resources") {
  Page p;
  p.title = "T";
  p.links = {{"/login", "Sign in"}};
  p.resources = {"https://x.example/a.js", "https://x.example/s.css", "https://x.example/i.png"};
  auto html = render_page(p);
  CHECK(html.find("<a href=\"/login\">Sign in</a>") != std::string::npos);
  CHECK(html.find("<script src=\"https://x.example/a.js\"") != std::string::npos);
  CHECK(html.find("href=\"https://x.example/s.css\"") != std::string::npos);
  CHECK(html.find("<img src=\"https://x.example/i.png\"") != std::string::npos);
}
