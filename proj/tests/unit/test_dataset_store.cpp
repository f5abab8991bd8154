#include <doctest.h>

#include <random>
#include <sstream>

#include "hintscope/dataset_store.hpp"
#include "support.hpp"

using namespace hintscope;

namespace {

const HintRegistry& reg() { return HintRegistry::builtin(); }

HintSet hints(std::string_view header) { return reg().parse_accept_ch(header).recognized; }

std::vector<CrawlRecord> ingest(const std::string& text, IngestReport* report = nullptr) {
  std::istringstream in(text);
  std::vector<CrawlRecord> out;
  auto r = ingest_archive(in, FieldMap{}, [&](CrawlRecord c) { out.push_back(std::move(c)); });
  if (report) *report = r;
  return out;
}

CrawlRecord rec(std::string domain, std::string url, PageKind kind, std::optional<std::string> accept,
                int status = 200) {
  CrawlRecord r;
  r.target_domain = std::move(domain);
  r.url = std::move(url);
  r.page_kind = kind;
  r.status = status;
  if (accept) r.accept_ch = reg().parse_accept_ch(*accept);
  return r;
}

SiteProfile profile(std::string domain, std::string_view accept = "") {
  SiteProfile p;
  p.domain = std::move(domain);
  p.hints_by_page_kind[PageKind::start] = hints(accept);
  p.page_kinds_ok.insert(PageKind::start);
  p.recompute_max_level(reg());
  return p;
}

/// Counts lookups and optionally fails.
class CountingProvider : public CategoryProvider {
 public:
  std::optional<std::vector<std::string>> lookup(std::string_view domain) override {
    ++calls;
    if (fail) throw CategoryError("service down");
    if (domain == "example.com") return std::vector<std::string>{"Online Shopping"};
    return std::nullopt;
  }
  int calls = 0;
  bool fail = false;
};

}  // namespace

TEST_CASE("ingest_archive examples") {
  IngestReport report;
  auto one = ingest(R"({"url":"https://a.example/","timestamp":"2023-01-01T00:00:00Z","headers":{"accept-ch":"DPR"}})",
                    &report);
  REQUIRE(one.size() == 1);
  CHECK(one[0].page_kind == PageKind::start);
  REQUIRE(one[0].accept_ch);
  CHECK(one[0].accept_ch->recognized == hints("DPR"));
  CHECK(report.emitted == 1);

  auto missing = ingest(R"({"url":"https://a.example/","timestamp":"2023-01-01T00:00:00Z"})" "\n"
                        "garbage\n"
                        R"({"timestamp":"2023-01-01T00:00:00Z","headers":{}})",
                        &report);
  CHECK(missing.empty());
  CHECK(report.rows == 3);
  CHECK(report.skipped == 3);
  CHECK(report.skip_reasons.size() == 3);
}

TEST_CASE("archive fixture keeps order and timestamps") {
  IngestReport report;
  auto recs = ingest(test::fixture("fixtures/archive_sample.jsonl"), &report);
  REQUIRE(recs.size() == 3);
  CHECK(report.skipped == 0);
  for (std::size_t i = 1; i < recs.size(); ++i) CHECK(recs[i - 1].timestamp < recs[i].timestamp);
  CHECK(recs[0].target_domain == "shop.example");
  CHECK(recs[0].rank == 12);
  CHECK(recs[0].accept_ch->recognized == hints("DPR, Viewport-Width"));
  CHECK(recs[1].accept_ch->recognized == hints("Sec-CH-UA-Model, RTT"));
  CHECK_FALSE(recs[2].accept_ch);
  CHECK(recs[2].status == 301);
  CHECK(recs[0].run_id == "archive");
}

TEST_CASE("build_profiles aggregates per registrable domain") {
  std::vector<CrawlRecord> records = {
      rec("www.a.example", "https://www.a.example/", PageKind::start, "sec-ch-ua-model, x-typo"),
      rec("a.example", "https://accounts.a.example/login", PageKind::login, "rtt"),
      rec("a.example", "https://evil.example/login", PageKind::login, "dpr"),
      rec("b.example", "https://b.example/", PageKind::start, std::nullopt, 500),
  };
  records[0].rank = 9;
  ThirdPartyObservation tp{"ads.example", "https://ads.example/t.js", 200, std::nullopt,
                           reg().parse_accept_ch("sec-ch-ua-full-version-list")};
  records[0].third_parties.push_back(tp);
  auto filters = FilterSet::from_text("||ads.example^\n");
  auto report = build_profiles(records, reg(), &filters);
  CHECK(report.records == 4);
  CHECK(report.failed_records == 1);
  CHECK(report.login_domain_mismatches == 1);
  REQUIRE(report.profiles.size() == 2);
  const auto& a = report.profiles[0];
  CHECK(a.domain == "a.example");
  CHECK(a.rank == 9);
  CHECK(a.hints_by_page_kind.at(PageKind::start) == hints("Sec-CH-UA-Model"));
  CHECK(a.hints_by_page_kind.at(PageKind::login) == hints("RTT"));
  CHECK(a.max_level == HintLevel::high);
  CHECK(a.unrecognized_tokens == std::set<std::string>{"x-typo"});
  CHECK(a.tracker_linked_third_parties == std::vector<std::string>{"ads.example"});
  CHECK(a.requesting_third_parties().at("ads.example") == hints("Sec-CH-UA-Full-Version-List"));
  CHECK(a.rba_status == RbaStatus::unknown);
  const auto& b = report.profiles[1];
  CHECK(b.page_kinds_ok.empty());
  CHECK_FALSE(b.max_level);
}

TEST_CASE("align_datasets examples") {
  auto a = std::vector{profile("x.com"), profile("y.com", "dpr")};
  auto b = std::vector{profile("y.com", "rtt"), profile("z.com")};
  auto out = align_datasets(a, b);
  REQUIRE(out.size() == 1);
  CHECK(out[0].domain == "y.com");
  CHECK(out[0].a.all_hints() == hints("DPR"));
  CHECK(out[0].b.all_hints() == hints("RTT"));

  auto sub = align_datasets({profile("accounts.google.com")}, {profile("google.com")});
  REQUIRE(sub.size() == 1);
  CHECK(sub[0].domain == "google.com");
  CHECK(align_datasets({profile("x.com")}, {profile("z.com")}).empty());

  auto dup = align_datasets({profile("www.y.com", "dpr"), profile("y.com", "ect")}, {profile("y.com")});
  REQUIRE(dup.size() == 1);
  CHECK(dup[0].a.all_hints() == hints("DPR, ECT"));
}

TEST_CASE("align_datasets equals domain intersection" * doctest::description("property")) {
  std::mt19937_64 rng(11);
  for (int round = 0; round < 100; ++round) {
    std::set<std::string> da, db;
    std::vector<SiteProfile> a, b;
    for (int i = 0; i < 15; ++i) {
      auto d = "d" + std::to_string(rng() % 25) + ".com";
      if (da.insert(d).second) a.push_back(profile(d));
      auto e = "d" + std::to_string(rng() % 25) + ".com";
      if (db.insert(e).second) b.push_back(profile(e));
    }
    std::set<std::string> expected;
    for (const auto& d : da) {
      if (db.count(d)) expected.insert(d);
    }
    std::set<std::string> got;
    for (const auto& p : align_datasets(a, b)) got.insert(p.domain);
    CHECK(got == expected);
  }
}

TEST_CASE("join_labels examples") {
  auto ranks = parse_rank_list("a.example\nb.example\nexample.com\n");
  CHECK(ranks.at("example.com") == 3);
  auto ranks2 = parse_rank_list("1,x.example\n250,y.example\n");
  CHECK(ranks2.at("y.example") == 250);
  auto rba = parse_rba_labels("example.com,rba\nb.example,no-rba\n");
  CHECK_THROWS(parse_rba_labels("example.com,maybe\n"));

  auto offline = OfflineCategoryMap::from_text("example.com,Online Shopping\nnews.example,News;Media\n");
  CachingCategoryProvider cats(offline);
  std::vector<SiteProfile> ps = {profile("example.com"), profile("other.example"), profile("news.example")};
  join_labels(ps, {&ranks, &cats, &rba});
  CHECK(ps[0].rank == 3);
  CHECK(ps[0].rba_status == RbaStatus::rba);
  CHECK(ps[0].categories == std::vector<std::string>{"Online Shopping"});
  CHECK_FALSE(ps[1].rank);
  CHECK(ps[1].rba_status == RbaStatus::unknown);
  CHECK_FALSE(ps[1].categories);
  CHECK(ps[2].categories == std::vector<std::string>{"News", "Media"});
}

TEST_CASE("category failures are not fatal and lookups are memoized") {
  CountingProvider inner;
  CachingCategoryProvider cache(inner);
  std::vector<SiteProfile> ps = {profile("example.com"), profile("example.com"), profile("x.example")};
  join_labels(ps, {nullptr, &cache, nullptr});
  join_labels(ps, {nullptr, &cache, nullptr});
  CHECK(inner.calls == 2);
  CHECK(cache.inner_calls() == 2);
  CHECK(ps[0].categories == std::vector<std::string>{"Online Shopping"});

  CountingProvider broken;
  broken.fail = true;
  CachingCategoryProvider cache2(broken);
  std::vector<SiteProfile> qs = {profile("example.com")};
  CHECK_NOTHROW(join_labels(qs, {nullptr, &cache2, nullptr}));
  CHECK_FALSE(qs[0].categories);
}

TEST_CASE("remote category client") {
  test::FakeTransport t;
  t.add("https://cats.example/lookup?domain=example.com", 200, R"({"categories":["Online Shopping"]})");
  t.add("https://cats.example/lookup?domain=unknown.example", 404, "");
  t.add("https://cats.example/lookup?domain=bad.example", 200, "not json");
  RemoteCategoryClient client(t, *Url::parse("https://cats.example/lookup"), std::chrono::milliseconds(1));
  CHECK(client.lookup("example.com") == std::vector<std::string>{"Online Shopping"});
  CHECK_FALSE(client.lookup("unknown.example"));
  CHECK_THROWS_AS(client.lookup("bad.example"), CategoryError);
  CHECK_THROWS_AS(client.lookup("down.example"), CategoryError);
  CHECK(client.calls() == 4);
}

TEST_CASE("merge_profile unions and keeps labels") {
  auto a = profile("a.example", "dpr");
  a.rba_status = RbaStatus::rba;
  auto b = profile("a.example", "sec-ch-ua-full-version-list");
  b.rba_status = RbaStatus::no_rba;
  b.vantages.insert({"eu", "x"});
  merge_profile(a, b, reg());
  CHECK(a.all_hints() == hints("DPR, Sec-CH-UA-Full-Version-List"));
  CHECK(a.max_level == HintLevel::very_high);
  CHECK(a.rba_status == RbaStatus::rba);
  CHECK(a.vantages.size() == 1);
  CHECK(to_string(RbaStatus::no_rba) == "no-rba");
  CHECK(parse_rba_status("unknown") == RbaStatus::unknown);
}
