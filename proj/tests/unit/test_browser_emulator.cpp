#include <doctest.h>

#include <random>
#include <sstream>

#include "hintscope/browser_emulator.hpp"
#include "support.hpp"

using namespace hintscope;

namespace {

std::string all_hints_header() {
  std::string h;
  for (const auto& d : HintRegistry::builtin().descriptors()) h += d.header_name + ",";
  return h;
}

}  // namespace

TEST_CASE("support matrix fixture matches the shipped profiles cell for cell") {
  const auto& reg = HintRegistry::builtin();
  const auto& catalog = ProfileCatalog::builtin();
  const auto text = test::fixture("fixtures/browser_support_matrix.csv");
  auto lines = data_lines(text);
  REQUIRE(lines.size() == 23);
  auto header = split_csv(lines[0]);
  REQUIRE(header.size() == 17);
  CHECK(catalog.profiles().size() == 15);
  std::map<std::string, HintSet> expected;
  for (std::size_t c = 2; c < header.size(); ++c) expected[header[c]];
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto row = split_csv(lines[i]);
    REQUIRE(row.size() == header.size());
    const auto* d = reg.find(row[1]);
    REQUIRE_MESSAGE(d, row[1]);
    for (std::size_t c = 2; c < row.size(); ++c) {
      if (row[c] == "1") expected[header[c]].insert(d->id);
    }
  }
  for (const auto& [name, hints] : expected) {
    const auto* p = catalog.find(name);
    REQUIRE_MESSAGE(p, name);
    INFO(name);
    CHECK(reg.names(p->supported) == reg.names(hints));
  }
}

TEST_CASE("non-Chromium and iOS profiles never emit hints") {
  const auto& catalog = ProfileCatalog::builtin();
  auto parsed = HintRegistry::builtin().parse_accept_ch(all_hints_header());
  for (const auto& p : catalog.profiles()) {
    if (p.browser != "firefox" && p.browser != "safari" && p.platform != Platform::ios) continue;
    INFO(p.name);
    auto cache = receive_accept_ch(p, GrantCache{}, "https://x.example", parsed);
    CHECK(request_headers(p, cache, "https://x.example").empty());
  }
}

TEST_CASE("Chrome desktop defaults and grants") {
  const auto& catalog = ProfileCatalog::builtin();
  const auto* chrome = catalog.find("chrome-116-desktop");
  REQUIRE(chrome);
  const auto& reg = HintRegistry::builtin();
  auto none = request_headers(*chrome, GrantCache{}, "https://a.example");
  CHECK(none.size() == 3);
  CHECK(none.contains("Sec-CH-UA"));
  CHECK(none.contains("Sec-CH-UA-Mobile"));
  CHECK(none.contains("Sec-CH-UA-Platform"));

  auto cache = receive_accept_ch(*chrome, GrantCache{}, "https://a.example", reg.parse_accept_ch("rtt"));
  auto with_rtt = request_headers(*chrome, cache, "https://a.example");
  CHECK(with_rtt.size() == 4);
  CHECK(with_rtt.contains("RTT"));
  // Grants are per origin.
  CHECK(request_headers(*chrome, cache, "https://b.example").size() == 3);
  CHECK(request_headers(*chrome, cache, "https://A.example/").contains("RTT"));
  // Unsupported hints are dropped.
  cache = receive_accept_ch(*chrome, cache, "https://a.example", reg.parse_accept_ch("sec-ch-ua-wow64, width"));
  CHECK(request_headers(*chrome, cache, "https://a.example").size() == 3);
  // A fresh session forgets everything.
  auto fresh = reset_session(cache);
  CHECK(fresh.empty());
  CHECK(fresh.session_id() != cache.session_id());
}

TEST_CASE("profile lookup by alias") {
  const auto& catalog = ProfileCatalog::builtin();
  CHECK(catalog.find("firefox-desktop") == catalog.find("firefox-116-desktop"));
  CHECK(catalog.find("Chrome-116-Desktop"));
  CHECK_FALSE(catalog.find("netscape-4"));
}

TEST_CASE("catalog validation") {
  CHECK_THROWS_AS(ProfileCatalog::from_json(R"({"profiles":[{"name":"x","supported":[],"default":["DPR"]}]})"),
                  ProfileError);
  CHECK_THROWS_AS(ProfileCatalog::from_json(R"({"profiles":[{"name":"x","supported":["Nope"]}]})"), ProfileError);
  auto gap = ProfileCatalog::from_json(R"({"profiles":[{"name":"x","supported":["DPR"],"default":["DPR"]}]})");
  CHECK_THROWS_WITH_AS(request_headers(gap.profiles()[0], GrantCache{}, "https://a.example"),
                       doctest::Contains("profile value gap"), ProfileError);
}

TEST_CASE("emitted headers stay within supported hints" * doctest::description("property")) {
  const auto& reg = HintRegistry::builtin();
  const auto& catalog = ProfileCatalog::builtin();
  std::mt19937 rng(31337);
  for (int iter = 0; iter < 300; ++iter) {
    const auto& p = catalog.profiles()[rng() % catalog.profiles().size()];
    std::string header;
    for (const auto& d : reg.descriptors()) {
      if (rng() % 3 == 0) header += d.header_name + ",";
    }
    auto cache = receive_accept_ch(p, GrantCache{}, "https://o.example", reg.parse_accept_ch(header));
    for (const auto& [name, value] : request_headers(p, cache, "https://o.example")) {
      const auto* d = reg.find(name);
      REQUIRE(d);
      CHECK(p.supported.contains(d->id));
    }
    CHECK(request_headers(p, reset_session(cache), "https://o.example").size() == p.default_low_entropy.size());
  }
}
