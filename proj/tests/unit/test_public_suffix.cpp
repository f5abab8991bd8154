#include <doctest.h>

#include <random>
#include <regex>
#include <sstream>

#include "hintscope/public_suffix.hpp"
#include "support.hpp"

using namespace hintscope;

TEST_CASE("registrable domain examples") {
  const auto& psl = PublicSuffixList::builtin();
  CHECK(psl.registrable_domain("login.example.com") == "example.com");
  CHECK(psl.registrable_domain("a.b.example.co.uk") == "example.co.uk");
  CHECK(psl.registrable_domain("accounts.google.com") == "google.com");
  CHECK_THROWS_WITH_AS(psl.registrable_domain("co.uk"), doctest::Contains("no registrable domain"), DomainError);
  CHECK(psl.public_suffix("a.b.example.co.uk") == "co.uk");
  CHECK(psl.try_registrable_domain("127.0.0.1") == "127.0.0.1");
  CHECK(psl.rule_count() > 5000);
}

TEST_CASE("official public suffix test vectors (ASCII subset)") {
  const auto& psl = PublicSuffixList::builtin();
  std::istringstream in(test::fixture("fixtures/psl_test_vectors.txt"));
  std::regex call(R"re(checkPublicSuffix\((null|'([^']*)'), (null|'([^']*)')\);)re");
  std::string line;
  int checked = 0;
  while (std::getline(in, line)) {
    std::smatch m;
    if (trim(line).starts_with("//") || !std::regex_search(line, m, call)) continue;
    if (m[1] == "null") continue;
    std::string input = m[2];
    bool ascii = std::all_of(input.begin(), input.end(), [](unsigned char c) { return c < 0x80; });
    if (!ascii || input.find("xn--") != std::string::npos) continue;
    std::optional<std::string> expected;
    if (m[3] != "null") expected = m[4].str();
    INFO(input);
    CHECK(psl.try_registrable_domain(to_lower(input)) == expected);
    ++checked;
  }
  CHECK(checked >= 55);
}

TEST_CASE("wildcard and exception rules") {
  auto psl = PublicSuffixList::parse("com\n*.ck\n!www.ck\n");
  CHECK(psl.try_registrable_domain("a.b.ck") == "a.b.ck");
  CHECK_FALSE(psl.try_registrable_domain("b.ck"));
  CHECK(psl.try_registrable_domain("www.ck") == "www.ck");
  CHECK(psl.try_registrable_domain("x.www.ck") == "www.ck");
  CHECK(psl.try_registrable_domain("x.example.com") == "example.com");
  CHECK(psl.try_registrable_domain("x.unlisted") == "x.unlisted");
}

TEST_CASE("registrable_domain is idempotent" * doctest::description("property")) {
  const auto& psl = PublicSuffixList::builtin();
  std::mt19937 rng(99);
  const std::vector<std::string> suffixes{"com", "co.uk", "github.io", "de", "example", "org.au", "blogspot.com"};
  const std::vector<std::string> labels{"www", "login", "a", "cdn", "shop", "x1", "mail"};
  for (int i = 0; i < 1000; ++i) {
    std::string host = suffixes[rng() % suffixes.size()];
    int depth = 1 + static_cast<int>(rng() % 4);
    for (int d = 0; d < depth; ++d) host = labels[rng() % labels.size()] + "." + host;
    auto once = psl.try_registrable_domain(host);
    REQUIRE(once);
    CHECK(psl.try_registrable_domain(*once) == once);
  }
}
