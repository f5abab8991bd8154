#include <doctest.h>

#include <random>

#include "hintscope/filter_list.hpp"
#include "support.hpp"

using namespace hintscope;

TEST_CASE("supported syntax parses, the rest is skipped and counted") {
  auto rep = load_filter_list(
      "[Adblock Plus 2.0]\n"
      "! comment\n"
      "||tracker.example^\n"
      "@@||cdn.example^\n"
      "/pixel.gif?\n"
      "||ads.example^$third-party\n"
      "||img.example^$image\n"
      "example.com##.banner\n"
      "/ad[0-9]+/\n");
  REQUIRE(rep.rules.size() == 4);
  CHECK(rep.rules[0].kind == FilterRule::Kind::domain_anchor);
  CHECK(rep.rules[0].pattern == "tracker.example^");
  CHECK(rep.rules[1].exception);
  CHECK(rep.rules[2].kind == FilterRule::Kind::plain_substring);
  CHECK(rep.rules[3].pattern == "ads.example^");
  CHECK(rep.skipped.size() == 5);
  std::map<std::string, int> reasons;
  for (const auto& s : rep.skipped) ++reasons[s.reason];
  CHECK(reasons["comment"] == 2);
  CHECK(reasons["cosmetic"] == 1);
  CHECK(reasons["regex"] == 1);
  CHECK(reasons["unsupported-option"] == 1);
}

TEST_CASE("single-line parse examples") {
  CHECK(load_filter_list("||tracker.example^").rules.size() == 1);
  auto c = load_filter_list("! comment");
  CHECK(c.rules.empty());
  CHECK(c.skipped.size() == 1);
  auto e = load_filter_list("@@||cdn.example^");
  REQUIRE(e.rules.size() == 1);
  CHECK(e.rules[0].exception);
  CHECK(e.rules[0].kind == FilterRule::Kind::domain_anchor);
}

TEST_CASE("match_tracker examples") {
  auto one = FilterSet::from_text("||tracker.example^");
  auto v = match_tracker("https://tracker.example/px.gif", one);
  CHECK(v.is_tracker);
  CHECK(v.domain == "tracker.example");
  REQUIRE(v.matched_rule);
  CHECK(v.matched_rule->text == "||tracker.example^");
  CHECK_FALSE(match_tracker("https://nottracker.example/x", one).is_tracker);
  CHECK(match_tracker("https://sub.tracker.example/x", one).is_tracker);
  CHECK_FALSE(match_tracker("https://tracker.example.evil.com/x", one).is_tracker);

  auto both = FilterSet::from_text("||cdn.example^\n@@||cdn.example^\n");
  auto ex = match_tracker("https://cdn.example/x", both);
  CHECK_FALSE(ex.is_tracker);
  CHECK_FALSE(ex.matched_rule);
}

TEST_CASE("separator, wildcard and anchors") {
  auto r = [](const char* rule, const char* url) {
    return rule_matches(load_filter_list(rule).rules.at(0), url);
  };
  CHECK(r("||a.example^", "https://a.example:8080/x"));
  CHECK(r("||a.example^", "https://a.example"));
  CHECK_FALSE(r("||a.example^", "https://a.examples.com/"));
  CHECK(r("/track/*/pixel", "https://x.com/track/abc/pixel.gif"));
  CHECK(r("|https://x.com/", "https://x.com/a"));
  CHECK_FALSE(r("|x.com/", "https://x.com/a"));
  CHECK(r(".gif|", "https://x.com/a.gif"));
  CHECK_FALSE(r(".gif|", "https://x.com/a.gif?z"));
  CHECK(r("||x.com/ads^", "https://x.com/ads?id=1"));
  CHECK_FALSE(r("||x.com/ads^", "https://x.com/adsense"));
}

TEST_CASE("sample filter list fixture") {
  auto rep = load_filter_list(test::fixture("fixtures/sample_filter_list.txt"));
  FilterSet set(rep.rules);
  CHECK(set.match("https://stats.tracker-one.example/collect").is_tracker);
  CHECK(set.match("https://cdn.shop.example/beacon/v1").is_tracker);
  CHECK_FALSE(set.match("https://cdn.shop.example/img/logo.png").is_tracker);
  CHECK_FALSE(set.match("https://allowed.tracker-one.example/collect").is_tracker);
  CHECK(rep.skipped.size() >= 3);
}

namespace {

std::string random_rule(std::mt19937& rng, bool exception) {
  static const std::vector<std::string> hosts{"a.example", "b.example", "track.a.example", "c.example"};
  static const std::vector<std::string> paths{"/px", "/collect", "pixel", "/x/*/y"};
  std::string rule = exception ? "@@" : "";
  if (rng() % 2) {
    rule += "||" + hosts[rng() % hosts.size()] + "^";
  } else {
    rule += paths[rng() % paths.size()];
  }
  return rule;
}

}  // namespace

TEST_CASE("exception rules never add positives; order does not matter" * doctest::description("property")) {
  std::mt19937 rng(2024);
  const std::vector<std::string> urls{"https://a.example/px",           "https://track.a.example/collect",
                                      "https://b.example/x/1/y",        "https://c.example/pixel.gif",
                                      "https://d.example/",             "https://notb.example/px"};
  for (int iter = 0; iter < 200; ++iter) {
    std::vector<std::string> rules;
    int n = 1 + static_cast<int>(rng() % 6);
    for (int i = 0; i < n; ++i) rules.push_back(random_rule(rng, rng() % 4 == 0));
    auto join = [](const std::vector<std::string>& v) {
      std::string s;
      for (const auto& r : v) s += r + "\n";
      return s;
    };
    auto base = FilterSet::from_text(join(rules));
    auto shuffled_rules = rules;
    std::shuffle(shuffled_rules.begin(), shuffled_rules.end(), rng);
    auto shuffled = FilterSet::from_text(join(shuffled_rules));
    auto with_ex = rules;
    with_ex.push_back(random_rule(rng, true));
    auto extended = FilterSet::from_text(join(with_ex));
    for (const auto& u : urls) {
      auto v = base.match(u);
      auto s = shuffled.match(u);
      CHECK(v.is_tracker == s.is_tracker);
      CHECK((v.matched_rule ? v.matched_rule->text : "") == (s.matched_rule ? s.matched_rule->text : ""));
      if (extended.match(u).is_tracker) CHECK(v.is_tracker);
    }
  }
}
