#include "hintscope/html_scan.hpp"

#include <cctype>
#include <charconv>
#include <map>

#include "hintscope/text.hpp"

namespace hintscope {

namespace {

void append_utf8(std::string& out, unsigned long cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x110000) {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  bool space = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = !out.empty();
    } else {
      if (space) out.push_back(' ');
      space = false;
      out.push_back(c);
    }
  }
  return out;
}

struct Tag {
  std::string name;  // lowercased, no leading '/'
  bool closing = false;
  std::map<std::string, std::string> attrs;
};

// Parses the tag starting at html[pos] == '<'. Returns the index after '>'.
std::size_t parse_tag(std::string_view html, std::size_t pos, Tag& tag) {
  std::size_t i = pos + 1;
  if (i < html.size() && html[i] == '/') {
    tag.closing = true;
    ++i;
  }
  auto name_start = i;
  while (i < html.size() && !std::isspace(static_cast<unsigned char>(html[i])) && html[i] != '>' &&
         html[i] != '/') {
    ++i;
  }
  tag.name = to_lower(html.substr(name_start, i - name_start));
  while (i < html.size() && html[i] != '>') {
    while (i < html.size() && (std::isspace(static_cast<unsigned char>(html[i])) || html[i] == '/')) ++i;
    if (i >= html.size() || html[i] == '>') break;
    auto an_start = i;
    while (i < html.size() && !std::isspace(static_cast<unsigned char>(html[i])) && html[i] != '=' &&
           html[i] != '>') {
      ++i;
    }
    auto name = to_lower(html.substr(an_start, i - an_start));
    while (i < html.size() && std::isspace(static_cast<unsigned char>(html[i]))) ++i;
    std::string value;
    if (i < html.size() && html[i] == '=') {
      ++i;
      while (i < html.size() && std::isspace(static_cast<unsigned char>(html[i]))) ++i;
      if (i < html.size() && (html[i] == '"' || html[i] == '\'')) {
        char q = html[i++];
        auto v_start = i;
        while (i < html.size() && html[i] != q) ++i;
        value = decode_entities(html.substr(v_start, i - v_start));
        if (i < html.size()) ++i;
      } else {
        auto v_start = i;
        while (i < html.size() && !std::isspace(static_cast<unsigned char>(html[i])) && html[i] != '>') ++i;
        value = decode_entities(html.substr(v_start, i - v_start));
      }
    }
    if (!name.empty()) tag.attrs.emplace(std::move(name), std::move(value));
  }
  return i < html.size() ? i + 1 : html.size();
}

bool is_navigation_rel(std::string_view rel) {
  for (auto r : split(to_lower(rel), ' ')) {
    if (r == "canonical" || r == "alternate" || r == "next" || r == "prev" || r == "author" ||
        r == "license" || r == "search" || r == "help") {
      return true;
    }
  }
  return false;
}

}  // namespace

std::string decode_entities(std::string_view text) {
  static const std::map<std::string, std::string, std::less<>> named = {
      {"amp", "&"}, {"lt", "<"}, {"gt", ">"}, {"quot", "\""}, {"apos", "'"}, {"nbsp", " "},
      {"ndash", "\xE2\x80\x93"}, {"mdash", "\xE2\x80\x94"}};
  std::string out;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '&') {
      out.push_back(text[i]);
      continue;
    }
    auto semi = text.find(';', i);
    if (semi == std::string_view::npos || semi - i > 10) {
      out.push_back('&');
      continue;
    }
    auto ent = text.substr(i + 1, semi - i - 1);
    if (!ent.empty() && ent.front() == '#') {
      unsigned long cp = 0;
      bool hex = ent.size() > 1 && (ent[1] == 'x' || ent[1] == 'X');
      auto digits = ent.substr(hex ? 2 : 1);
      auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), cp, hex ? 16 : 10);
      if (ec == std::errc{} && ptr == digits.data() + digits.size() && !digits.empty()) {
        append_utf8(out, cp);
        i = semi;
        continue;
      }
    } else if (auto it = named.find(ent); it != named.end()) {
      out += it->second;
      i = semi;
      continue;
    }
    out.push_back('&');
  }
  return out;
}

HtmlScan scan_html(std::string_view html) {
  HtmlScan scan;
  if (html.find('\0') != std::string_view::npos) {
    scan.parsed = false;
    return scan;
  }
  std::optional<HtmlAnchor> open_anchor;
  std::string anchor_fallback;
  std::size_t i = 0;
  while (i < html.size()) {
    auto lt = html.find('<', i);
    auto text_end = lt == std::string_view::npos ? html.size() : lt;
    if (open_anchor) open_anchor->text.append(html.substr(i, text_end - i));
    if (lt == std::string_view::npos) break;
    if (html.substr(lt, 4) == "<!--") {
      auto end = html.find("-->", lt + 4);
      i = end == std::string_view::npos ? html.size() : end + 3;
      continue;
    }
    if (lt + 1 < html.size() && (html[lt + 1] == '!' || html[lt + 1] == '?')) {
      auto end = html.find('>', lt);
      i = end == std::string_view::npos ? html.size() : end + 1;
      continue;
    }
    Tag tag;
    i = parse_tag(html, lt, tag);
    if (tag.name.empty()) continue;
    auto attr = [&tag](const char* name) -> const std::string* {
      auto it = tag.attrs.find(name);
      return it == tag.attrs.end() ? nullptr : &it->second;
    };

    if (tag.closing) {
      if (tag.name == "a" && open_anchor) {
        open_anchor->text = collapse_whitespace(decode_entities(open_anchor->text));
        if (open_anchor->text.empty()) open_anchor->text = anchor_fallback;
        scan.anchors.push_back(std::move(*open_anchor));
        open_anchor.reset();
      }
      continue;
    }
    if (tag.name == "a") {
      if (open_anchor) {
        open_anchor->text = collapse_whitespace(decode_entities(open_anchor->text));
        scan.anchors.push_back(std::move(*open_anchor));
        open_anchor.reset();
      }
      if (const auto* href = attr("href")) {
        open_anchor = HtmlAnchor{std::string(trim(*href)), {}};
        anchor_fallback.clear();
        if (const auto* t = attr("aria-label")) {
          anchor_fallback = collapse_whitespace(*t);
        } else if (const auto* t2 = attr("title")) {
          anchor_fallback = collapse_whitespace(*t2);
        }
      }
    } else if (tag.name == "title" && !scan.title) {
      auto end = html.find("</", i);
      auto content = html.substr(i, end == std::string_view::npos ? std::string_view::npos : end - i);
      scan.title = collapse_whitespace(decode_entities(content));
    } else if (tag.name == "script" || tag.name == "style") {
      if (tag.name == "script") {
        if (const auto* src = attr("src"); src && !trim(*src).empty()) {
          scan.resources.push_back({"script", std::string(trim(*src))});
        }
      }
      std::string closing = "</" + tag.name;
      std::size_t end = i;
      for (;;) {
        end = html.find("</", end);
        if (end == std::string_view::npos || starts_with_ci(html.substr(end), closing)) break;
        end += 2;
      }
      i = end == std::string_view::npos ? html.size() : end;
    } else if (tag.name == "img" || tag.name == "iframe" || tag.name == "source") {
      if (const auto* src = attr("src"); src && !trim(*src).empty()) {
        scan.resources.push_back({tag.name, std::string(trim(*src))});
      }
    } else if (tag.name == "link") {
      const auto* href = attr("href");
      const auto* rel = attr("rel");
      if (href && !trim(*href).empty() && !(rel && is_navigation_rel(*rel))) {
        scan.resources.push_back({"link", std::string(trim(*href))});
      }
    }
  }
  if (open_anchor) {
    open_anchor->text = collapse_whitespace(decode_entities(open_anchor->text));
    if (open_anchor->text.empty()) open_anchor->text = anchor_fallback;
    scan.anchors.push_back(std::move(*open_anchor));
  }
  return scan;
}

}  // namespace hintscope
