#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hintscope {

struct HtmlAnchor {
  std::string href;
  std::string text;  // entity-decoded, whitespace-collapsed
};

struct HtmlResource {
  std::string tag;  // script, img, link, iframe, source
  std::string url;  // attribute value as written
};

struct HtmlScan {
  bool parsed = true;  // false for bodies that are not text (e.g. NUL bytes)
  std::optional<std::string> title;
  std::vector<HtmlAnchor> anchors;
  std::vector<HtmlResource> resources;
};

/// Tolerant single-pass scan of an HTML document for links, the title and
/// subresource references. Never throws.
HtmlScan scan_html(std::string_view html);

std::string decode_entities(std::string_view text);

}  // namespace hintscope
