#pragma once

#include <string_view>

// Default data files compiled into the library. Every loader that accepts
// one of these also accepts an on-disk override.
namespace hintscope::embedded {

std::string_view registry_csv();
std::string_view indicators_txt();
std::string_view browser_profiles_json();
std::string_view public_suffix_list();

}  // namespace hintscope::embedded
