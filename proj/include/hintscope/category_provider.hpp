#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hintscope/transport.hpp"

namespace hintscope {

class CategoryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Website classification source. lookup() returns nullopt when the source
/// has no entry for the domain and throws CategoryError when it fails.
class CategoryProvider {
 public:
  virtual ~CategoryProvider() = default;
  virtual std::optional<std::vector<std::string>> lookup(std::string_view domain) = 0;
};

/// `domain,category[;category...]` per line.
class OfflineCategoryMap : public CategoryProvider {
 public:
  static OfflineCategoryMap from_text(std::string_view text);
  static OfflineCategoryMap from_file(const std::string& path);

  void add(std::string domain, std::vector<std::string> categories);
  std::optional<std::vector<std::string>> lookup(std::string_view domain) override;
  std::size_t size() const { return map_.size(); }

 private:
  std::map<std::string, std::vector<std::string>> map_;
};

/// Client for a URL-classification web service. Issues
/// `GET <endpoint>?domain=<d>` and expects `{"categories": [...]}`.
/// Calls are spaced at least `min_interval` apart.
class RemoteCategoryClient : public CategoryProvider {
 public:
  RemoteCategoryClient(Transport& transport, Url endpoint,
                       std::chrono::milliseconds min_interval = std::chrono::milliseconds(1000));
  std::optional<std::vector<std::string>> lookup(std::string_view domain) override;
  std::size_t calls() const;

 private:
  Transport& transport_;
  Url endpoint_;
  std::chrono::milliseconds min_interval_;
  mutable std::mutex mutex_;
  std::optional<std::chrono::steady_clock::time_point> last_call_;
  std::size_t calls_ = 0;
};

/// Memoizes another provider; each domain reaches the inner provider at most
/// once per instance, failures included.
class CachingCategoryProvider : public CategoryProvider {
 public:
  explicit CachingCategoryProvider(CategoryProvider& inner) : inner_(inner) {}
  std::optional<std::vector<std::string>> lookup(std::string_view domain) override;
  std::size_t inner_calls() const;

 private:
  struct Entry {
    std::optional<std::vector<std::string>> value;
    std::optional<std::string> error;
  };
  CategoryProvider& inner_;
  mutable std::mutex mutex_;
  std::unordered_map<std::string, Entry> cache_;
  std::size_t inner_calls_ = 0;
};

}  // namespace hintscope
