#include "hintscope/category_provider.hpp"

#include <thread>

#include <json.hpp>

#include "hintscope/text.hpp"
#include "hintscope/url.hpp"

namespace hintscope {

OfflineCategoryMap OfflineCategoryMap::from_text(std::string_view text) {
  OfflineCategoryMap out;
  for (auto line : data_lines(text)) {
    auto fields = split_csv(line);
    if (fields.size() < 2) throw CategoryError("bad category line: " + std::string(line));
    std::vector<std::string> cats;
    for (auto c : split(fields[1], ';')) {
      auto t = trim(c);
      if (!t.empty()) cats.emplace_back(t);
    }
    out.add(std::string(trim(fields[0])), std::move(cats));
  }
  return out;
}

OfflineCategoryMap OfflineCategoryMap::from_file(const std::string& path) {
  return from_text(read_file(path));
}

void OfflineCategoryMap::add(std::string domain, std::vector<std::string> categories) {
  map_[to_lower(domain)] = std::move(categories);
}

std::optional<std::vector<std::string>> OfflineCategoryMap::lookup(std::string_view domain) {
  auto it = map_.find(to_lower(domain));
  if (it == map_.end()) return std::nullopt;
  return it->second;
}

RemoteCategoryClient::RemoteCategoryClient(Transport& transport, Url endpoint,
                                           std::chrono::milliseconds min_interval)
    : transport_(transport), endpoint_(std::move(endpoint)), min_interval_(min_interval) {}

std::optional<std::vector<std::string>> RemoteCategoryClient::lookup(std::string_view domain) {
  auto host = to_lower(domain);
  if (!is_valid_hostname(host)) throw CategoryError("not a host name: " + host);
  {
    std::unique_lock lock(mutex_);
    auto now = std::chrono::steady_clock::now();
    if (last_call_ && now - *last_call_ < min_interval_) {
      auto wait = min_interval_ - (now - *last_call_);
      last_call_ = now + wait;
      lock.unlock();
      std::this_thread::sleep_for(wait);
      lock.lock();
    } else {
      last_call_ = now;
    }
    ++calls_;
  }
  Url url = endpoint_;
  url.query = (url.query && !url.query->empty() ? *url.query + "&" : std::string()) + "domain=" + host;
  HttpResponse resp;
  try {
    resp = transport_.get(url, {{"Accept", "application/json"}});
  } catch (const TransportError& e) {
    throw CategoryError("category service unreachable (" + e.tag() + "): " + e.what());
  }
  if (resp.status == 404) return std::nullopt;
  if (resp.status != 200) throw CategoryError("category service returned " + std::to_string(resp.status));
  try {
    auto j = nlohmann::json::parse(resp.body);
    auto it = j.find("categories");
    if (it == j.end() || it->is_null()) return std::nullopt;
    return it->get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw CategoryError(std::string("bad category response: ") + e.what());
  }
}

std::size_t RemoteCategoryClient::calls() const {
  std::lock_guard lock(mutex_);
  return calls_;
}

std::optional<std::vector<std::string>> CachingCategoryProvider::lookup(std::string_view domain) {
  auto key = to_lower(domain);
  // Held across the inner call so concurrent lookups of one domain do not
  // both reach the provider.
  std::lock_guard lock(mutex_);
  auto it = cache_.find(key);
  if (it == cache_.end()) {
    ++inner_calls_;
    Entry e;
    try {
      e.value = inner_.lookup(key);
    } catch (const CategoryError& err) {
      e.error = err.what();
    }
    it = cache_.emplace(key, std::move(e)).first;
  }
  if (it->second.error) throw CategoryError(*it->second.error);
  return it->second.value;
}

std::size_t CachingCategoryProvider::inner_calls() const {
  std::lock_guard lock(mutex_);
  return inner_calls_;
}

}  // namespace hintscope
