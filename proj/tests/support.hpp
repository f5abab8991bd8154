#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <random>
#include <string>
#include <vector>

#include "hintscope/text.hpp"
#include "hintscope/transport.hpp"

namespace hintscope::test {

inline std::string fixture_path(const std::string& rel) { return std::string(HINTSCOPE_TEST_DIR) + "/" + rel; }

inline std::string fixture(const std::string& rel) { return read_file(fixture_path(rel)); }

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "hs") {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / (tag + "-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string file(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

/// In-memory transport keyed by absolute URL. Unknown URLs fail with a
/// "dns" transport error.
class FakeTransport : public Transport {
 public:
  struct Call {
    std::string url;
    RequestHeaders headers;
  };

  void add(const std::string& url, int status, std::string body = "",
           std::vector<std::pair<std::string, std::string>> headers = {}) {
    HttpResponse r;
    r.status = status;
    r.body = std::move(body);
    for (auto& [k, v] : headers) r.headers.emplace_back(to_lower(k), v);
    responses_[url] = std::move(r);
  }
  void fail(const std::string& url, std::string tag) { failures_[url] = std::move(tag); }

  HttpResponse get(const Url& url, const RequestHeaders& headers) override {
    std::lock_guard lock(mutex_);
    calls_.push_back({url.str(), headers});
    auto key = url.str();
    if (auto f = failures_.find(key); f != failures_.end()) throw TransportError(f->second, "injected " + f->second);
    auto it = responses_.find(key);
    if (it == responses_.end()) throw TransportError("dns", "no such host in fake: " + key);
    return it->second;
  }

  std::vector<Call> calls() const {
    std::lock_guard lock(mutex_);
    return calls_;
  }
  std::size_t count(const std::string& url) const {
    std::lock_guard lock(mutex_);
    std::size_t n = 0;
    for (const auto& c : calls_) n += c.url == url;
    return n;
  }

 private:
  mutable std::mutex mutex_;
  std::map<std::string, HttpResponse> responses_;
  std::map<std::string, std::string> failures_;
  std::vector<Call> calls_;
};

}  // namespace hintscope::test
