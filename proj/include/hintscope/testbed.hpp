#pragma once

#include <atomic>
#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "hintscope/crawl_record.hpp"
#include "hintscope/login_discovery.hpp"
#include "hintscope/report.hpp"

namespace httplib {
class Server;
}

namespace hintscope::testbed {

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Link {
  std::string href;
  std::string text;
};

struct Page {
  int status = 200;
  std::string title;
  std::vector<Link> links;
  std::vector<std::string> resources;
  std::optional<std::string> accept_ch;
  /// Location header for 3xx pages.
  std::optional<std::string> redirect;
};

struct Site {
  std::string domain;  // virtual host name
  std::optional<long> rank;
  /// Included in the discovery input.
  bool target = false;
  std::map<std::string, Page> pages;  // path -> page
};

/// Declarative synthetic web. See tests/scenarios/README.md for the format.
struct Scenario {
  std::string name;
  std::uint64_t seed = 0;
  std::chrono::milliseconds latency{0};
  std::vector<Site> sites;
  std::vector<std::string> filter_list;
  std::map<std::string, std::string> rba;  // domain -> status
  std::vector<Vantage> vantages{{"lab", "loopback"}};

  static Scenario from_json(const nlohmann::json& j);
  static Scenario from_file(const std::string& path);
  /// Every resource must resolve to a page of some site (a 404 page counts)
  /// and hosts must be distinct. Throws ScenarioError.
  void validate() const;
  const Site* find_site(std::string_view host) const;
};

struct LoggedRequest {
  std::string host;
  std::string path;
  std::map<std::string, std::string> headers;  // lowercased names
  std::uint64_t seq = 0;
};

/// Control host answering `/__counters` with the counters as JSON.
inline constexpr std::string_view kControlHost = "testbed.control";

/// Serves a scenario over plain HTTP on 127.0.0.1. Sites are selected by
/// the Host header. Safe to query while requests are in flight.
class MockServer {
 public:
  explicit MockServer(Scenario scenario, int port = 0);
  ~MockServer();
  MockServer(const MockServer&) = delete;
  MockServer& operator=(const MockServer&) = delete;

  int port() const { return port_; }
  const Scenario& scenario() const { return scenario_; }

  std::size_t count(std::string_view host, std::string_view path) const;
  std::size_t total_requests() const;
  std::size_t max_in_flight() const { return max_in_flight_.load(); }
  std::vector<LoggedRequest> log() const;
  nlohmann::json counters_json() const;
  void reset_counters();

 private:
  void handle(const std::string& host, const std::string& path, const std::map<std::string, std::string>& headers,
              int& status, std::vector<std::pair<std::string, std::string>>& out_headers, std::string& body,
              std::string& content_type);

  const Scenario scenario_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;
  mutable std::mutex mutex_;
  std::map<std::pair<std::string, std::string>, std::size_t> counts_;
  std::vector<LoggedRequest> log_;
  std::atomic<int> in_flight_{0};
  std::atomic<int> max_in_flight_{0};
  std::uint64_t seq_ = 0;
};

std::string render_page(const Page& page);

struct PipelineConfig {
  std::uint64_t seed = 0;
  unsigned concurrency = 4;
  std::string profile = "chrome-116-desktop";
  bool fetch_third_parties = true;
  /// When set, intermediate files (discovery, records, report) go here.
  std::optional<std::string> workdir;
};

struct StageError {
  std::string stage;  // serve, discover, crawl, analyze
  std::string message;
};

struct EndToEndResult {
  std::vector<DiscoveryResult> discovery;
  std::vector<CrawlRecord> records;
  AnalysisReport report;
  std::map<std::string, std::string> files;  // rendered report
  std::optional<StageError> error;
  std::size_t crawl_errors = 0;
};

/// discover -> crawl -> analyze against a running server.
EndToEndResult run_end_to_end(MockServer& server, const PipelineConfig& config);

/// Compares a result with an expectation document. Returns one message per
/// mismatch; empty means the expectations hold.
std::vector<std::string> check_expectations(const EndToEndResult& result, const nlohmann::json& expected);

}  // namespace hintscope::testbed
