#pragma once

#include <functional>
#include <iosfwd>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hintscope/crawl_record.hpp"
#include "hintscope/registry.hpp"

namespace hintscope {

inline constexpr std::string_view kRecordSchema = "hintscope.crawl-record";
inline constexpr int kRecordSchemaVersion = 1;

class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One JSON object, no trailing newline.
std::string record_to_json_line(const CrawlRecord& record,
                                const HintRegistry& registry = HintRegistry::builtin());

/// Throws SchemaError for foreign schemas or versions and malformed lines.
/// Accept-CH values are re-parsed from their raw form against `registry`.
CrawlRecord record_from_json_line(std::string_view line,
                                  const HintRegistry& registry = HintRegistry::builtin());

/// Serializes records to a stream, one per line. Safe to share between
/// threads.
class RecordWriter {
 public:
  explicit RecordWriter(std::ostream& out, const HintRegistry& registry = HintRegistry::builtin())
      : out_(out), registry_(registry) {}
  void write(const CrawlRecord& record);
  std::size_t count() const;

 private:
  std::ostream& out_;
  const HintRegistry& registry_;
  mutable std::mutex mutex_;
  std::size_t count_ = 0;
};

void read_records(std::istream& in, const std::function<void(CrawlRecord)>& sink,
                  const HintRegistry& registry = HintRegistry::builtin());
std::vector<CrawlRecord> read_records_file(const std::string& path,
                                           const HintRegistry& registry = HintRegistry::builtin());
void write_records_file(const std::string& path, const std::vector<CrawlRecord>& records,
                        const HintRegistry& registry = HintRegistry::builtin());

}  // namespace hintscope
