#include "hintscope/record_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "hintscope/text.hpp"

namespace hintscope {

using nlohmann::ordered_json;

std::string_view to_string(PageKind kind) { return kind == PageKind::start ? "start" : "login"; }

std::optional<PageKind> parse_page_kind(std::string_view text) {
  auto t = to_lower(trim(text));
  if (t == "start") return PageKind::start;
  if (t == "login") return PageKind::login;
  return std::nullopt;
}

std::string format_timestamp(std::chrono::sys_seconds t) {
  using namespace std::chrono;
  auto day = floor<days>(t);
  year_month_day ymd{day};
  hh_mm_ss hms{t - day};
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:%02ld:%02ldZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<long>(hms.hours().count()), static_cast<long>(hms.minutes().count()),
                static_cast<long>(hms.seconds().count()));
  return buf;
}

std::optional<std::chrono::sys_seconds> parse_timestamp(std::string_view text) {
  using namespace std::chrono;
  text = trim(text);
  if (text.empty()) return std::nullopt;
  auto num = [](std::string_view s, int& out) {
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && p == s.data() + s.size();
  };
  if (text.find('-') == std::string_view::npos) {
    long long epoch = 0;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), epoch);
    if (ec != std::errc{} || p != text.data() + text.size()) return std::nullopt;
    return sys_seconds{seconds{epoch}};
  }
  int y, mo, d, h = 0, mi = 0, s = 0;
  if (text.size() < 10 || !num(text.substr(0, 4), y) || text[4] != '-' || !num(text.substr(5, 2), mo) ||
      text[7] != '-' || !num(text.substr(8, 2), d)) {
    return std::nullopt;
  }
  auto rest = text.substr(10);
  long offset_seconds = 0;
  if (!rest.empty()) {
    if (rest.front() != 'T' && rest.front() != ' ') return std::nullopt;
    if (rest.size() < 9 || !num(rest.substr(1, 2), h) || rest[3] != ':' || !num(rest.substr(4, 2), mi) ||
        rest[6] != ':' || !num(rest.substr(7, 2), s)) {
      return std::nullopt;
    }
    rest = rest.substr(9);
    if (!rest.empty() && rest.front() == '.') {
      auto end = rest.find_first_not_of("0123456789", 1);
      rest = end == std::string_view::npos ? std::string_view{} : rest.substr(end);
    }
    if (rest == "Z" || rest.empty()) {
    } else if ((rest.front() == '+' || rest.front() == '-') && rest.size() == 6 && rest[3] == ':') {
      int oh, om;
      if (!num(rest.substr(1, 2), oh) || !num(rest.substr(4, 2), om)) return std::nullopt;
      offset_seconds = (oh * 3600L + om * 60L) * (rest.front() == '+' ? 1 : -1);
    } else {
      return std::nullopt;
    }
  }
  year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 60) return std::nullopt;
  return sys_days{ymd} + hours{h} + minutes{mi} + seconds{s} - seconds{offset_seconds};
}

namespace {

ordered_json accept_ch_json(const std::optional<ParsedAcceptCh>& parsed, const HintRegistry& registry) {
  if (!parsed) return nullptr;
  return {{"raw", parsed->raw},
          {"recognized", registry.names(parsed->recognized)},
          {"unrecognized", parsed->unrecognized}};
}

std::optional<ParsedAcceptCh> accept_ch_from(const ordered_json& j, const HintRegistry& registry) {
  if (j.is_null()) return std::nullopt;
  auto raw = j.at("raw").get<std::vector<std::string>>();
  if (!raw.empty()) return registry.parse_accept_ch(raw);
  // Hand-authored records may list names only.
  std::string joined;
  for (const auto& key : {"recognized", "unrecognized"}) {
    for (const auto& n : j.value(key, std::vector<std::string>{})) joined += n + ",";
  }
  auto parsed = registry.parse_accept_ch(joined);
  parsed.raw.clear();
  return parsed;
}

template <class T>
void put_optional(ordered_json& j, const char* key, const std::optional<T>& v) {
  if (v) {
    j[key] = *v;
  } else {
    j[key] = nullptr;
  }
}

template <class T>
std::optional<T> get_optional(const ordered_json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->template get<T>();
}

}  // namespace

std::string record_to_json_line(const CrawlRecord& r, const HintRegistry& registry) {
  ordered_json j;
  j["schema"] = kRecordSchema;
  j["version"] = kRecordSchemaVersion;
  j["run_id"] = r.run_id;
  put_optional(j, "rank", r.rank);
  j["target_domain"] = r.target_domain;
  j["url"] = r.url;
  j["page_kind"] = to_string(r.page_kind);
  j["vantage"] = {{"region", r.vantage.region}, {"isp", r.vantage.isp}};
  j["timestamp"] = format_timestamp(r.timestamp);
  put_optional(j, "status", r.status);
  put_optional(j, "error", r.error);
  j["accept_ch"] = accept_ch_json(r.accept_ch, registry);
  auto tps = ordered_json::array();
  for (const auto& tp : r.third_parties) {
    ordered_json t;
    t["domain"] = tp.domain;
    t["resource_url"] = tp.resource_url;
    put_optional(t, "status", tp.status);
    put_optional(t, "error", tp.error);
    t["accept_ch"] = accept_ch_json(tp.accept_ch, registry);
    tps.push_back(std::move(t));
  }
  j["third_parties"] = std::move(tps);
  j["test_transport"] = r.test_transport;
  return j.dump();
}

CrawlRecord record_from_json_line(std::string_view line, const HintRegistry& registry) {
  ordered_json j;
  try {
    j = ordered_json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed record: ") + e.what());
  }
  if (!j.is_object() || j.value("schema", "") != kRecordSchema) {
    throw SchemaError("not a crawl record (schema field missing or foreign)");
  }
  if (j.value("version", -1) != kRecordSchemaVersion) {
    throw SchemaError("unsupported record schema version " + j.value("version", nlohmann::json()).dump());
  }
  try {
    CrawlRecord r;
    r.run_id = j.value("run_id", "");
    r.rank = get_optional<long>(j, "rank");
    r.target_domain = j.at("target_domain").get<std::string>();
    r.url = j.at("url").get<std::string>();
    auto kind = parse_page_kind(j.at("page_kind").get<std::string>());
    if (!kind) throw SchemaError("bad page_kind");
    r.page_kind = *kind;
    const auto& v = j.at("vantage");
    r.vantage = {v.value("region", ""), v.value("isp", "")};
    auto ts = parse_timestamp(j.at("timestamp").get<std::string>());
    if (!ts) throw SchemaError("bad timestamp");
    r.timestamp = *ts;
    r.status = get_optional<int>(j, "status");
    r.error = get_optional<std::string>(j, "error");
    r.accept_ch = accept_ch_from(j.value("accept_ch", ordered_json()), registry);
    for (const auto& t : j.value("third_parties", ordered_json::array())) {
      ThirdPartyObservation tp;
      tp.domain = t.at("domain").get<std::string>();
      tp.resource_url = t.value("resource_url", "");
      tp.status = get_optional<int>(t, "status");
      tp.error = get_optional<std::string>(t, "error");
      tp.accept_ch = accept_ch_from(t.value("accept_ch", ordered_json()), registry);
      r.third_parties.push_back(std::move(tp));
    }
    r.test_transport = j.value("test_transport", false);
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed record: ") + e.what());
  }
}

void RecordWriter::write(const CrawlRecord& record) {
  auto line = record_to_json_line(record, registry_);
  std::lock_guard lock(mutex_);
  out_ << line << '\n';
  out_.flush();
  ++count_;
}

std::size_t RecordWriter::count() const {
  std::lock_guard lock(mutex_);
  return count_;
}

void read_records(std::istream& in, const std::function<void(CrawlRecord)>& sink,
                  const HintRegistry& registry) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      sink(record_from_json_line(line, registry));
    } catch (const SchemaError& e) {
      throw SchemaError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

std::vector<CrawlRecord> read_records_file(const std::string& path, const HintRegistry& registry) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<CrawlRecord> out;
  read_records(in, [&out](CrawlRecord r) { out.push_back(std::move(r)); }, registry);
  return out;
}

void write_records_file(const std::string& path, const std::vector<CrawlRecord>& records,
                        const HintRegistry& registry) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  RecordWriter writer(out, registry);
  for (const auto& r : records) writer.write(r);
}

}  // namespace hintscope
