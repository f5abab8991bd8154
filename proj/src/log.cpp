#include "hintscope/log.hpp"

#include <iostream>
#include <mutex>

namespace hintscope::log {

namespace {
std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}
Sink& current_sink() {
  static Sink sink = [](Level level, std::string_view msg) {
    if (level < Level::warning) return;
    std::cerr << (level == Level::error ? "error: " : "warning: ") << msg << '\n';
  };
  return sink;
}
}  // namespace

Sink set_sink(Sink sink) {
  std::lock_guard lock(sink_mutex());
  std::swap(sink, current_sink());
  return sink;
}

void write(Level level, std::string_view message) {
  std::lock_guard lock(sink_mutex());
  if (current_sink()) current_sink()(level, message);
}

}  // namespace hintscope::log
