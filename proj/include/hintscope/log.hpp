#pragma once

#include <functional>
#include <string>
#include <string_view>

namespace hintscope::log {

enum class Level { debug, info, warning, error };

using Sink = std::function<void(Level, std::string_view)>;

// Replaces the process-wide sink. The default writes warnings and errors to
// stderr. Returns the previous sink.
Sink set_sink(Sink sink);

void write(Level level, std::string_view message);
inline void warn(std::string_view message) { write(Level::warning, message); }
inline void info(std::string_view message) { write(Level::info, message); }

}  // namespace hintscope::log
