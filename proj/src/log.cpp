#include "slmdp/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace slmdp {

LogLevel log_level() {
  static LogLevel cached = [] {
    const char* v = std::getenv("SLMDP_LOG");
    if (!v) return LogLevel::Warn;
    if (std::strcmp(v, "error") == 0) return LogLevel::Error;
    if (std::strcmp(v, "warn") == 0) return LogLevel::Warn;
    if (std::strcmp(v, "info") == 0) return LogLevel::Info;
    if (std::strcmp(v, "debug") == 0) return LogLevel::Debug;
    return LogLevel::Warn;
  }();
  return cached;
}

void log_line(LogLevel level, const std::string& msg) {
  static const char* names[] = {"error", "warn", "info", "debug"};
  std::fprintf(stderr, "[%s] %s\n", names[static_cast<int>(level)], msg.c_str());
}

}  // namespace slmdp
