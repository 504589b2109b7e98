#pragma once

#include <sstream>
#include <string>

namespace slmdp {

enum class LogLevel { Error = 0, Warn = 1, Info = 2, Debug = 3 };

// Level comes from the SLMDP_LOG environment variable
// (error|warn|info|debug), default warn. Output goes to stderr.
LogLevel log_level();
void log_line(LogLevel level, const std::string& msg);

#define SLMDP_LOG_AT(lvl, expr)                           \
  do {                                                    \
    if (static_cast<int>(lvl) <= static_cast<int>(::slmdp::log_level())) { \
      std::ostringstream oss__;                           \
      oss__ << expr;                                      \
      ::slmdp::log_line(lvl, oss__.str());                \
    }                                                     \
  } while (0)

#define SLMDP_ERROR(expr) SLMDP_LOG_AT(::slmdp::LogLevel::Error, expr)
#define SLMDP_WARN(expr) SLMDP_LOG_AT(::slmdp::LogLevel::Warn, expr)
#define SLMDP_INFO(expr) SLMDP_LOG_AT(::slmdp::LogLevel::Info, expr)
#define SLMDP_DEBUG(expr) SLMDP_LOG_AT(::slmdp::LogLevel::Debug, expr)

}  // namespace slmdp
