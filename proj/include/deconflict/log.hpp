#pragma once

#include <cstdio>
#include <cstdlib>
#include <mutex>
#include <string>

namespace deconflict {

/// Diagnostics level, read once from DECONFLICT_LOG: unset/"0"/"off" silent,
/// "1"/"info" progress lines, "2"/"debug" per-node detail. Logs go to stderr
/// so machine-read stdout (CSV, JSON) stays clean.
enum class LogLevel { none = 0, info = 1, debug = 2 };

inline LogLevel log_level() {
  static const LogLevel lvl = [] {
    const char* env = std::getenv("DECONFLICT_LOG");
    if (env == nullptr) return LogLevel::none;
    const std::string v(env);
    if (v.empty() || v == "0" || v == "off") return LogLevel::none;
    if (v == "2" || v == "debug") return LogLevel::debug;
    return LogLevel::info;
  }();
  return lvl;
}

inline void log_line(LogLevel at, const std::string& msg) {
  if (static_cast<int>(log_level()) < static_cast<int>(at)) return;
  static std::mutex mu;
  const std::lock_guard<std::mutex> lock(mu);
  std::fprintf(stderr, "%s\n", msg.c_str());
}

inline void log_info(const std::string& msg) { log_line(LogLevel::info, msg); }
inline void log_debug(const std::string& msg) {
  log_line(LogLevel::debug, msg);
}

}  // namespace deconflict
