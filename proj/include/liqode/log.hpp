#pragma once

#include <cstdlib>
#include <iostream>
#include <string>

namespace liqode {

enum class log_level { error = 0, info = 1, debug = 2 };

// SOLVER_LOG=error|info|debug; default error
inline log_level current_log_level() {
    static const log_level lvl = [] {
        const char* e = std::getenv("SOLVER_LOG");
        if (!e) return log_level::error;
        const std::string s(e);
        if (s == "debug") return log_level::debug;
        if (s == "info") return log_level::info;
        return log_level::error;
    }();
    return lvl;
}

inline void log_line(log_level lvl, const std::string& msg) {
    if (static_cast<int>(lvl) <= static_cast<int>(current_log_level())) {
        static constexpr const char* tags[3] = {"error", "info", "debug"};
        std::cerr << "[" << tags[static_cast<int>(lvl)] << "] " << msg << "\n";
    }
}

inline void log_info(const std::string& msg) { log_line(log_level::info, msg); }
inline void log_debug(const std::string& msg) { log_line(log_level::debug, msg); }
inline void log_error(const std::string& msg) { log_line(log_level::error, msg); }

} // namespace liqode
