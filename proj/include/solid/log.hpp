#pragma once

// Minimal leveled logging to stderr. Thread-safe; lines are never interleaved.

#include <atomic>
#include <iostream>
#include <mutex>
#include <string_view>

namespace solid::log {

enum class Level { Debug, Info, Warn, Error, Off };

inline std::atomic<Level>& threshold() {
    static std::atomic<Level> level{Level::Warn};
    return level;
}

inline void set_level(Level l) { threshold().store(l); }

inline void write(Level l, std::string_view msg) {
    if (l < threshold().load()) return;
    static std::mutex mu;
    static constexpr std::string_view kNames[] = {"debug", "info", "warn", "error"};
    std::lock_guard lock(mu);
    std::cerr << "[" << kNames[static_cast<int>(l)] << "] " << msg << '\n';
}

inline void debug(std::string_view m) { write(Level::Debug, m); }
inline void info(std::string_view m) { write(Level::Info, m); }
inline void warn(std::string_view m) { write(Level::Warn, m); }
inline void error(std::string_view m) { write(Level::Error, m); }

}  // namespace solid::log
