#pragma once

#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace pronto::log {

enum class Level { kError = 0, kInfo = 1, kDebug = 2 };

// Level comes from PRONTO_LOG={error|info|debug}; default info.
inline Level level() {
    static const Level lvl = [] {
        const char* env = std::getenv("PRONTO_LOG");
        if (env == nullptr) return Level::kInfo;
        if (std::strcmp(env, "error") == 0) return Level::kError;
        if (std::strcmp(env, "debug") == 0) return Level::kDebug;
        return Level::kInfo;
    }();
    return lvl;
}

inline void emit(Level lvl, const char* tag, const char* fmt, va_list ap) {
    if (lvl > level()) return;
    std::fprintf(stderr, "[%s] ", tag);
    std::vfprintf(stderr, fmt, ap);
    std::fputc('\n', stderr);
}

inline void error(const char* fmt, ...) {
    va_list ap;
    va_start(ap, fmt);
    emit(Level::kError, "error", fmt, ap);
    va_end(ap);
}

inline void info(const char* fmt, ...) {
    va_list ap;
    va_start(ap, fmt);
    emit(Level::kInfo, "info", fmt, ap);
    va_end(ap);
}

inline void debug(const char* fmt, ...) {
    va_list ap;
    va_start(ap, fmt);
    emit(Level::kDebug, "debug", fmt, ap);
    va_end(ap);
}

}  // namespace pronto::log
