#include "shb/log.hpp"

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>

namespace shb::log {

namespace {

Level from_env() {
  const char* v = std::getenv("SHB_VERBOSITY");
  if (!v) return Level::Quiet;
  const int n = std::atoi(v);
  return n >= 2 ? Level::Debug : n == 1 ? Level::Info : Level::Quiet;
}

std::atomic<int>& current() {
  static std::atomic<int> lvl{static_cast<int>(from_env())};
  return lvl;
}

std::mutex& sink() {
  static std::mutex m;
  return m;
}

void emit(const char* tag, const std::string& msg) {
  std::lock_guard<std::mutex> lock(sink());
  std::cerr << "[shb " << tag << "] " << msg << '\n';
}

}  // namespace

Level level() { return static_cast<Level>(current().load()); }
void set_level(Level lvl) { current().store(static_cast<int>(lvl)); }

void info(const std::string& msg) {
  if (level() >= Level::Info) emit("info", msg);
}
void debug(const std::string& msg) {
  if (level() >= Level::Debug) emit("debug", msg);
}
void warn(const std::string& msg) { emit("warn", msg); }

}  // namespace shb::log
