#pragma once

#include <string>

namespace shb::log {

enum class Level { Quiet = 0, Info = 1, Debug = 2 };

// Initialised from SHB_VERBOSITY (0, 1, 2); default is Quiet.
Level level();
void set_level(Level lvl);

void info(const std::string& msg);
void debug(const std::string& msg);
void warn(const std::string& msg);

}  // namespace shb::log
