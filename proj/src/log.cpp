#include "whitebait/log.hpp"

#include <cstdlib>
#include <string>

#include <spdlog/sinks/stdout_color_sinks.h>

namespace whitebait {

namespace {

std::shared_ptr<spdlog::logger> make_logger() {
  auto logger = spdlog::stderr_color_mt("whitebait");
  logger->set_pattern("[%l] %v");
  const char* env = std::getenv("WHITEBAIT_LOG");
  std::string level = env ? env : "warn";
  logger->set_level(spdlog::level::from_str(level));
  return logger;
}

}  // namespace

spdlog::logger& log() {
  static std::shared_ptr<spdlog::logger> logger = make_logger();
  return *logger;
}

}  // namespace whitebait
