#include "permsig/diagnostics.hpp"

#include <iostream>
#include <mutex>

namespace permsig {
namespace {

std::mutex& handler_mutex() {
  static std::mutex m;
  return m;
}

WarningHandler& handler_slot() {
  static WarningHandler h;
  return h;
}

}  // namespace

WarningHandler set_warning_handler(WarningHandler handler) {
  std::lock_guard lock(handler_mutex());
  WarningHandler previous = std::move(handler_slot());
  handler_slot() = std::move(handler);
  return previous;
}

void warn(const std::string& message) {
  WarningHandler h;
  {
    std::lock_guard lock(handler_mutex());
    h = handler_slot();
  }
  if (h) {
    h(message);
    return;
  }
  std::lock_guard lock(handler_mutex());
  std::cerr << "warning: " << message << '\n';
}

}  // namespace permsig
