#pragma once

#include <functional>
#include <string>

namespace permsig {

using WarningHandler = std::function<void(const std::string&)>;

/// Installs the process-wide warning sink and returns the previous one.
/// The default handler writes "warning: <msg>" to stderr. A handler may
/// throw to turn warnings into errors.
WarningHandler set_warning_handler(WarningHandler handler);

void warn(const std::string& message);

/// RAII swap of the warning handler, restored on scope exit.
class ScopedWarningHandler {
 public:
  explicit ScopedWarningHandler(WarningHandler handler)
      : previous_(set_warning_handler(std::move(handler))) {}
  ~ScopedWarningHandler() { set_warning_handler(std::move(previous_)); }
  ScopedWarningHandler(const ScopedWarningHandler&) = delete;
  ScopedWarningHandler& operator=(const ScopedWarningHandler&) = delete;

 private:
  WarningHandler previous_;
};

}  // namespace permsig
