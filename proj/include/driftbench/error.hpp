#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace driftbench {

/// Error thrown by every module. The message is always prefixed with the
/// module name so failures surface with their origin intact.
class Error : public std::runtime_error {
 public:
  Error(std::string_view module, const std::string& message)
      : std::runtime_error(std::string(module) + ": " + message),
        module_(module) {}

  const std::string& module() const { return module_; }

 private:
  std::string module_;
};

}  // namespace driftbench
