#pragma once

#include <stdexcept>
#include <string>

namespace nlicf {

// Base for every error raised by the library. The module tag lets the CLI
// print "[module] message" and pick an exit code.
class Error : public std::runtime_error {
 public:
  Error(std::string module, std::string code, const std::string& detail)
      : std::runtime_error("[" + module + "] " + code + ": " + detail),
        module_(std::move(module)),
        code_(std::move(code)) {}

  const std::string& module() const noexcept { return module_; }
  const std::string& code() const noexcept { return code_; }

 private:
  std::string module_;
  std::string code_;
};

// Bad user input detected before any work is done (config, paths, flags).
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& detail)
      : Error("config", "Invalid", detail) {}
};

}  // namespace nlicf
