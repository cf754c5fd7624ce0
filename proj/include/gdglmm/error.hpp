#pragma once

#include <stdexcept>
#include <string>

namespace gdglmm {

/// Error raised anywhere in the library. Carries the module that raised it
/// and a short kebab-case code so the CLI can emit one machine-parseable line.
class Error : public std::runtime_error {
public:
    Error(std::string module, std::string code, const std::string& message)
        : std::runtime_error(message), module_(std::move(module)), code_(std::move(code)) {}

    const std::string& module() const noexcept { return module_; }
    const std::string& code() const noexcept { return code_; }

private:
    std::string module_;
    std::string code_;
};

}  // namespace gdglmm
