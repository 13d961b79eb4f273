#pragma once

#include <stdexcept>
#include <string>

namespace qsafe {

/// Domain error carrying a stable code such as "E_DENOMINATOR".
class QsafeError : public std::runtime_error {
public:
    QsafeError(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    [[nodiscard]] const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

} // namespace qsafe
