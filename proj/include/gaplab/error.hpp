#pragma once

#include <stdexcept>
#include <string>

namespace gaplab {

// Every failure mode in the library throws one of these. The `kind` string is
// stable and machine-checkable; `what()` adds context (location, values).
class NumericsError : public std::runtime_error {
public:
    NumericsError(std::string kind, const std::string& detail)
        : std::runtime_error(kind + ": " + detail), m_kind(std::move(kind)) {}

    const std::string& kind() const noexcept { return m_kind; }

private:
    std::string m_kind;
};

[[noreturn]] inline void fail(const std::string& kind, const std::string& detail) {
    throw NumericsError(kind, detail);
}

}  // namespace gaplab
