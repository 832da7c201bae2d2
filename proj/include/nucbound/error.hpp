#ifndef NUCBOUND_ERROR_HPP
#define NUCBOUND_ERROR_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

namespace nucbound {

enum class ErrorKind : std::uint8_t {
    ShapeDataMismatch,
    NonFiniteEntry,
    ShapeMismatch,
    EmptyVector,
    ModeOutOfRange,
    InvalidTolerance,
    InvalidOrder, /// operation restricted to a particular tensor order
    ZeroTensor,
    InvalidArgument,
};

inline const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::ShapeDataMismatch: return "ShapeDataMismatch";
    case ErrorKind::NonFiniteEntry: return "NonFiniteEntry";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::EmptyVector: return "EmptyVector";
    case ErrorKind::ModeOutOfRange: return "ModeOutOfRange";
    case ErrorKind::InvalidTolerance: return "InvalidTolerance";
    case ErrorKind::InvalidOrder: return "InvalidOrder";
    case ErrorKind::ZeroTensor: return "ZeroTensor";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace nucbound

#endif // NUCBOUND_ERROR_HPP
