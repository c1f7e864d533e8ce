#pragma once

#include <stdexcept>
#include <string>

namespace hmdc {

// Vector/matrix dimensions do not line up for the requested operation.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// An argument is outside its documented range (bad rank, non-finite data, ...).
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// No plan can reach the requested compression target.
class InfeasibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Weight-container parse/serialize failure, one code per failure class.
class ContainerError : public std::runtime_error {
public:
    enum class Code {
        BadMagic,
        Truncated,        // file ends before the header is complete
        LengthMismatch,   // payload byte count differs from the manifest
        UnknownKind,
        BadManifest,
        Io,
    };

    ContainerError(Code code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    Code code() const noexcept { return code_; }

private:
    Code code_;
};

} // namespace hmdc
