#pragma once

#include <stdexcept>
#include <string>

namespace triad {

struct DimensionError : std::runtime_error {
    explicit DimensionError(const std::string& m) : std::runtime_error("dimension error: " + m) {}
};

struct DomainError : std::runtime_error {
    explicit DomainError(const std::string& m) : std::runtime_error("domain error: " + m) {}
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& m) : std::runtime_error("config error: " + m) {}
};

struct ProtocolError : std::runtime_error {
    explicit ProtocolError(const std::string& m) : std::runtime_error("protocol error: " + m) {}
};

struct IntegrityError : std::runtime_error {
    explicit IntegrityError(const std::string& m) : std::runtime_error("integrity error: " + m) {}
};

struct OverflowError : std::runtime_error {
    explicit OverflowError(const std::string& m) : std::runtime_error("overflow error: " + m) {}
};

struct SessionError : std::runtime_error {
    explicit SessionError(const std::string& m) : std::runtime_error("session error: " + m) {}
};

struct FormatError : std::runtime_error {
    explicit FormatError(const std::string& m) : std::runtime_error("format error: " + m) {}
};

} // namespace triad
