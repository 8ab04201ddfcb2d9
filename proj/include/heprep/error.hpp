#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace heprep {

/// Base of every error the toolkit raises. `code()` is a stable
/// machine-readable tag ("parse", "schema", "range", ...); `what()` is
/// the human message.
class Error : public std::runtime_error
{
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code))
    {
    }

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

class PathError : public Error
{
public:
    explicit PathError(const std::string& message) : Error("path", message) {}
};

class ParseError : public Error
{
public:
    ParseError(const std::string& message, std::size_t line, std::size_t column)
        : Error("parse", message + " at line " + std::to_string(line) + ", column " +
                             std::to_string(column)),
          line_(line), column_(column)
    {
    }

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

class CompressionError : public Error
{
public:
    explicit CompressionError(const std::string& message) : Error("compression", message) {}
};

/// Well-formed XML that does not follow the heprep grammar, or a
/// document that fails model validation.
class SchemaError : public Error
{
public:
    explicit SchemaError(const std::string& message) : Error("schema", message) {}
};

class ValidationError : public Error
{
public:
    explicit ValidationError(const std::string& message) : Error("validation", message) {}
};

class OpenError : public Error
{
public:
    explicit OpenError(const std::string& message) : Error("open", message) {}
};

class TransportError : public Error
{
public:
    explicit TransportError(const std::string& message, int status = 0)
        : Error("transport", message), status_(status)
    {
    }

    /// HTTP status when the failure was a non-2xx reply, 0 otherwise.
    int status() const noexcept { return status_; }

private:
    int status_;
};

class RangeError : public Error
{
public:
    explicit RangeError(const std::string& message) : Error("range", message) {}
};

class FormatError : public Error
{
public:
    explicit FormatError(const std::string& message) : Error("format", message) {}
};

class ConfigError : public Error
{
public:
    explicit ConfigError(const std::string& message) : Error("config", message) {}
};

class FrameError : public Error
{
public:
    explicit FrameError(const std::string& message) : Error("frame", message) {}
};

class StartupError : public Error
{
public:
    explicit StartupError(const std::string& message) : Error("startup", message) {}
};

} // namespace heprep
