#pragma once

#include <stdexcept>
#include <string>

namespace stockgan {

// Broad failure class; maps 1:1 onto the CLI exit codes.
enum class ErrorKind { Config = 2, Data = 3, Numeric = 4 };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string code, const std::string& what)
        : std::runtime_error(what), kind_(kind), code_(std::move(code)) {}

    ErrorKind kind() const noexcept { return kind_; }
    // Stable, greppable identifier such as "ROW_ERROR".
    const std::string& code() const noexcept { return code_; }
    int exit_code() const noexcept { return static_cast<int>(kind_); }

private:
    ErrorKind kind_;
    std::string code_;
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, "CONFIG_ERROR", what) {}
};

struct ParameterError : Error {
    explicit ParameterError(const std::string& what)
        : Error(ErrorKind::Config, "PARAMETER_ERROR", what) {}
};

struct ShapeError : Error {
    explicit ShapeError(const std::string& what) : Error(ErrorKind::Config, "SHAPE_ERROR", what) {}
};

struct IoError : Error {
    explicit IoError(const std::string& what) : Error(ErrorKind::Data, "IO_ERROR", what) {}
};

struct FormatError : Error {
    explicit FormatError(const std::string& what) : Error(ErrorKind::Data, "FORMAT_ERROR", what) {}
};

class RowError : public Error {
public:
    RowError(std::size_t line, const std::string& detail, const std::string& source = {})
        : Error(ErrorKind::Data, "ROW_ERROR",
                (source.empty() ? "" : source + ": ") + "line " + std::to_string(line) + ": " + detail),
          line_(line), detail_(detail) {}
    std::size_t line() const noexcept { return line_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    std::size_t line_;
    std::string detail_;
};

struct DuplicateDateError : Error {
    explicit DuplicateDateError(const std::string& what)
        : Error(ErrorKind::Data, "DUPLICATE_DATE", what) {}
};

struct EmptySeriesError : Error {
    explicit EmptySeriesError(const std::string& what)
        : Error(ErrorKind::Data, "EMPTY_SERIES", what) {}
};

struct InsufficientDataError : Error {
    explicit InsufficientDataError(const std::string& what)
        : Error(ErrorKind::Data, "INSUFFICIENT_DATA", what) {}
};

struct DomainError : Error {
    explicit DomainError(const std::string& what) : Error(ErrorKind::Data, "DOMAIN_ERROR", what) {}
};

struct NumericError : Error {
    explicit NumericError(const std::string& what) : Error(ErrorKind::Numeric, "NUMERIC_ERROR", what) {}
};

struct TrainingError : Error {
    explicit TrainingError(const std::string& what)
        : Error(ErrorKind::Numeric, "TRAINING_DIVERGED", what) {}
};

} // namespace stockgan
