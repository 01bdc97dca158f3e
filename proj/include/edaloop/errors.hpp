#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace edaloop {

/// Base for every domain error. The CLI maps these to exit code 1.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Source location inside a text input (1-based; 0 means unknown).
struct Location {
    std::size_t line = 0;
    std::size_t column = 0;

    friend bool operator==(const Location&, const Location&) = default;
};

std::string to_string(const Location& loc);

class ConfigError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, Location where, std::string token);

    const Location& where() const noexcept { return where_; }
    const std::string& token() const noexcept { return token_; }

private:
    Location where_;
    std::string token_;
};

class ExtractionError : public Error {
public:
    using Error::Error;
};

class HeaderError : public Error {
public:
    using Error::Error;
};

class ConstraintError : public Error {
public:
    using Error::Error;
};

class BindingError : public Error {
public:
    explicit BindingError(std::string device);
    const std::string& device() const noexcept { return device_; }

private:
    std::string device_;
};

class ReportError : public Error {
public:
    ReportError(const std::string& what, std::string row, Location where = {});
    const std::string& row() const noexcept { return row_; }
    const Location& where() const noexcept { return where_; }

private:
    std::string row_;
    Location where_;
};

class DegenerateBias : public Error {
public:
    using Error::Error;
};

class EvalError : public Error {
public:
    using Error::Error;
};

class DelayError : public Error {
public:
    using Error::Error;
};

class MarginError : public Error {
public:
    using Error::Error;
};

class SummaryError : public Error {
public:
    using Error::Error;
};

class StatsError : public Error {
public:
    using Error::Error;
};

class AggregationError : public Error {
public:
    using Error::Error;
};

class DatasetError : public Error {
public:
    DatasetError(std::size_t index, std::string field, const std::string& detail);
    std::size_t index() const noexcept { return index_; }
    const std::string& field() const noexcept { return field_; }

private:
    std::size_t index_;
    std::string field_;
};

/// Transport-level provider failure. Retriable.
class TransportError : public Error {
public:
    TransportError(const std::string& what, int attempts = 1);
    int attempts() const noexcept { return attempts_; }

private:
    int attempts_;
};

/// Provider answered but with nothing usable. Never retried.
class EmptyResponseError : public Error {
public:
    using Error::Error;
};

} // namespace edaloop
