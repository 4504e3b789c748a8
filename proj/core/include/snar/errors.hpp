#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace snar {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the domain of an operation (invalid parameter, probability, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

class OptimizationError : public Error {
public:
    using Error::Error;
};

/// Matrix inversion refused because the condition number exceeds the guard.
class SingularMatrixError : public Error {
public:
    using Error::Error;
};

/// Input is too short or has zero variance.
class DegenerateError : public Error {
public:
    using Error::Error;
};

class InsufficientEventsError : public Error {
public:
    using Error::Error;
};

/// Monte Carlo study aborted (e.g. too many failed replications).
class StudyError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t row)
        : Error(what + " (row " + std::to_string(row) + ")"), row_(row) {}

    /// 1-based line number in the source file; the header is row 1.
    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

class MissingColumnError : public Error {
public:
    explicit MissingColumnError(const std::string& column)
        : Error("missing column: " + column), column_(column) {}

    const std::string& column() const noexcept { return column_; }

private:
    std::string column_;
};

/// Failure inside the analysis pipeline, tagged with the stage that raised it.
class PipelineError : public Error {
public:
    PipelineError(const std::string& stage, const std::string& what)
        : Error(stage + ": " + what), stage_(stage) {}

    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

}  // namespace snar
