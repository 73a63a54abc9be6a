#pragma once

#include <stdexcept>
#include <string>

namespace gofmult {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parameter vector outside the family's domain.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Sample cannot support estimation (zero variance, too few rows, outside support).
class DegenerateData : public Error {
public:
    using Error::Error;
};

class NonConvergence : public Error {
public:
    using Error::Error;
};

/// Estimated information matrix is not positive definite or badly conditioned.
class SingularInformation : public Error {
public:
    using Error::Error;
};

class NumericalFailure : public Error {
public:
    using Error::Error;
};

/// Too many parametric-bootstrap replicates failed to refit.
class ReplicateFailure : public Error {
public:
    using Error::Error;
};

/// File could not be opened, read or written.
class IoError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, long row, long column)
        : Error(what + " (row " + std::to_string(row) + ", column " + std::to_string(column) + ")"),
          row_(row),
          column_(column) {}

    [[nodiscard]] long row() const noexcept { return row_; }
    [[nodiscard]] long column() const noexcept { return column_; }

private:
    long row_;
    long column_;
};

}  // namespace gofmult
